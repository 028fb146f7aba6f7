"""JSON Schemas for the stdout payload of every CLI command."""

_metrics = {
    "type": "object",
    "required": ["mae", "mse"],
    "properties": {"mae": {"type": "number", "minimum": 0}, "mse": {"type": "number", "minimum": 0}},
}

TRAIN = {
    "type": "object",
    "required": ["command", "val", "best_epoch", "epochs_run", "checkpoint", "history"],
    "properties": {
        "command": {"const": "train"},
        "val": _metrics,
        "best_epoch": {"type": "integer", "minimum": 0},
        "epochs_run": {"type": "integer", "minimum": 1},
        "checkpoint": {"type": "string"},
        "history": {"type": "string"},
    },
}

EVAL = {
    "type": "object",
    "required": ["command", "split", "n_windows", "mae", "mse", "sampled"],
    "properties": {
        "command": {"const": "eval"},
        "split": {"enum": ["train", "val", "test"]},
        "n_windows": {"type": "integer", "minimum": 1},
        "mae": {"type": "number", "minimum": 0},
        "mse": {"type": "number", "minimum": 0},
        "sampled": {"type": "boolean"},
        "adjacency_dir": {"type": ["string", "null"]},
    },
}

SYNTH = {
    "type": "object",
    "required": ["command", "out", "n_vars", "n_steps", "kind", "graphs"],
    "properties": {
        "command": {"const": "synth"},
        "out": {"type": "string"},
        "n_vars": {"type": "integer", "minimum": 1},
        "n_steps": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["intra", "inter"]},
        "graphs": {"type": "array", "items": {"type": "string"}},
    },
}

GRADCHECK = {
    "type": "object",
    "required": ["command", "passed", "tol", "points", "errors"],
    "properties": {
        "command": {"const": "gradcheck"},
        "passed": {"type": "boolean"},
        "tol": {"type": "number"},
        "points": {"type": "integer", "minimum": 1},
        "errors": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
        "failures": {"type": "array", "items": {"type": "string"}},
    },
}

ADF = {
    "type": "object",
    "required": ["command", "max_lag", "statistics", "average"],
    "properties": {
        "command": {"const": "adf"},
        "max_lag": {"type": "integer", "minimum": 0},
        "statistics": {"type": "object", "additionalProperties": {"type": "number"}},
        "average": {"type": "number"},
    },
}

BY_COMMAND = {"train": TRAIN, "eval": EVAL, "synth": SYNTH, "gradcheck": GRADCHECK, "adf": ADF}
