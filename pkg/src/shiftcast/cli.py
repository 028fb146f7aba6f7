"""Command-line entry point: ``shiftcast {train,eval,synth,gradcheck,adf}``.

Results go to stdout as one JSON object; files go to the requested output
paths; diagnostics go to stderr. Exit codes: 0 ok, 1 bad flags, 2 data or
shape errors, 3 diverged training, 4 gradient check failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from shiftcast.config import ABLATIONS, TrainConfig
from shiftcast.data import (
    SplitSpec,
    make_windows,
    load_csv,
    save_csv,
    split,
    zscore_apply,
    zscore_fit,
)
from shiftcast.diagnostics import TINY, adf_summary, gradcheck_model
from shiftcast.errors import DataError, DivergedLoss, ShapeMismatch, UnknownAblation
from shiftcast.synth import ShiftScenario, gen_inter_shift, gen_intra_shift, ground_truth_graph
from shiftcast.train import Checkpoint, evaluate, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED, EXIT_GRADCHECK = 0, 1, 2, 3, 4

log = logging.getLogger("shiftcast")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def _fail(code: int, msg: str) -> int:
    sys.stderr.write(f"error: {msg}\n")
    return code


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("SHIFTCAST_THREADS", "1"))


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def prepare_slices(path: str, L: int, H: int):
    """Load, split 7:1:2, and z-score every slice with train-only statistics."""
    raw = load_csv(path)
    parts = split(raw, SplitSpec(), min_len=L + H)
    stats = zscore_fit(parts[0])
    return raw, stats, [zscore_apply(p, stats) for p in parts]


def _parse_ablations(values) -> tuple[str, ...]:
    out = []
    for v in values or ():
        out += [a.strip().replace("-", "_") for a in v.split(",") if a.strip()]
    bad = [a for a in out if a not in ABLATIONS]
    if bad:
        raise UnknownAblation(f"unknown ablation(s) {bad}; choose from {list(ABLATIONS)}")
    return tuple(out)


def cmd_train(args) -> int:
    try:
        config = TrainConfig(
            L=args.lookback, H=args.horizon, d=args.latent_dim, K=args.hops, tau=args.tau,
            alpha=args.alpha, lr=args.lr, batch=args.batch, max_epochs=args.epochs,
            patience=args.patience, seed=args.seed, ablations=_parse_ablations(args.ablate),
            b=args.fourier_width, clip_norm=None if args.no_clip else 5.0, stride=args.stride,
            eval_sample=args.eval_sample,
        )
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    try:
        raw, stats, (tr, va, _) = prepare_slices(args.data, config.L, config.H)
        wt = make_windows(tr, config.L, config.H, config.stride, "train")
        wv = make_windows(va, config.L, config.H, 1, "val")
    except (DataError, OSError) as exc:
        return _fail(EXIT_DATA, str(exc))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: str(out / v) for k, v in (("manifest", "manifest.json"), ("checkpoint", "checkpoint.json"),
                                            ("history", "history.jsonl"), ("norm_stats", "norm_stats.json"))}
    manifest = {
        "command": " ".join(["shiftcast"] + sys.argv[1:]) if args.argv is None else " ".join(args.argv),
        "config": config.to_dict(),
        "dataset": {"path": str(args.data), "sha256": _sha256(args.data), "n_vars": raw.n_vars,
                    "n_steps": raw.n_steps},
        "started": _now(),
        "outputs": paths,
    }
    Path(paths["manifest"]).write_text(json.dumps(manifest, indent=2))
    Path(paths["norm_stats"]).write_text(stats.to_json())

    history_fh = open(paths["history"], "w")
    try:
        ckpt, history = train(config, wt, wv, threads=_threads(args),
                              on_epoch=lambda r: (history_fh.write(json.dumps(r.to_dict()) + "\n"),
                                                  history_fh.flush()))
    except DivergedLoss as exc:
        return _fail(EXIT_DIVERGED, str(exc))
    finally:
        history_fh.close()
    ckpt.save(paths["checkpoint"])
    manifest["finished"] = _now()
    Path(paths["manifest"]).write_text(json.dumps(manifest, indent=2))
    best = history.best
    _emit({"command": "train", "val": {"mae": best.val_mae, "mse": best.val_mse},
           "best_epoch": history.best_epoch, "epochs_run": len(history.epochs),
           "checkpoint": paths["checkpoint"], "history": paths["history"]})
    return EXIT_OK


def _write_matrix(path: Path, m: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def export_adjacency(ckpt: Checkpoint, windows, directory: str | Path, sample: bool) -> int:
    """Write ``W_<anchor>.csv`` and ``A_<anchor>.csv`` for every window."""
    from shiftcast.train import _eval_noise, as_arrays

    model = ckpt.build_model()
    if not model.config.use_inter:
        raise ValueError("checkpoint was trained without the inter-series learner; no graph to export")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    X, _ = as_arrays(windows)
    anchors = [w.anchor for w in windows]
    for start in range(0, len(anchors), 256):
        stop = min(start + 256, len(anchors))
        noise = _eval_noise(model, model.config.seed, np.arange(start, stop)) if sample else None
        fw = model.forward(X[start:stop], noise=noise)
        for j in range(stop - start):
            _write_matrix(d / f"W_{anchors[start + j]}.csv", fw.W.data[j])
            _write_matrix(d / f"A_{anchors[start + j]}.csv", fw.A.data[j])
    return len(anchors)


def cmd_eval(args) -> int:
    try:
        ckpt = Checkpoint.load(args.checkpoint)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_DATA, f"cannot read checkpoint: {exc}")
    c = ckpt.config
    try:
        raw, _, slices = prepare_slices(args.data, c.L, c.H)
    except (DataError, OSError) as exc:
        return _fail(EXIT_DATA, str(exc))
    if raw.n_vars != ckpt.n_vars:
        return _fail(EXIT_DATA, f"checkpoint expects N={ckpt.n_vars} variables, data has N={raw.n_vars}")
    part = dict(zip(("train", "val", "test"), slices))[args.split]
    windows = make_windows(part, c.L, c.H, 1, args.split)
    sample = args.eval_sample or c.eval_sample
    try:
        m = evaluate(ckpt, windows, sample=sample)
        if args.export_adjacency:
            export_adjacency(ckpt, windows, args.export_adjacency, sample)
    except ShapeMismatch as exc:
        return _fail(EXIT_DATA, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    _emit({"command": "eval", "split": args.split, "n_windows": len(windows), "mae": m.mae, "mse": m.mse,
           "sampled": bool(sample), "adjacency_dir": args.export_adjacency})
    return EXIT_OK


def bundled_scenarios() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("shiftcast.scenarios").iterdir()
                  if p.name.endswith(".json"))


def load_scenario(ref: str) -> ShiftScenario:
    """A path to a scenario JSON file, or the name of a bundled scenario."""
    if not Path(ref).exists() and ref in bundled_scenarios():
        return ShiftScenario.from_dict(json.loads(
            resources.files("shiftcast.scenarios").joinpath(f"{ref}.json").read_text()))
    return ShiftScenario.load(ref)


def cmd_synth(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_DATA, f"invalid scenario: {exc}")
    identity = all(np.array_equal(r.mixing, np.eye(scenario.n_vars)) for r in scenario.regimes)
    kind = args.kind if args.kind != "auto" else ("intra" if identity else "inter")
    try:
        series = gen_intra_shift(scenario) if kind == "intra" else gen_inter_shift(scenario)
    except DataError as exc:
        return _fail(EXIT_DATA, str(exc))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(series, out)
    graphs = []
    for i, r in enumerate(scenario.regimes):
        g = out.with_name(f"{out.stem}_graph_regime{i}.csv")
        _write_matrix(g, ground_truth_graph(scenario, r.start))
        graphs.append(str(g))
    _emit({"command": "synth", "out": str(out), "n_vars": series.n_vars, "n_steps": series.n_steps,
           "kind": kind, "graphs": graphs})
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = gradcheck_model(TINY, n_vars=3, seed=args.seed, points=args.points, tol=args.tol,
                             corrupt=args.corrupt)
    width = max(len(k) for k in report.errors)
    for k, e in report.errors.items():
        sys.stderr.write(f"{k:<{width}}  {e:.3e}  {'ok' if e < report.tol else 'FAIL'}\n")
    _emit({"command": "gradcheck", "passed": report.passed, "tol": report.tol, "points": report.points,
           "errors": report.errors, "failures": report.failures})
    if not report.passed:
        return _fail(EXIT_GRADCHECK, f"gradient check failed for: {', '.join(report.failures)}")
    return EXIT_OK


def cmd_adf(args) -> int:
    try:
        series = load_csv(args.data, header=not args.no_header)
        summary = adf_summary(series, args.max_lag)
    except (DataError, OSError) as exc:
        return _fail(EXIT_DATA, str(exc))
    _emit({"command": "adf", **summary})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiftcast", description="Forecasting under intra-/inter-series transitional shift.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="train a model on a CSV dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--lookback", type=int, default=96)
    t.add_argument("--horizon", type=int, default=96)
    t.add_argument("--latent-dim", type=int, default=128)
    t.add_argument("--hops", type=int, default=2)
    t.add_argument("--tau", type=float, default=0.5)
    t.add_argument("--alpha", type=float, default=0.6)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--batch", type=int, default=128)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--patience", type=int, default=5)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--ablate", action="append", metavar="LIST",
                   help=f"comma-separated subset of {','.join(ABLATIONS)}")
    t.add_argument("--fourier-width", type=int, default=256)
    t.add_argument("--stride", type=int, default=1)
    t.add_argument("--no-clip", action="store_true", help="disable global-norm gradient clipping")
    t.add_argument("--eval-sample", action="store_true", help="validate with sampled latents")
    t.add_argument("--threads", type=int, default=None)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--split", choices=("train", "val", "test"), default="test")
    e.add_argument("--export-adjacency", metavar="DIR", default=None)
    e.add_argument("--eval-sample", action="store_true")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="generate a synthetic shift dataset")
    s.add_argument("--scenario", required=True, help="scenario JSON path or bundled name")
    s.add_argument("--out", required=True)
    s.add_argument("--kind", choices=("auto", "intra", "inter"), default="auto")
    s.set_defaults(func=cmd_synth)

    g = sub.add_parser("gradcheck", help="finite-difference check of every parameter gradient")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--points", type=int, default=3)
    g.add_argument("--tol", type=float, default=1e-4)
    g.add_argument("--corrupt", default=None, help=argparse.SUPPRESS)
    g.set_defaults(func=cmd_gradcheck)

    a = sub.add_parser("adf", help="per-variable augmented Dickey-Fuller statistics")
    a.add_argument("--data", required=True)
    a.add_argument("--max-lag", type=int, default=None)
    a.add_argument("--no-header", action="store_true")
    a.set_defaults(func=cmd_adf)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = None if argv is None else ["shiftcast"] + list(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownAblation as exc:
        return _fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
