import json
from pathlib import Path

import numpy as np
import pytest

from shiftcast import cli
from shiftcast.config import TrainConfig
from shiftcast.data import RawSeries, save_csv

DATA = Path(__file__).parent / "data"

# Small enough that a full forward/backward over a handful of windows is instant.
SMALL = TrainConfig(L=8, H=4, d=8, K=2, b=16, batch=4, max_epochs=3, patience=3, chunk=2)


def run_cli(capsys, *argv):
    """Run the CLI in-process; returns (exit code, parsed stdout JSON or None, stderr)."""
    try:
        code = cli.main([str(a) for a in argv])
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    payload = json.loads(out) if out.strip() else None
    return code, payload, err


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_config():
    return SMALL


@pytest.fixture
def toy_csv(tmp_path):
    """Three-variable AR(1) series with a date column, long enough for L=8, H=4."""
    g = np.random.default_rng(3)
    T = 200
    x = np.zeros((3, T))
    for t in range(1, T):
        x[:, t] = 0.8 * x[:, t - 1] + g.standard_normal(3)
    path = tmp_path / "toy.csv"
    with open(path, "w") as fh:
        fh.write("date,a,b,c\n")
        for t in range(T):
            fh.write(f"2020-01-{t:03d}," + ",".join(repr(float(v)) for v in x[:, t]) + "\n")
    return path


@pytest.fixture
def write_series(tmp_path):
    def _write(values, name="series.csv"):
        path = tmp_path / name
        save_csv(RawSeries(np.atleast_2d(values)), path)
        return path
    return _write


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request):
    """Record one pass/fail line for the acceptance summary; also printed immediately."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def _record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
