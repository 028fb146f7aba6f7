"""Gradient check of the whole model and ADF statistics for stationary vs unit-root series.

Run: python demos/diagnostics.py
"""
import numpy as np

from shiftcast.data import RawSeries
from shiftcast.diagnostics import adf_summary, gradcheck_model

report = gradcheck_model(points=1)
worst = max(report.errors, key=report.errors.get)
print(f"gradient check over {len(report.errors)} parameters: passed={report.passed}, "
      f"worst {worst} at {report.errors[worst]:.2e}")

bad = gradcheck_model(points=1, corrupt="tfe.ff1.W")
print(f"with a deliberately wrong gradient: passed={bad.passed}, failures={bad.failures}")

g = np.random.default_rng(1)
walk = np.cumsum(g.standard_normal((3, 3000)), axis=1)
noise = g.standard_normal((3, 3000))
for name, values in (("random walks", walk), ("white noise", noise)):
    s = adf_summary(RawSeries(values))
    print(f"ADF {name}: average {s['average']:.2f} at max lag {s['max_lag']}")
