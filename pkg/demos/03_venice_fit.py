"""Fitting the Venice sea levels with the rGEVD and the rK4D.

The bundled file holds the annual maxima (r = 1).  With the full ten-value
series installed (``python -m rkappa.fetch_venice``) the script also runs
the r = 1..10 sweep.

Run: python demos/03_venice_fit.py
"""
from __future__ import annotations

import warnings

from rkappa import ModelKind, diagnostics, fit_sweep, return_level
from rkappa.data_io import validate, venice, venice_maxima

try:
    data, rs = venice(), list(range(1, 11))
except FileNotFoundError as exc:
    print(f"({exc})\n")
    data, rs = venice_maxima(), [1]

report = validate(data)
print(f"{report.m} years, values from {report.minimum:.0f} to {report.maximum:.0f} cm")
for msg in report.warnings:
    print("note:", msg)

## Both models, every r; shapes use the 1 - k (x - mu) / sigma sign
for model in (ModelKind.RGEVD, ModelKind.RK4D):
    print(f"\n{model.value}")
    print(f"{'r':>3}{'nllh':>10}{'mu':>9}{'sigma':>8}{'k':>8}{'h':>8}{'r20':>9}{'se':>7}{'AIC':>9}{'BIC':>9}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fits = fit_sweep(data, rs, model)
    for f in fits:
        rl, d = return_level(1 / 20, f), diagnostics(f)
        p = f.params
        print(f"{f.r_used:>3}{f.nllh:>10.1f}{p.mu:>9.2f}{p.sigma:>8.2f}{p.k:>8.3f}{p.h:>8.2f}"
              f"{rl.level:>9.1f}{rl.se:>7.1f}{d.aic:>9.1f}{d.bic:>9.1f}")
