"""The four-parameter kappa family and the members it contains.

Run: python demos/01_kappa_family.py
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from rkappa import Params4, k4d_cdf, k4d_pdf, k4d_quantile, support

## One location/scale, shapes on a small lattice
mu, sigma = 0.0, 1.0
lattice = {
    "GEV (h=0)": (0.1, 0.0),
    "Gumbel (k=0, h=0)": (0.0, 0.0),
    "generalized logistic (h=-1)": (0.1, -1.0),
    "generalized Pareto (h=1)": (0.1, 1.0),
    "kappa, k<0, h<0": (-0.2, -0.5),
}

print(f"{'member':<30}{'lower':>10}{'upper':>10}{'median':>10}{'q99':>10}")
for name, (k, h) in lattice.items():
    p = Params4(mu, sigma, k, h)
    lo, hi = support(p)
    med, q99 = k4d_quantile([0.5, 0.99], p)
    print(f"{name:<30}{lo:>10.3f}{hi:>10.3f}{med:>10.3f}{q99:>10.3f}")

## Shape k controls the tail: negative k gives a heavy upper tail
x = np.array([2.0, 5.0, 10.0])
for k in (0.2, 0.0, -0.2):
    p = Params4(mu, sigma, k, -0.5)
    xs = x[x < support(p).upper]
    tail = 1 - k4d_cdf(xs, p)
    print(f"k={k:+.1f}  P(X > {xs}) = {np.array2string(tail, precision=4)}")

## Density integrates to one (trapezoid on a fine grid)
p = Params4(mu, sigma, -0.1, -0.5)
grid = np.linspace(*k4d_quantile([1e-9, 1 - 1e-9], p), 200_001)
print("integral of the density:", round(float(trapezoid(k4d_pdf(grid, p), grid)), 6))
