"""Drawing r-largest vectors, and why the naive sampler is biased.

Run: python demos/02_sampling.py
"""
from __future__ import annotations

import numpy as np
from scipy import stats

from rkappa import Params4, marginal_cdf, sample_rk4d, sample_rk4d_rejection

p = Params4(0.0, 1.0, -0.1, -0.5)
n, r = 50_000, 3

## Exact sampler: invert the conditional cdf component by component
x = sample_rk4d(n, r, p, seed=2024)
print("first rows:\n", np.round(x[:3], 4))
print("rows nonincreasing:", bool(np.all(np.diff(x, axis=1) <= 0)))

for s in range(1, r + 1):
    ks = stats.kstest(x[:, s - 1], lambda t: marginal_cdf(s, t, p))
    print(f"exact     s={s}: KS stat {ks.statistic:.4f}, p-value {ks.pvalue:.3f}")

## Accept/reject against the parent samples a truncated K4D instead,
## which only coincides with the rK4D conditional when h = 0
y = sample_rk4d_rejection(n, r, p, seed=2024)
for s in range(2, r + 1):
    ks = stats.kstest(y[:, s - 1], lambda t: marginal_cdf(s, t, p))
    print(f"rejection s={s}: KS stat {ks.statistic:.4f}, p-value {ks.pvalue:.2e}")

p0 = p.replace(h=0.0)
y0 = sample_rk4d_rejection(n, r, p0, seed=7)
ks = stats.kstest(y0[:, 1], lambda t: marginal_cdf(2, t, p0))
print(f"rejection at h=0, s=2: p-value {ks.pvalue:.3f}")
