"""Joint, marginal and conditional laws of r-largest order statistics.

The rK4D joint density of ``x(1) >= ... >= x(r)`` is::

    f(x) = sigma**-r * C_r * prod_s w(x(s))**(1/k - 1) * F(x(r))**(1 - r h)

with ``C_r = prod_{j=1}^{r-1} (1 - j h)``.  ``h = 0`` gives the r-largest GEV
model of Smith (1986) and Tawn (1988); ``h = -1``, ``(h, k) = (-1, 0)`` and
``k = 0`` give the r-largest generalized logistic, logistic and generalized
Gumbel models.

Everything is evaluated in log space.  Marginal cdfs use the telescoping sum::

    H_s(t) = sum_{i=0}^{s-1} C_i / i! * tau(t)**i * F(t)**(1 - i h)

whose derivative is the s-th marginal density and whose ``h -> 0`` limit is
the Poisson-sum form ``exp(-tau) * sum tau**i / i!``.
"""
from __future__ import annotations

import enum
from math import lgamma

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .core_dist import (
    Params4,
    _as_array,
    _check_inside,
    _log_cdf,
    _log_tau,
    _log_w,
    _quantile_from_log_p,
    _ret,
    k4d_cdf,
    k4d_quantile,
    support,
)
from .errors import ConstraintError, ConvergenceError, DomainError, OrderError

__all__ = [
    "ModelKind",
    "c_r",
    "log_c_r",
    "rk4d_log_joint_pdf",
    "rgevd_log_joint_pdf",
    "special_log_joint_pdf",
    "rgld_log_joint_pdf",
    "rld_log_joint_pdf",
    "rggd_log_joint_pdf",
    "marginal_pdf",
    "marginal_logpdf",
    "marginal_cdf",
    "marginal_quantile",
    "conditional_cdf",
    "conditional_pdf",
]

_NAMES = ("mu", "sigma", "k", "h")


class ModelKind(enum.Enum):
    """Members of the rK4D family and the parameters each one pins."""

    RGEVD = "rgevd"
    RK4D = "rk4d"
    RGLD = "rgld"
    RLD = "rld"
    RGGD = "rggd"

    @property
    def fixed(self) -> dict:
        return _FIXED[self]

    @property
    def free(self) -> tuple:
        """Names of the estimated parameters, in (mu, sigma, k, h) order."""
        return tuple(n for n in _NAMES if n not in self.fixed)

    @property
    def n_params(self) -> int:
        return len(self.free)

    def freeze(self, p: Params4) -> Params4:
        """Return ``p`` with this model's pinned parameters imposed."""
        return p.replace(**self.fixed) if self.fixed else p

    def expand(self, theta) -> np.ndarray:
        """Map free-parameter vector ``theta`` to the full (mu, sigma, k, h)."""
        full = np.array([self.fixed.get(n, np.nan) for n in _NAMES])
        full[[_NAMES.index(n) for n in self.free]] = theta
        return full

    def reduce(self, p: Params4) -> np.ndarray:
        return np.array([getattr(p, n) for n in self.free])

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model {value!r}; choose from {choices}") from None


_FIXED = {
    ModelKind.RGEVD: {"h": 0.0},
    ModelKind.RK4D: {},
    ModelKind.RGLD: {"h": -1.0},
    ModelKind.RLD: {"k": 0.0, "h": -1.0},
    ModelKind.RGGD: {"k": 0.0},
}


def c_r(r: int, h: float) -> float:
    """``prod_{i=1}^{r-1} [1 - (r - i) h]``; 1 for ``r = 1`` (and ``r = 0``)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return float(np.prod(1.0 - h * np.arange(1, max(r, 1))))


def log_c_r(r: int, h: float) -> float:
    """log C_r, requiring every factor positive (i.e. ``h < 1/(r-1)``)."""
    factors = 1.0 - h * np.arange(1, max(r, 1))
    if np.any(factors <= 0):
        raise ConstraintError(f"C_{r}(h={h}) invalid; need h < 1/(r-1)")
    return float(np.sum(np.log(factors)))


def _as_rows(x):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError("x must be a vector of r values or an (n, r) array")
    return arr, single


def _check_ordered(rows):
    if rows.shape[1] > 1 and np.any(np.diff(rows, axis=1) > 0):
        raise OrderError("r-largest values must be nonincreasing: x(1) >= ... >= x(r)")


def rk4d_log_joint_pdf(x, p: Params4):
    """Log joint density of one r-vector, or of each row of an (n, r) array."""
    rows, single = _as_rows(x)
    _check_ordered(rows)
    r = rows.shape[1]
    lc = log_c_r(r, p.h)
    _check_inside(rows.ravel(), p, closed=False)
    mu, sigma, k, h = p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = _log_w(rows, mu, sigma, k)
        lt = _log_tau(rows, mu, sigma, k, lw)
        out = (
            -r * np.log(sigma)
            + lc
            + np.sum(lt - lw, axis=1)
            + (1.0 - r * h) * _log_cdf(lt[:, -1], h)
        )
    return float(out[0]) if single else out


def rgevd_log_joint_pdf(x, p: Params4):
    """r-largest GEV log joint density; ``p.h`` is ignored."""
    return rk4d_log_joint_pdf(x, p.replace(h=0.0))


def special_log_joint_pdf(x, p: Params4, model: ModelKind):
    """Log joint density of ``model``, i.e. rK4D at the pinned parameters."""
    return rk4d_log_joint_pdf(x, ModelKind.parse(model).freeze(p))


# Closed forms of the three special cases written out term by term.  They are
# an independent route to the same numbers as special_log_joint_pdf.

def rgld_log_joint_pdf(x, mu: float, sigma: float, k: float):
    """r-largest generalized logistic: ``h = -1`` so F**(1 + r) = (1 + tau)**-(1 + r)."""
    rows, single = _as_rows(x)
    _check_ordered(rows)
    r = rows.shape[1]
    c = np.prod(1.0 + np.arange(1, r))
    wx = 1.0 - k * (rows - mu) / sigma
    if np.any(wx <= 0):
        raise DomainError("w(x) <= 0")
    g = np.sum((1.0 / k - 1.0) * np.log(wx), axis=1)
    tau_r = wx[:, -1] ** (1.0 / k)
    out = -r * np.log(sigma) + np.log(c) + g - (1.0 + r) * np.log1p(tau_r)
    return float(out[0]) if single else out


def rld_log_joint_pdf(x, mu: float, sigma: float):
    """r-largest logistic: ``(h, k) = (-1, 0)``."""
    rows, single = _as_rows(x)
    _check_ordered(rows)
    r = rows.shape[1]
    c = np.prod(1.0 + np.arange(1, r))
    alpha = (rows - mu) / sigma
    out = (
        -r * np.log(sigma)
        + np.log(c)
        - (1.0 + r) * np.log1p(np.exp(-alpha[:, -1]))
        - np.sum(alpha, axis=1)
    )
    return float(out[0]) if single else out


def rggd_log_joint_pdf(x, mu: float, sigma: float, h: float):
    """r-largest generalized Gumbel: ``k = 0``."""
    rows, single = _as_rows(x)
    _check_ordered(rows)
    r = rows.shape[1]
    c = np.prod(1.0 - h * np.arange(1, r))
    if not c > 0:
        raise ConstraintError("C_r <= 0")
    alpha = (rows - mu) / sigma
    base = 1.0 - h * np.exp(-alpha[:, -1])
    if np.any(base <= 0):
        raise DomainError("1 - h exp(-alpha) <= 0")
    out = (
        -r * np.log(sigma)
        + np.log(c)
        + (1.0 - r * h) / h * np.log(base)
        - np.sum(alpha, axis=1)
    )
    return float(out[0]) if single else out


def _marginal_setup(s, p, model):
    if int(s) != s or s < 1:
        raise ValueError("order index s must be an integer >= 1")
    p = ModelKind.parse(model).freeze(p)
    log_c_r(int(s), p.h)
    return int(s), p


def marginal_logpdf(s: int, t, p: Params4, model: ModelKind = ModelKind.RK4D):
    """Log density of the s-th largest value."""
    s, p = _marginal_setup(s, p, model)
    t, scalar = _as_array(t)
    _check_inside(t, p, closed=False)
    mu, sigma, k, h = p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = _log_w(t, mu, sigma, k)
        lt = _log_tau(t, mu, sigma, k, lw)
        out = (
            -np.log(sigma)
            + np.log(c_r(s, h))
            - lgamma(s)
            + s * lt
            - lw
            + (1.0 - s * h) * _log_cdf(lt, h)
        )
    return _ret(out, scalar)


def marginal_pdf(s: int, t, p: Params4, model: ModelKind = ModelKind.RK4D):
    """Density of the s-th largest value:
    ``C_s / (s-1)! / sigma * w**(s/k - 1) * F**(1 - s h)``."""
    return np.exp(marginal_logpdf(s, t, p, model))


def _marginal_log_cdf(s, t, mu, sigma, k, h):
    lw = _log_w(t, mu, sigma, k)
    lt = _log_tau(t, mu, sigma, k, lw)
    lf = _log_cdf(lt, h)
    i = np.arange(s)[:, None]
    log_coef = np.array([np.log(c_r(j, h)) - lgamma(j + 1) for j in range(s)])[:, None]
    terms = log_coef + i * lt[None, :] + (1.0 - i * h) * lf[None, :]
    # i * log tau is 0 * (-inf) = nan at tau = 0; the term is 0 there for i >= 1
    terms[:, np.isneginf(lt)] = np.where(i == 0, 0.0, -np.inf)
    return logsumexp(terms, axis=0)


def marginal_cdf(s: int, t, p: Params4, model: ModelKind = ModelKind.RK4D):
    """Cdf of the s-th largest value (telescoping-sum form)."""
    s, p = _marginal_setup(s, p, model)
    t, scalar = _as_array(t)
    sup = _check_inside(t, p, closed=True)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(_marginal_log_cdf(s, t, *p))
    bad = np.isnan(out)
    if np.any(bad):
        at_upper = np.abs(t - sup.upper) < np.abs(t - sup.lower)
        out[bad] = np.where(at_upper[bad], 1.0, 0.0)
    out[t == sup.lower] = 0.0
    out[t == sup.upper] = 1.0
    return _ret(np.clip(out, 0.0, 1.0), scalar)


def marginal_quantile(s: int, pq, p: Params4, model: ModelKind = ModelKind.RK4D,
                      xtol: float = 1e-12):
    """Solve ``marginal_cdf(s, z) = pq`` by Brent's method.

    The s-th largest is stochastically below the maximum, so the K4D quantile
    at ``pq`` brackets the root from above; the lower end steps down through
    K4D quantiles of ``pq / 10**j`` until the cdf drops below ``pq``.
    """
    s, p = _marginal_setup(s, p, model)
    pq, scalar = _as_array(pq)
    if np.any(~((pq > 0.0) & (pq < 1.0))):
        raise DomainError("probabilities must lie strictly inside (0, 1)")
    if s == 1:
        return _ret(_quantile_from_log_p(np.log(pq), *p), scalar)
    sup = support(p)
    out = np.empty_like(pq)
    for n, q in enumerate(pq):
        def g(z):
            return marginal_cdf(s, z, p) - q

        hi = float(k4d_quantile(q, p))
        lo = None
        for j in range(1, 400):
            lp = np.log(q) - j * np.log(10.0)
            cand = float(_quantile_from_log_p(lp, *p))
            if not np.isfinite(cand) or cand <= sup.lower:
                if np.isfinite(sup.lower):
                    lo = sup.lower
                break
            if g(cand) < 0:
                lo = cand
                break
        if lo is None:
            raise ConvergenceError(f"could not bracket the s={s} marginal quantile at {q}")
        if g(hi) == 0:
            out[n] = hi
            continue
        out[n] = brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return _ret(out, scalar)


def _conditional_setup(x_s, x_prev, s, p):
    if int(s) != s or s < 2:
        raise ValueError("conditional laws need s >= 2")
    expo = 1.0 - (s - 1) * p.h
    if not expo > 0:
        raise ConstraintError(f"1 - (s-1) h = {expo} <= 0")
    x_s, scalar = _as_array(x_s)
    x_prev = np.broadcast_to(np.asarray(x_prev, dtype=float), x_s.shape)
    if np.any(x_s > x_prev):
        raise OrderError("conditional laws need x_s <= x_prev")
    return x_s, x_prev, scalar, expo


def conditional_cdf(x_s, x_prev, s: int, p: Params4):
    """``(F(x_s) / F(x_prev)) ** (1 - (s-1) h)`` for ``x_s <= x_prev``."""
    x_s, x_prev, scalar, expo = _conditional_setup(x_s, x_prev, s, p)
    f_s = np.atleast_1d(k4d_cdf(x_s, p))
    f_prev = np.atleast_1d(k4d_cdf(x_prev, p))
    if np.any(f_prev <= 0):
        raise DomainError("x_prev at the lower support endpoint")
    with np.errstate(divide="ignore"):
        out = np.exp(expo * (np.log(f_s) - np.log(f_prev)))
    return _ret(out, scalar)


def conditional_pdf(x_s, x_prev, s: int, p: Params4):
    """Density of x(s) given x(s-1) = x_prev (Markov in the previous value)."""
    x_s, x_prev, scalar, expo = _conditional_setup(x_s, x_prev, s, p)
    _check_inside(x_s, p, closed=False)
    _check_inside(x_prev, p, closed=False)
    mu, sigma, k, h = p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = _log_w(x_s, mu, sigma, k)
        lt = _log_tau(x_s, mu, sigma, k, lw)
        lf_prev = _log_cdf(_log_tau(x_prev, mu, sigma, k), h)
        out = (
            -np.log(sigma)
            + np.log(expo)
            + lt
            - lw
            + (1.0 - s * h) * _log_cdf(lt, h)
            - expo * lf_prev
        )
    return _ret(np.exp(out), scalar)
