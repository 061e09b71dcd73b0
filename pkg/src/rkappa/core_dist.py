"""Scalar GEV and four-parameter kappa (K4D) distribution functions.

Shape parameters follow Hosking's sign convention: the reduced variate is
``w(x) = 1 - k (x - mu) / sigma``, so ``k_here = -xi`` where ``xi`` is the
shape used by Coles (2001) and by ``ismev``/``evd``.  ``k > 0`` gives a bounded
upper tail, ``k < 0`` a heavy upper tail.

The K4D cdf is ``F(x) = (1 - h tau(x)) ** (1/h)`` with ``tau = w ** (1/k)``.
Special cases: ``h = 0`` GEV, ``h = -1`` generalized logistic, ``h = 1``
generalized Pareto, ``k = 0`` generalized Gumbel, ``h = k = 0`` Gumbel.
The limits ``k -> 0`` and ``h -> 0`` are taken exactly when the parameter is
exactly zero; no near-zero switching is done.

All functions accept scalars or array-likes and return a float for scalar
input, an ndarray otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainError

__all__ = [
    "Params4",
    "SupportInfo",
    "w",
    "tau",
    "support",
    "gevd_cdf",
    "gevd_pdf",
    "gevd_logpdf",
    "gevd_quantile",
    "k4d_cdf",
    "k4d_pdf",
    "k4d_logpdf",
    "k4d_quantile",
]

# tau beyond this is handled in log space when forming log(1 - h tau)
_LOG_BIG = np.log(1e8)


@dataclass(frozen=True)
class Params4:
    """Location ``mu``, scale ``sigma`` (> 0), shapes ``k`` and ``h``."""

    mu: float
    sigma: float
    k: float
    h: float = 0.0

    def __post_init__(self):
        for name in ("mu", "sigma", "k", "h"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")

    def __iter__(self) -> Iterator[float]:
        return iter((self.mu, self.sigma, self.k, self.h))

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.sigma, self.k, self.h])

    def replace(self, **changes) -> "Params4":
        return replace(self, **changes)


class SupportInfo(NamedTuple):
    lower: float
    upper: float

    def contains(self, x, closed: bool = False):
        x = np.asarray(x, dtype=float)
        if closed:
            return (x >= self.lower) & (x <= self.upper)
        return (x > self.lower) & (x < self.upper)


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _ret(out, scalar):
    return float(out[0]) if scalar else out


# Unchecked kernels.  They return nan/inf off the support and are shared with
# the r-largest densities and the likelihood.

def _log_w(x, mu, sigma, k):
    if k == 0.0:
        return np.zeros_like(x, dtype=float)
    return np.log1p(-k * (x - mu) / sigma)


def _log_tau(x, mu, sigma, k, log_w=None):
    if k == 0.0:
        return -(x - mu) / sigma
    if log_w is None:
        log_w = _log_w(x, mu, sigma, k)
    return log_w / k


def _log_cdf(log_tau, h):
    """log F from log tau; nan where 1 - h tau <= 0."""
    log_tau = np.asarray(log_tau, dtype=float)
    tau = np.exp(log_tau)
    if h == 0.0:
        return -tau
    out = np.log1p(-h * tau) / h
    if h < 0.0:
        big = log_tau > _LOG_BIG
        if np.any(big):
            lt = log_tau[big] if out.ndim else log_tau
            val = (np.log(-h) + lt + np.log1p(-np.exp(-lt) / h)) / h
            if out.ndim:
                out[big] = val
            else:
                out = val
    return out


def _quantile_from_log_p(log_p, mu, sigma, k, h):
    """K4D quantile for log non-exceedance probability ``log_p`` (< 0)."""
    log_p = np.asarray(log_p, dtype=float)
    if h == 0.0:
        log_y = np.log(-log_p)
    else:
        log_y = np.log(-np.expm1(h * log_p) / h)
    if k == 0.0:
        return mu - sigma * log_y
    return mu - sigma * np.expm1(k * log_y) / k


def support(p: Params4) -> SupportInfo:
    """Endpoints of the K4D support for ``p``."""
    mu, sigma, k, h = p
    if h > 0.0:
        # 1 - h tau = 0  <=>  tau = 1/h
        if k == 0.0:
            lower = mu + sigma * np.log(h)
        else:
            lower = mu - sigma * np.expm1(-k * np.log(h)) / k
    elif k < 0.0:
        lower = mu + sigma / k
    else:
        lower = -np.inf
    upper = mu + sigma / k if k > 0.0 else np.inf
    return SupportInfo(float(lower), float(upper))


def _check_inside(x, p, closed):
    sup = support(p)
    ok = sup.contains(x, closed=closed)
    if not np.all(ok):
        bad = x[~ok][0]
        kind = "closed" if closed else "open"
        raise DomainError(
            f"x={bad!r} outside the {kind} support [{sup.lower}, {sup.upper}] of {p}"
        )
    return sup


def w(x, p: Params4):
    """Reduced variate ``1 - k (x - mu) / sigma``."""
    x, scalar = _as_array(x)
    return _ret(1.0 - p.k * (x - p.mu) / p.sigma, scalar)


def tau(x, p: Params4):
    """``w(x) ** (1/k)``, or ``exp(-(x - mu)/sigma)`` when ``k == 0``."""
    x, scalar = _as_array(x)
    if p.k != 0.0:
        wx = 1.0 - p.k * (x - p.mu) / p.sigma
        if np.any(~(wx > 0)):
            raise DomainError(f"w(x) <= 0 for some x under {p}")
    with np.errstate(over="ignore"):
        out = np.exp(_log_tau(x, p.mu, p.sigma, p.k))
    return _ret(out, scalar)


def _cdf(x, p: Params4, h: float):
    x, scalar = _as_array(x)
    p = p.replace(h=h)
    sup = _check_inside(x, p, closed=True)
    mu, sigma, k, _ = p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = _log_w(x, mu, sigma, k)
        lt = _log_tau(x, mu, sigma, k, lw)
        out = np.exp(_log_cdf(lt, h))
    # rounding right at an endpoint can push w or 1 - h tau through zero
    bad = np.isnan(out)
    if np.any(bad):
        at_upper = np.abs(x - sup.upper) < np.abs(x - sup.lower)
        out[bad] = np.where(at_upper[bad], 1.0, 0.0)
    out[x == sup.lower] = 0.0
    out[x == sup.upper] = 1.0
    return _ret(out, scalar)


def _logpdf(x, p: Params4, h: float):
    x, scalar = _as_array(x)
    p = p.replace(h=h)
    _check_inside(x, p, closed=False)
    mu, sigma, k, _ = p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lw = _log_w(x, mu, sigma, k)
        lt = _log_tau(x, mu, sigma, k, lw)
        out = -np.log(sigma) + lt - lw + (1.0 - h) * _log_cdf(lt, h)
    return _ret(out, scalar)


def gevd_cdf(x, p: Params4):
    """GEV cdf ``exp(-tau(x))``; ``p.h`` is ignored."""
    return _cdf(x, p, 0.0)


def gevd_logpdf(x, p: Params4):
    return _logpdf(x, p, 0.0)


def gevd_pdf(x, p: Params4):
    return np.exp(gevd_logpdf(x, p))


def gevd_quantile(pq, p: Params4):
    return k4d_quantile(pq, p.replace(h=0.0))


def k4d_cdf(x, p: Params4):
    """K4D cdf; 0 and 1 at the support endpoints, DomainError outside."""
    return _cdf(x, p, p.h)


def k4d_logpdf(x, p: Params4):
    """Log density on the open interior of the support."""
    return _logpdf(x, p, p.h)


def k4d_pdf(x, p: Params4):
    return np.exp(k4d_logpdf(x, p))


def k4d_quantile(pq, p: Params4):
    """Inverse of :func:`k4d_cdf` at non-exceedance probability ``pq``.

    Return levels use exceedance probability ``p_exc = 1 - pq``.
    """
    pq, scalar = _as_array(pq)
    if np.any(~((pq > 0.0) & (pq < 1.0))):
        raise DomainError("probabilities must lie strictly inside (0, 1)")
    out = _quantile_from_log_p(np.log(pq), p.mu, p.sigma, p.k, p.h)
    return _ret(out, scalar)
