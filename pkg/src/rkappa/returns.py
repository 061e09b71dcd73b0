"""Return levels with delta-method standard errors, and fit diagnostics.

A T-block return level is the quantile of the block-maximum law exceeded with
probability ``p = 1/T``; for a K4D parent::

    z_p = mu + sigma / k * (1 - y_p ** k),    y_p = (1 - (1 - p) ** h) / h

with ``y_p = -log(1 - p)`` when ``h = 0`` and ``z_p = mu - sigma log y_p`` when
``k = 0``.  ``Var(z_p) ~ grad' V grad`` with ``V`` the fitted covariance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core_dist import Params4
from .errors import DomainError, MissingCovariance
from .inference import FitResult, RLargestSample
from .rlargest import ModelKind, marginal_pdf, marginal_quantile

__all__ = [
    "ReturnLevel",
    "ModelDiagnostics",
    "return_level_value",
    "return_level_gradient",
    "return_level",
    "diagnostics",
    "qq_data",
    "marginal_pdf_curve",
]


@dataclass(frozen=True)
class ReturnLevel:
    period: float
    level: float
    se: Optional[float]
    p: float

    def to_dict(self) -> dict:
        return {"period": self.period, "p": self.p, "level": self.level, "se": self.se}


@dataclass(frozen=True)
class ModelDiagnostics:
    aic: float
    bic: float
    trace_v: float
    log_det_v: float

    def to_dict(self) -> dict:
        return {"aic": self.aic, "bic": self.bic, "trV": self.trace_v, "logdetV": self.log_det_v}


def _check_p(p_exc):
    if not 0.0 < p_exc < 1.0:
        raise DomainError(f"exceedance probability must lie in (0, 1), got {p_exc}")


def _log_y(p_exc, h):
    lq = np.log1p(-p_exc)
    if h == 0.0:
        return np.log(-lq)
    return np.log(-np.expm1(h * lq) / h)


def return_level_value(p_exc: float, params: Params4) -> float:
    """Level exceeded with probability ``p_exc`` by the block maximum."""
    _check_p(p_exc)
    mu, sigma, k, h = params
    ly = _log_y(p_exc, h)
    if k == 0.0:
        return float(mu - sigma * ly)
    return float(mu - sigma * np.expm1(k * ly) / k)


def return_level_gradient(p_exc: float, params: Params4) -> np.ndarray:
    """Analytic gradient of the return level in (mu, sigma, k, h).

    The h component is the derivative of the K4D quantile; for a GEV fit only
    the first three entries are used.
    """
    _check_p(p_exc)
    mu, sigma, k, h = params
    lq = np.log1p(-p_exc)
    ly = _log_y(p_exc, h)
    if k == 0.0:
        d_sigma = -ly
        d_k = -0.5 * sigma * ly**2
    else:
        yk = np.exp(k * ly)
        one_minus = -np.expm1(k * ly)
        d_sigma = one_minus / k
        d_k = -sigma * ly * yk / k - sigma * one_minus / k**2
    # d y / d h, written through q**h = exp(h lq) to keep small h accurate
    if h == 0.0:
        dy_dh = -0.5 * lq**2
    else:
        qh = np.exp(h * lq)
        dy_dh = -(qh * h * lq - np.expm1(h * lq)) / h**2
    d_h = -sigma * np.exp((k - 1.0) * ly) * dy_dh
    return np.array([1.0, d_sigma, d_k, d_h])


def return_level(p_exc: float, fit: FitResult, require_se: bool = True) -> ReturnLevel:
    """Return level and delta-method standard error for a fitted model."""
    level = return_level_value(p_exc, fit.params)
    if fit.cov is None:
        if require_se:
            raise MissingCovariance("fit has no covariance matrix; cannot form a standard error")
        return ReturnLevel(1.0 / p_exc, level, None, p_exc)
    grad = return_level_gradient(p_exc, fit.params)
    idx = [("mu", "sigma", "k", "h").index(n) for n in fit.free]
    g = grad[idx]
    var = float(g @ fit.cov @ g)
    return ReturnLevel(1.0 / p_exc, level, float(np.sqrt(max(var, 0.0))), p_exc)


def diagnostics(fit: FitResult, m: Optional[int] = None) -> ModelDiagnostics:
    """AIC, BIC (sample size = number of blocks), tr(V) and log|V|."""
    if fit.cov is None:
        raise MissingCovariance("fit has no covariance matrix")
    m = fit.m if m is None else m
    k = fit.n_params
    sign, logdet = np.linalg.slogdet(fit.cov)
    if sign <= 0:
        logdet = float("nan")
    return ModelDiagnostics(
        aic=2.0 * fit.nllh + 2.0 * k,
        bic=float(2.0 * fit.nllh + k * np.log(m)),
        trace_v=float(np.trace(fit.cov)),
        log_det_v=float(logdet),
    )


def qq_data(fit: FitResult, data: RLargestSample, s: int = 1) -> np.ndarray:
    """(empirical, fitted) quantile pairs for the s-th largest values.

    Plotting positions are ``(i - 0.5) / n``.  Returns an (n, 2) array.
    """
    if not 1 <= s <= fit.r_used:
        raise ValueError(f"s must lie in 1..{fit.r_used}")
    emp = np.sort(data.order_statistic(s))
    n = emp.size
    pp = (np.arange(1, n + 1) - 0.5) / n
    model_q = marginal_quantile(s, pp, fit.params, fit.model)
    return np.column_stack([emp, np.atleast_1d(model_q)])


def marginal_pdf_curve(params: Params4, s: int, model: ModelKind = ModelKind.RK4D,
                       n_points: int = 401, tail: float = 1e-4) -> np.ndarray:
    """(t, density) on ``n_points`` equally spaced points spanning the bulk of
    the s-th marginal (from its ``tail`` to ``1 - tail`` quantile)."""
    lo, hi = marginal_quantile(s, [tail, 1.0 - tail], params, model)
    t = np.linspace(lo, hi, n_points)
    return np.column_stack([t, marginal_pdf(s, t, params, model)])
