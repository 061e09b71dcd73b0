"""Maximum-likelihood fitting of the r-largest models.

The negative log-likelihood is minimized with a Nelder-Mead simplex under
penalty constraints, the same strategy as ``ismev::rlarg.fit`` (which calls
R's ``optim``).  Standard errors come from the inverse of a central-difference
Hessian of the negative log-likelihood at the optimum.

Blocks holding fewer than ``r`` values contribute their own shorter joint
density, so ragged data (Venice 1935 has six values) need no padding.
"""
from __future__ import annotations

import json
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from math import pi, sqrt
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .core_dist import Params4, _log_cdf
from .errors import InfeasibleStart, NonConvergenceWarning, SingularHessian
from .rlargest import ModelKind

__all__ = [
    "RLargestSample",
    "FitOptions",
    "FitResult",
    "PENALTY",
    "NegLogLik",
    "nllh",
    "initial_params",
    "hessian",
    "hessian_cov",
    "fit",
    "fit_sweep",
]

logger = logging.getLogger(__name__)

#: Base value returned by :func:`nllh` for infeasible parameters.
PENALTY = 1e10
_EULER = 0.57722


@dataclass(frozen=True)
class RLargestSample:
    """Per-block r-largest values, each block sorted in nonincreasing order.

    Blocks may have different lengths.  ``block_labels`` (e.g. years) are
    carried along for reporting only.
    """

    blocks: tuple
    block_labels: Optional[tuple] = None

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float).ravel() for b in self.blocks)
        if not blocks:
            raise ValueError("an r-largest sample needs at least one block")
        for i, b in enumerate(blocks):
            if b.size == 0:
                raise ValueError(f"block {i} is empty")
            if not np.all(np.isfinite(b)):
                raise ValueError(f"block {i} holds non-finite values")
            if np.any(np.diff(b) > 0):
                raise ValueError(f"block {i} is not nonincreasing")
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        if self.block_labels is not None:
            labels = tuple(self.block_labels)
            if len(labels) != len(blocks):
                raise ValueError("block_labels and blocks differ in length")
            object.__setattr__(self, "block_labels", labels)

    @classmethod
    def from_array(cls, values, labels=None) -> "RLargestSample":
        """Build from a 2-D array; trailing NaNs mark ragged blocks."""
        arr = np.atleast_2d(np.asarray(values, dtype=float))
        blocks = []
        for row in arr:
            keep = ~np.isnan(row)
            n = int(np.argmin(keep)) if not keep.all() else row.size
            if keep[n:].any():
                raise ValueError("NaN may only appear at the end of a row")
            blocks.append(row[:n])
        return cls(tuple(blocks), labels)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def r_max(self) -> int:
        return max(b.size for b in self.blocks)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b.size for b in self.blocks])

    @property
    def maxima(self) -> np.ndarray:
        return np.array([b[0] for b in self.blocks])

    def order_statistic(self, s: int) -> np.ndarray:
        """The s-th largest value of every block that has one."""
        return np.array([b[s - 1] for b in self.blocks if b.size >= s])

    def truncate(self, r: int) -> "RLargestSample":
        return RLargestSample(tuple(b[:r] for b in self.blocks), self.block_labels)

    def to_array(self) -> np.ndarray:
        out = np.full((self.m, self.r_max), np.nan)
        for i, b in enumerate(self.blocks):
            out[i, : b.size] = b
        return out


@dataclass
class FitOptions:
    """Optimizer settings.  Every field has a usable default.

    ``rel_tol``: stop when the simplex's nllh spread is below
    ``rel_tol * max(1, |nllh|)`` and its vertices lie within ``x_tol``.
    ``starts``: extra starting points in (mu, sigma, k, h) order, tried in
    addition to :func:`initial_params`; pinned entries are ignored.
    ``h_starts``: extra starting values of ``h`` for models where it is free.
    """

    rel_tol: float = 1e-8
    x_tol: float = 1e-6
    max_iter: int = 5000
    restarts: int = 1
    starts: tuple = ()
    h_starts: tuple = (-0.5, -1.0)
    compute_cov: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "FitOptions":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown fit options: {sorted(unknown)}")
        data = dict(data)
        for key in ("starts", "h_starts"):
            if key in data:
                data[key] = tuple(tuple(s) if isinstance(s, (list, tuple)) else s
                                  for s in data[key])
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "FitOptions":
        """Read options from a JSON object (optionally nested under ``"fit"``)."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data.get("fit", data))


@dataclass
class FitResult:
    model: ModelKind
    r_used: int
    params: Params4
    nllh: float
    cov: Optional[np.ndarray]
    se: Optional[np.ndarray]
    converged: bool
    n_evals: int
    m: int
    trace: list = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def free(self) -> tuple:
        return self.model.free

    @property
    def n_params(self) -> int:
        return self.model.n_params

    @property
    def theta(self) -> np.ndarray:
        return self.model.reduce(self.params)

    def se_dict(self) -> dict:
        if self.se is None:
            return {n: None for n in self.free}
        return dict(zip(self.free, map(float, self.se)))

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "r": self.r_used,
            "m": self.m,
            "nllh": self.nllh,
            "params": asdict(self.params),
            "free": list(self.free),
            "se": self.se_dict(),
            "cov": None if self.cov is None else self.cov.tolist(),
            "converged": self.converged,
            "n_evals": self.n_evals,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        model = ModelKind.parse(d["model"])
        cov = None if d.get("cov") is None else np.asarray(d["cov"], dtype=float)
        se = None
        if cov is not None:
            se = np.sqrt(np.diag(cov))
        return cls(model, int(d["r"]), Params4(**d["params"]), float(d["nllh"]), cov, se,
                   bool(d.get("converged", True)), int(d.get("n_evals", 0)), int(d.get("m", 0)))


class NegLogLik:
    """Penalized negative log-likelihood over a model's free parameters.

    Infeasible points (sigma <= 0, h >= 1/(r-1), w(x) <= 0 for some retained
    value, or 1 - h tau(x(r)) <= 0 for some block) return ``PENALTY`` plus the
    size of the violation, so the value is finite for every real input.
    """

    def __init__(self, data: RLargestSample, r: int, model: ModelKind):
        self.model = ModelKind.parse(model)
        self.r = int(r)
        if self.r < 1:
            raise ValueError("r must be >= 1")
        lengths = np.minimum(data.lengths, self.r)
        self.groups = []
        for ri in np.unique(lengths):
            rows = np.array([b[:ri] for b, n in zip(data.blocks, lengths) if n == ri])
            self.groups.append((int(ri), rows))
        self.r_eff = int(lengths.max())
        self.n_evals = 0

    def full(self, theta) -> np.ndarray:
        return self.model.expand(np.asarray(theta, dtype=float))

    def __call__(self, theta) -> float:
        self.n_evals += 1
        return self.evaluate(self.full(theta))

    def evaluate(self, full) -> float:
        mu, sigma, k, h = (float(v) for v in full)
        if not np.all(np.isfinite(full)):
            return 2 * PENALTY
        viol = 0.0
        if sigma <= 0:
            return PENALTY + min(1.0 - sigma, 1e9)
        if self.r_eff >= 2 and h >= 1.0 / (self.r_eff - 1):
            viol += h - 1.0 / (self.r_eff - 1) + 1e-3
        total = 0.0
        with np.errstate(all="ignore"):
            for ri, rows in self.groups:
                if k != 0.0:
                    z = -k * (rows - mu) / sigma
                    bad = z <= -1.0
                    if bad.any():
                        viol += float(np.sum(1e-3 - (1.0 + z[bad])))
                        continue
                    lw = np.log1p(z)
                    lt = lw / k
                else:
                    lw = np.zeros_like(rows)
                    lt = -(rows - mu) / sigma
                lt_r = lt[:, -1]
                if h > 0:
                    over = lt_r + np.log(h)
                    if np.any(over >= 0):
                        viol += float(np.sum(over[over >= 0]) + 1e-3)
                        continue
                if viol:
                    continue
                log_c = np.sum(np.log(1.0 - h * np.arange(1, ri)))
                total += (
                    rows.shape[0] * (ri * np.log(sigma) - log_c)
                    - np.sum(lt - lw)
                    - (1.0 - ri * h) * np.sum(_log_cdf(lt_r, h))
                )
        if viol > 0:
            return PENALTY + min(viol, 1e9)
        if not np.isfinite(total):
            return 2 * PENALTY
        return float(total)


def nllh(params, data: RLargestSample, r: int, model: ModelKind = ModelKind.RK4D) -> float:
    """Penalized negative log-likelihood at ``params`` (Params4 or 4-sequence).

    Parameters pinned by ``model`` are imposed before evaluation.
    """
    model = ModelKind.parse(model)
    full = np.asarray(tuple(params), dtype=float)
    if full.shape != (4,):
        raise ValueError("params must have 4 entries (mu, sigma, k, h)")
    for name, value in model.fixed.items():
        full["mu sigma k h".split().index(name)] = value
    return NegLogLik(data, r, model).evaluate(full)


def initial_params(data: RLargestSample, r: int, model: ModelKind = ModelKind.RK4D) -> Params4:
    """Gumbel moment start on the block maxima, repaired to feasibility."""
    model = ModelKind.parse(model)
    maxima = data.maxima
    var = np.var(maxima, ddof=1) if maxima.size > 1 else 0.0
    if not var > 0:
        raise InfeasibleStart("block maxima have zero variance; no moment start")
    sigma0 = sqrt(6.0 * var) / pi
    mu0 = float(np.mean(maxima)) - _EULER * sigma0
    k0, h0 = 0.1, -0.1
    obj = NegLogLik(data, r, model)
    for _ in range(51):
        p = model.freeze(Params4(mu0, sigma0, k0, h0))
        if obj.evaluate(p.as_array()) < PENALTY:
            return p
        k0 *= 0.5
        h0 *= 0.5
    raise InfeasibleStart("no feasible start after 50 halvings of the shape parameters")


def _nelder_mead(obj, x0, scale, opts: FitOptions, trace: list):
    x0 = np.asarray(x0, dtype=float)
    simplex = np.vstack([x0, x0 + np.diag(scale)])
    f0 = obj(x0)
    fatol = opts.rel_tol * max(1.0, abs(f0))

    def record(intermediate_result):
        trace.append(float(intermediate_result.fun))

    res = minimize(
        obj,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={
            "initial_simplex": simplex,
            "maxiter": opts.max_iter,
            "maxfev": 10 * opts.max_iter,
            "xatol": opts.x_tol,
            "fatol": fatol,
            "adaptive": False,
        },
    )
    return res


def _start_points(data, r, model, opts):
    base = initial_params(data, r, model)
    starts = [model.reduce(base)]
    if "h" in model.free:
        for h0 in opts.h_starts:
            starts.append(model.reduce(base.replace(h=float(h0))))
    for s in opts.starts:
        mu, sigma, k, h = (float(v) for v in s)
        starts.append(model.reduce(model.freeze(Params4(mu, sigma, k, h))))
    return base, starts


def hessian(func, theta, steps=None, max_halvings: int = 10) -> np.ndarray:
    """Central-difference Hessian of ``func`` at ``theta``.

    Step j defaults to ``max(1e-5, 1e-4 |theta_j|)`` and is halved while a
    stencil point lands on a penalized (infeasible) value.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    if steps is None:
        steps = np.maximum(1e-5, 1e-4 * np.abs(theta))
    steps = np.array(steps, dtype=float)
    f0 = func(theta)
    for _ in range(max_halvings + 1):
        H = np.empty((n, n))
        clean = True
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = steps[i]
            fp, fm = func(theta + ei), func(theta - ei)
            clean &= max(fp, fm) < PENALTY
            H[i, i] = (fp - 2 * f0 + fm) / steps[i] ** 2
            for j in range(i):
                ej = np.zeros(n)
                ej[j] = steps[j]
                vals = [func(theta + ei + ej), func(theta + ei - ej),
                        func(theta - ei + ej), func(theta - ei - ej)]
                clean &= max(vals) < PENALTY
                H[i, j] = H[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * steps[i] * steps[j])
        if clean:
            return 0.5 * (H + H.T)
        steps = steps / 2
    raise SingularHessian("Hessian stencil keeps hitting the constraint boundary")


def _invert_spd(H: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(H)):
        raise SingularHessian("Hessian has non-finite entries")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(H, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise SingularHessian(str(exc)) from exc
    if np.any(np.abs(np.diag(lu)) < 1e-300):
        raise SingularHessian("Hessian is singular")
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            cov = scipy.linalg.lu_solve((lu, piv), np.eye(H.shape[0]))
        except scipy.linalg.LinAlgWarning as exc:
            raise SingularHessian(str(exc)) from exc
    cov = 0.5 * (cov + cov.T)
    if np.any(np.linalg.eigvalsh(cov) <= 0):
        raise SingularHessian("observed information is not positive definite")
    return cov


def hessian_cov(params, data: RLargestSample, r: int, model: ModelKind = ModelKind.RK4D) -> np.ndarray:
    """Inverse observed information over the model's free parameters."""
    model = ModelKind.parse(model)
    obj = NegLogLik(data, r, model)
    p = params if isinstance(params, Params4) else Params4(*params)
    theta = model.reduce(model.freeze(p))
    return _invert_spd(hessian(obj, theta))


def fit(data: RLargestSample, r: int, model: ModelKind = ModelKind.RK4D,
        opts: Optional[FitOptions] = None) -> FitResult:
    """Fit ``model`` to the top ``r`` values of every block.

    Runs the simplex from every start, keeps the best, and restarts it
    ``opts.restarts`` times from the incumbent.  A run that stops on
    ``max_iter`` yields ``converged=False`` with the best point found.  If the
    Hessian is singular or indefinite, ``cov`` and ``se`` are None.
    """
    model = ModelKind.parse(model)
    opts = opts or FitOptions()
    if data.m < 2:
        raise ValueError("at least 2 blocks required for fitting")
    if r > data.r_max:
        raise ValueError(f"r={r} exceeds the largest block size {data.r_max}")
    obj = NegLogLik(data, r, model)
    base, starts = _start_points(data, r, model, opts)
    scale_map = {"mu": 0.25 * base.sigma, "sigma": 0.25 * base.sigma, "k": 0.1, "h": 0.2}
    scale = np.array([scale_map[n] for n in model.free])

    best = None
    trace: list = []
    for x0 in starts:
        if obj(x0) >= PENALTY:
            continue
        run_trace: list = []
        res = _nelder_mead(obj, x0, scale, opts, run_trace)
        if best is None or res.fun < best.fun:
            best, trace = res, run_trace
    if best is None:
        raise InfeasibleStart("every starting point is infeasible")
    converged = bool(best.status == 0)
    for _ in range(opts.restarts):
        res = _nelder_mead(obj, best.x, scale * 0.1, opts, trace)
        converged = bool(res.status == 0)
        if res.fun <= best.fun:
            best = res
    if not converged:
        warnings.warn(f"{model.value} r={r}: simplex hit the iteration cap",
                      NonConvergenceWarning, stacklevel=2)
    full = obj.full(best.x)
    params = Params4(*full)
    cov = se = None
    message = best.message
    if opts.compute_cov:
        try:
            cov = _invert_spd(hessian(obj, best.x))
            se = np.sqrt(np.diag(cov))
        except SingularHessian as exc:
            message = f"{message}; covariance unavailable: {exc}"
            logger.warning("%s r=%d: %s", model.value, r, exc)
    return FitResult(model, int(r), params, float(best.fun), cov, se, converged,
                     obj.n_evals, data.m, trace, message)


def fit_sweep(data: RLargestSample, rs: Sequence[int], model: ModelKind = ModelKind.RK4D,
              opts: Optional[FitOptions] = None, threads: Optional[int] = None) -> list:
    """Fit for each r in ``rs``; results come back ordered as ``rs``.

    ``threads`` defaults to the ``RKAPPA_THREADS`` environment variable, or 1.
    """
    if threads is None:
        threads = int(os.environ.get("RKAPPA_THREADS", "1") or 1)
    threads = max(1, min(int(threads), len(rs)))
    if threads == 1:
        return [fit(data, r, model, opts) for r in rs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: fit(data, r, model, opts), rs))
