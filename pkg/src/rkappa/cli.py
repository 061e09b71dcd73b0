"""Command-line front end: ``rkappa {fit,sample,qqplot,return-level}``.

Exit codes: 0 success, 2 bad input or flags, 3 results written but flagged
(simplex hit its iteration cap, or no covariance for a standard error).

A JSON config file (``--config``) supplies defaults for any flag, plus an
optional ``"fit"`` object of optimizer settings; flags on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Optional

import numpy as np

from . import data_io
from .core_dist import Params4
from .errors import MissingCovariance, RKappaError
from .inference import FitOptions, FitResult, fit_sweep
from .returns import diagnostics, marginal_pdf_curve, qq_data, return_level
from .rlargest import ModelKind
from .sampling import sample_rk4d, sample_rk4d_rejection

__all__ = ["main", "build_parser", "parse_r", "dumps_json", "EXIT_OK", "EXIT_USAGE", "EXIT_FLAGGED"]

EXIT_OK, EXIT_USAGE, EXIT_FLAGGED = 0, 2, 3
JSON_DIGITS, TABLE_DIGITS = 17, 6


class UsageError(Exception):
    """Bad flags or inputs; maps to exit code 2."""


def dumps_json(obj, indent: int = 2) -> str:
    """JSON with every float at 17 significant digits; NaN and inf become null."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, (bool, np.bool_)) or o is None:
            return json.dumps(None if o is None else bool(o))
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return format(float(o), f".{JSON_DIGITS}g") if math.isfinite(o) else "null"
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = (f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items())
            return "{\n" + ",\n".join(items) + f"\n{end}}}"
        if isinstance(o, (list, tuple, np.ndarray)):
            if len(o) == 0:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + f"\n{end}]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "-"
    return format(float(x), f".{TABLE_DIGITS}g")


def parse_r(text) -> list:
    """``"3"`` -> [3]; ``"1..10"`` -> [1, ..., 10]; ``"1,3,5"`` -> [1, 3, 5]."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split(".."))
            rs = list(range(lo, hi + 1))
        else:
            rs = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot read r from {text!r}; use N, A..B or a comma list") from None
    if not rs or min(rs) < 1:
        raise UsageError(f"r must be a nonempty set of positive integers, got {text!r}")
    return rs


def _floats(text, name) -> list:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _params(text) -> Params4:
    vals = _floats(text, "params")
    if len(vals) not in (3, 4):
        raise UsageError("--params takes mu,sigma,k[,h]")
    return Params4(*vals)


def _write(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------- fit


def _fit_options(args) -> FitOptions:
    return FitOptions.from_dict(args.fit_options or {})


def _fits(args) -> list:
    """Fits from ``--fit FILE`` or by fitting ``--data`` for every requested r."""
    if getattr(args, "fit", None):
        rows = json.loads(Path(args.fit).read_text(encoding="utf-8"))
        rows = rows if isinstance(rows, list) else [rows]
        fits = [FitResult.from_dict(row) for row in rows]
        if args.r is not None:
            wanted = set(parse_r(args.r))
            fits = [f for f in fits if f.r_used in wanted]
        if not fits:
            raise UsageError("no fit in the fit file matches --r")
        return fits
    if not args.data:
        raise UsageError("give --data (to fit) or --fit (a saved fit)")
    data = data_io.load(args.data)
    rs = parse_r(args.r or "1")
    if max(rs) > data.r_max:
        raise UsageError(f"r={max(rs)} exceeds the largest block size {data.r_max} in {args.data}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit_sweep(data, rs, ModelKind.parse(args.model), _fit_options(args), args.threads)


def cmd_fit(args) -> int:
    fits = _fits(args)
    rows, flagged = [], False
    for f in fits:
        row = f.to_dict()
        try:
            rl = return_level(1.0 / 20.0, f)
            d = diagnostics(f)
            row["r20"] = {"level": rl.level, "se": rl.se}
            row.update(d.to_dict())
        except MissingCovariance:
            rl = return_level(1.0 / 20.0, f, require_se=False)
            row["r20"] = {"level": rl.level, "se": None}
            row.update(aic=2 * f.nllh + 2 * f.n_params,
                       bic=2 * f.nllh + f.n_params * math.log(f.m), trV=None, logdetV=None)
            flagged = True
        flagged |= not f.converged
        rows.append(row)
    if args.format == "table":
        lines = [f"{'r':>3} {'nllh':>10} {'mu':>10} {'sigma':>10} {'k':>10} {'h':>10} "
                 f"{'r20':>10} {'se':>10} {'AIC':>10} {'BIC':>10}"]
        for row in rows:
            p = row["params"]
            lines.append(" ".join([f"{row['r']:>3}"] + [f"{_fmt(v):>10}" for v in (
                row["nllh"], p["mu"], p["sigma"], p["k"], p["h"], row["r20"]["level"],
                row["r20"]["se"], row["aic"], row["bic"])]))
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(dumps_json(rows), args.out)
    return EXIT_FLAGGED if flagged else EXIT_OK


# ---------------------------------------------------------------- sample


def cmd_sample(args) -> int:
    if args.params and args.fit:
        raise UsageError("give either --params or --fit, not both")
    if args.params:
        params = _params(args.params)
    elif args.fit:
        params = _fits(argparse.Namespace(fit=args.fit, r=None, data=None))[0].params
    else:
        raise UsageError("sample needs --params or --fit")
    if args.n < 0 or args.r < 1:
        raise UsageError("need --n >= 0 and --r >= 1")
    draw = sample_rk4d if args.method == "exact" else sample_rk4d_rejection
    x = draw(args.n, args.r, params, seed=args.seed)
    lines = [",".join(f"x{j}" for j in range(1, args.r + 1))]
    lines += [",".join(format(v, f".{JSON_DIGITS}g") for v in row) for row in x]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- qqplot


def cmd_qqplot(args) -> int:
    if not args.data:
        raise UsageError("qqplot needs --data for the empirical quantiles")
    data = data_io.load(args.data)
    if args.params:
        if args.fit:
            raise UsageError("give either --params or --fit, not both")
        model = ModelKind.parse(args.model)
        r = parse_r(args.r or "1")[-1]
        params = model.freeze(_params(args.params))
        fits = [FitResult(model, r, params, float("nan"), None, None, True, 0, data.m)]
    else:
        fits = _fits(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for f in fits:
        s_values = parse_r(args.s) if args.s else list(range(1, f.r_used + 1))
        if max(s_values) > f.r_used:
            raise UsageError(f"s={max(s_values)} exceeds r={f.r_used}")
        tag = f"{f.model.value}_r{f.r_used}"
        for s in s_values:
            qq = qq_data(f, data, s)
            n = qq.shape[0]
            pp = (np.arange(1, n + 1) - 0.5) / n
            qq_path = out_dir / f"qq_{tag}_s{s}.csv"
            rows = ["i,p,empirical,fitted,diagonal"]
            rows += [f"{i + 1},{pp[i]:.17g},{qq[i, 0]:.17g},{qq[i, 1]:.17g},{qq[i, 0]:.17g}"
                     for i in range(n)]
            qq_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
            curve = marginal_pdf_curve(f.params, s, f.model, n_points=args.points)
            pdf_path = out_dir / f"pdf_{tag}_s{s}.csv"
            rows = ["t,density"] + [f"{t:.17g},{d:.17g}" for t, d in curve]
            pdf_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
            written.append({"model": f.model.value, "r": f.r_used, "s": s, "n_pairs": n,
                            "qq": str(qq_path), "pdf": str(pdf_path), "n_points": args.points})
    _write(dumps_json(written), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- return-level


def cmd_return_level(args) -> int:
    if args.T is not None and args.p is not None:
        raise UsageError("give either --T or --p, not both")
    if args.p is not None:
        probs = _floats(args.p, "p")
    else:
        periods = _floats(args.T if args.T is not None else "20", "T")
        if any(t <= 1 for t in periods):
            raise UsageError("return periods must exceed 1")
        probs = [1.0 / t for t in periods]
    if any(not 0 < p < 1 for p in probs):
        raise UsageError("exceedance probabilities must lie in (0, 1)")
    rows, flagged = [], False
    for f in _fits(args):
        for p in probs:
            rl = return_level(p, f, require_se=False)
            flagged |= rl.se is None or not f.converged
            rows.append({"model": f.model.value, "r": f.r_used, "T": rl.period, "p": p,
                         "level": rl.level, "se": rl.se, "converged": f.converged})
    if args.format == "table":
        lines = [f"{'model':>6} {'r':>3} {'T':>10} {'level':>10} {'se':>10}"]
        lines += [f"{row['model']:>6} {row['r']:>3} {_fmt(row['T']):>10} "
                  f"{_fmt(row['level']):>10} {_fmt(row['se']):>10}" for row in rows]
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(dumps_json(rows), args.out)
    return EXIT_FLAGGED if flagged else EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rkappa", description="r-largest kappa models: fit, sample, diagnose.")
    parser.add_argument("--config", help="JSON file of default flag values (flags win)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, formats=True):
        p.add_argument("--data", help="dataset CSV (block,x1..xR)")
        p.add_argument("--fit", help="fit JSON written by 'rkappa fit'")
        p.add_argument("--model", default="rk4d", choices=[m.value for m in ModelKind])
        p.add_argument("--r", default=None, help="N, A..B or comma list (default 1)")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel fits (default $RKAPPA_THREADS or 1)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if formats:
            p.add_argument("--format", default="json", choices=["json", "table"])

    p = sub.add_parser("fit", help="maximum-likelihood fit for one or more r")
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw r-largest vectors as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--params", help="mu,sigma,k[,h]")
    p.add_argument("--fit", help="fit JSON; the first fit's parameters are used")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--method", default="exact", choices=["exact", "rejection"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("qqplot", help="QQ pairs and marginal density curves as CSV")
    common(p, formats=False)
    p.add_argument("--params", help="plot a given mu,sigma,k[,h] instead of a fit")
    p.add_argument("--s", default=None, help="order statistics to plot (default 1..r)")
    p.add_argument("--points", type=int, default=401, help="density grid size")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_qqplot)

    p = sub.add_parser("return-level", help="return levels with delta-method errors")
    common(p)
    p.add_argument("--T", default=None, help="return periods, comma-separated (default 20)")
    p.add_argument("--p", default=None, help="exceedance probabilities, comma-separated")
    p.set_defaults(func=cmd_return_level)
    return parser


def _apply_config(parser, argv) -> argparse.Namespace:
    config = {}
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument("--config")
    pre, _ = pre_parser.parse_known_args(argv)
    if pre.config:
        try:
            config = json.loads(Path(pre.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {pre.config}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
    fit_options = config.pop("fit", None) if isinstance(config.get("fit"), dict) else None
    args = parser.parse_args(argv)
    if config:
        # re-parse with config values as defaults of the chosen subcommand
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(config) - known
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
        for action in sub._actions:
            if action.dest in config:
                action.required = False
        args = parser.parse_args(argv)
    args.fit_options = fit_options
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except (UsageError, RKappaError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"rkappa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
