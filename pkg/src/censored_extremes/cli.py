"""Command-line front end.

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numeric or guard error. Numbers are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .censored_data import read_survival_csv, sort_with_concomitants, top_k_view, uncensored_fraction
from .ekm import ekm_integral, ekm_weights, named_function
from .errors import CensoredExtremesError, ConfigError, DataError, GuardError, KRangeError
from .estimators import ESTIMATOR_IDS, estimate
from .kaplan_meier import km_estimate
from .simulation import DEFAULT_SEED, PRESETS, ExperimentSpec, format_number, parse_k_grid, preset, run_experiment

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

LAWS = ("hill", "moment-pos", "moment-zero", "moment-neg", "ekm-cdf", "quadrature")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


fmt = format_number


# ---------------------------------------------------------------------------
# subcommands


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise DataError(f"cannot read input file {path!r}")
    return read_survival_csv(p)


def cmd_estimate(args) -> str:
    if args.estimator.replace("-", "_") not in ESTIMATOR_IDS:
        raise ConfigError(f"unknown estimator {args.estimator!r}; choose from {', '.join(ESTIMATOR_IDS)}")
    sample = _load(args.input)
    srt = sort_with_concomitants(sample)
    n = sample.n
    grid = parse_k_grid(args.k_grid) if args.k_grid else tuple(range(5, n // 2 + 1))
    if not grid:
        raise ConfigError("k grid is empty")
    bad = [k for k in grid if not 1 <= k <= n - 1]
    if bad:
        raise KRangeError(f"k = {bad[0]} outside [1, {n - 1}]")
    with_ci = args.ci is not None
    if with_ci and not 0 < args.ci < 1:
        raise ConfigError("--ci must lie in (0, 1)")
    cols = ["k", "threshold", "gamma_hat", "p_hat"]
    if with_ci:
        cols += ["var_hat", "ci_lo", "ci_hi"]
    cols.append("note")
    out = [",".join(cols)]
    for k in grid:
        view = top_k_view(srt, k)
        row = [str(k), fmt(view.threshold)]
        note = ""
        p_hat = uncensored_fraction(view)
        try:
            est = estimate(args.estimator, view, args.normalized, n)
        except CensoredExtremesError as exc:
            if exc.exit_code != EXIT_NUMERIC:
                raise
            row += ["", fmt(p_hat)] + ([""] * 3 if with_ci else [])
            out.append(",".join(row + [_note(exc)]))
            continue
        row += [fmt(est.gamma_hat), fmt(p_hat)]
        if with_ci:
            try:
                est = asy.with_confidence_interval(view, est, args.ci)
                lo, hi, _ = est.ci
                row += [fmt(est.variance_hat), fmt(lo), fmt(hi)]
            except GuardError as exc:
                row += ["", "", ""]
                note = _note(exc)
        out.append(",".join(row + [note]))
    return "\n".join(out) + "\n"


def _note(exc: Exception) -> str:
    guard = getattr(exc, "guard", "")
    text = f"guard {guard} failed" if guard else str(exc)
    return '"' + text.replace('"', "'") + '"' if "," in text else text


def cmd_simulate(args) -> str:
    if bool(args.spec) == bool(args.preset):
        raise ConfigError("give exactly one of --spec or --preset")
    if args.spec:
        try:
            text = Path(args.spec).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read spec {args.spec!r}: {exc}") from None
        spec = ExperimentSpec.from_json(text)
        changes = {}
        if args.seed is not None:
            changes["master_seed"] = args.seed
        if args.reps is not None:
            changes["reps"] = args.reps
        if changes:
            spec = ExperimentSpec(**{**spec.__dict__, **changes})
        return run_experiment(spec, workers=args.threads).to_csv()
    specs = preset(args.preset, desk_scale=args.desk_scale,
                   master_seed=args.seed if args.seed is not None else DEFAULT_SEED)
    parts = []
    for i, spec in enumerate(specs):
        if args.reps is not None:
            spec = ExperimentSpec(**{**spec.__dict__, "reps": args.reps})
        parts.append(run_experiment(spec, workers=args.threads).to_csv(scenario=spec.name, header=i == 0))
    return "".join(parts)


def cmd_km(args) -> str:
    cdf = km_estimate(sort_with_concomitants(_load(args.input)))
    lines = ["x,cdf"] + [f"{fmt(t)},{fmt(v)}" for t, v in zip(cdf.knots, cdf.values)]
    return "\n".join(lines) + "\n"


def cmd_ekm(args) -> str:
    sample = _load(args.input)
    view = top_k_view(sort_with_concomitants(sample), args.k)
    w = ekm_weights(view)
    if args.phi:
        val = ekm_integral(view, named_function(args.phi), weights=w)
        return f"phi,value,total_mass\n{args.phi},{fmt(val)},{fmt(w.total_mass)}\n"
    # ascending ratios, so cum_mass is the EKM step cdf at each ratio
    order = slice(None, None, -1)
    cum = np.cumsum(w.omega[order])
    lines = ["ratio,delta,omega,cum_mass"]
    for r, d, om, c in zip(view.ratios[order], view.delta_top[order], w.omega[order], cum):
        lines.append(f"{fmt(r)},{int(d)},{fmt(om)},{fmt(c)}")
    return "\n".join(lines) + "\n"


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ConfigError(f"--law {args.law} needs --{name.replace('_', '-')}")


def cmd_variance(args) -> str:
    so = asy.SecondOrderParams(
        rho=args.rho, lam=args.lam, lam_hat=args.lam_hat, lam_tilde=args.lam_tilde, rho_tilde=args.rho_tilde
    )
    law = args.law
    if law == "quadrature":
        _need(args, "gf", "gg")
        phi = args.phi or "log"
        quad = asy.limit_variance_quadrature(phi, args.gf, args.gg)
        closed = ""
        if phi.strip().lower() == "log":
            closed = fmt(asy.hill_asymptotics(args.gf, args.gg).variance)
        elif phi.strip().lower() == "log2":
            closed = fmt(asy.moment_pair_asymptotics(args.gf, args.gg)[1][1, 1])
        return f"phi,closed_form,quadrature\n{phi},{closed},{fmt(quad)}\n"
    if law == "hill":
        _need(args, "gf", "gg")
        res = asy.hill_asymptotics(args.gf, args.gg, so)
    elif law == "moment-pos":
        _need(args, "gf", "gg")
        res = asy.moment_pos(args.gf, args.gg, so)
    elif law == "moment-neg":
        _need(args, "gf", "gg")
        res = asy.moment_neg(args.gf, args.gg, so)
    elif law == "moment-zero":
        _need(args, "alpha_f")
        res = asy.moment_zero(args.alpha_f, so)
    else:
        _need(args, "x0", "gf", "gg")
        res = asy.ekm_cdf_asymptotics(args.x0, args.gf, args.gg, so)
    return f"bias,{fmt(res.bias)}\nvariance,{fmt(res.variance)}\n"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, default=1, help="worker processes for simulations")

    parser = _Parser(prog="censored-extremes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", parents=[common], help="extreme value index over a grid of k")
    p.add_argument("--input", required=True, help="CSV with time,status columns")
    p.add_argument("--estimator", default="moment_censored",
                   help=f"one of {', '.join(ESTIMATOR_IDS)} (dashes allowed)")
    p.add_argument("--k-grid", help="a:b[:step] or comma list (default 5:n/2)")
    p.add_argument("--normalized", action="store_true", help="divide EKM integrals by the EKM mass")
    p.add_argument("--ci", type=float, help="add plug-in confidence intervals at this level")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo experiment to CSV")
    p.add_argument("--spec", help="experiment spec as JSON")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--desk-scale", action=argparse.BooleanOptionalAction, default=True,
                   help="reduced reps and sizes for presets (default on)")
    p.add_argument("--reps", type=int, help="override the number of replications")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("km", parents=[common], help="product-limit cdf at its jump points")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("ekm", parents=[common], help="EKM weights or an EKM integral")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--phi", help="log, log2, one, indicator(x0), power(p), logpow(r)")
    p.set_defaults(func=cmd_ekm)

    p = sub.add_parser("variance", parents=[common], help="asymptotic bias and variance")
    p.add_argument("--law", required=True, choices=LAWS)
    p.add_argument("--gf", type=float, help="gamma_F")
    p.add_argument("--gg", type=float, help="gamma_G")
    p.add_argument("--alpha-f", type=float, help="non-censoring index (zero case)")
    p.add_argument("--x0", type=float, help="evaluation point for ekm-cdf")
    p.add_argument("--phi", help="test function for quadrature (default log)")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--lam-hat", type=float, default=0.0)
    p.add_argument("--lam-tilde", type=float, default=0.0)
    p.add_argument("--rho-tilde", type=float, default=0.0)
    p.set_defaults(func=cmd_variance)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        text = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CensoredExtremesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: cannot write {args.out!r}: {exc}", file=sys.stderr)
            return EXIT_DATA
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return EXIT_OK


def run(argv: list[str]) -> tuple[int, str, str]:
    """Invoke ``main`` in-process and capture (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:  # --help
            code = int(exc.code or 0)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
