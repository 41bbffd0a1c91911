"""Command-line entry point: ``twospinon <command> [options]``.

Commands write a table (CSV or JSON) to ``--output`` or, by default, to
``$TWOSPINON_OUTPUT_DIR/<command>.<fmt>``.  A JSON config file passed with
``--config`` supplies defaults for the chosen command; flags given on the
command line win over it.

Exit codes: 0 success, 1 computation failure, 2 usage or invalid parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dcf import NORMALIZATION_NOTE, GridSpec, evaluate_grid, fixed_k_weight, s2_pm, zone_weight
from .errors import DomainError, TwoSpinonError
from .formfactor import QuadratureSpec
from .kinematics import KinematicPoint, band_boundaries, spinon_energy, spinon_momentum
from .output import FORMATS, Table, atomic_write, resolve_output

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
# ED lines at or below this weight are numerical zeros (selection-rule forbidden)
LINE_FLOOR = 1e-12

_REAL = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?P<coef>\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(?P<den>\d*\.?\d+(?:[eE][+-]?\d+)?))?\s*$"
)


def parse_real(text) -> float:
    """Float, or a multiple of pi such as ``pi``, ``2pi``, ``-pi/2``, ``3*pi/4``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(text)
    except ValueError:
        pass
    m = _REAL.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"not a real number or multiple of pi: {text!r}")
    coef = float(m["coef"]) if m["coef"] else 1.0
    den = float(m["den"]) if m["den"] else 1.0
    value = coef * math.pi / den
    return -value if m["sign"] == "-" else value


def _real_list(text):
    if isinstance(text, (list, tuple)):
        return [parse_real(t) for t in text]
    return [parse_real(t) for t in str(text).split(",") if t.strip()]


def _positive(text):
    v = parse_real(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _count(text):
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text!r}")
    return v


@dataclass
class RunConfig:
    """Fully resolved parameters of one command, as written into output metadata."""

    command: str
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        return cls(data["command"], dict(data.get("params", {})))


class UsageError(Exception):
    pass


# --- commands ------------------------------------------------------------------


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=args.rel_tol, abs_tol=args.abs_tol, split_point=args.split_point)


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {"tool": "twospinon", "version": __version__, "config": json.loads(cfg.to_json())}
    meta.update(extra)
    return meta


def cmd_dispersion(args, cfg):
    from .xxz_dispersion import SpectralParam, solve_nome, tau, xxz_energy, xxz_momentum

    xs = np.linspace(args.start, args.stop, args.num)
    if args.model == "xxx":
        rows = [[float(b), float(spinon_energy(b)), float(spinon_momentum(b))] for b in xs]
        return Table(["beta", "e", "p"], rows, _metadata(cfg, units="e(beta) = pi / cosh(beta)")), []
    if args.q is None:
        raise UsageError("--q is required for the xxz model")
    aniso = solve_nome(args.q)
    rows = []
    for a in xs:
        t = tau(SpectralParam(float(a)), aniso)
        rows.append([float(a), xxz_energy(a, aniso), xxz_momentum(a, aniso), abs(abs(t) - 1.0)])
    meta = _metadata(
        cfg,
        anisotropy={"q": aniso.q, "delta": aniso.delta, "m": aniso.m, "K": aniso.K, "K_prime": aniso.K_prime},
        phase_convention="tau = -exp(-i p(alpha))",
    )
    return Table(["alpha", "e", "p", "abs_tau_minus_1"], rows, meta), []


def cmd_dcf_point(args, cfg):
    v = s2_pm(KinematicPoint(args.w, args.k), _spec(args))
    fields = [f"w={args.w!r}", f"k={args.k!r}", f"s_pm={v.s_pm!r}", f"s_xx={v.s_xx!r}", f"in_band={str(v.in_band).lower()}"]
    if v.in_band:
        fields += [f"beta1={v.beta1!r}", f"beta2={v.beta2!r}"]
    print(" ".join(fields))
    return None, []


def cmd_dcf_grid(args, cfg):
    grid = GridSpec(args.k_min, args.k_max, args.n_k, args.w_min, args.w_max, args.n_w)
    spec = _spec(args)
    res = evaluate_grid(grid, spec, workers=args.workers)
    meta = _metadata(
        cfg,
        grid=grid.as_dict(),
        quadrature=spec.as_dict(),
        normalization=NORMALIZATION_NOTE,
        edge_convention="S = 0 at w = w_l and w = w_u exactly",
        failures=[list(f) for f in res.failures],
    )
    return Table(["k", "w", "s_pm", "s_xx"], [list(r) for r in res.rows], meta), res.failures


def cmd_sumrule(args, cfg):
    spec = _spec(args)
    rows, failures = [], []
    for k in args.k:
        try:
            r = fixed_k_weight(k, spec, rel_tol=args.weight_rel_tol)
            rows.append([k, r.fixed_k_weight, r.abs_error])
        except TwoSpinonError as exc:
            failures.append((k, str(exc)))
            rows.append([k, math.nan, math.nan])
    extra = {}
    if args.zone:
        total, err = zone_weight(spec, n_nodes=args.zone_nodes, rel_tol=args.weight_rel_tol)
        extra["zone_weight"] = {"value": total, "abs_error_estimate": err, "n_nodes": args.zone_nodes}
    meta = _metadata(
        cfg,
        quadrature=spec.as_dict(),
        weight_rel_tol=args.weight_rel_tol,
        substitution="w = w_l + (w_u - w_l) sin^2(theta)",
        normalization=NORMALIZATION_NOTE,
        failures=[list(f) for f in failures],
        **extra,
    )
    return Table(["k", "fixed_k_weight", "abs_error"], rows, meta), failures


def cmd_ed(args, cfg):
    from .ed_oracle import ChainSpec, EDOracle, band_k, band_support_report, compare_weights

    spec = ChainSpec(args.n_sites)
    report = band_support_report(spec)
    oracle = EDOracle(spec)
    omegas = np.linspace(0.0, args.omega_max, args.n_omega)
    lines, curve = [], []
    n = spec.n_sites
    # order rows by band momentum so they overlay the analytic grid
    order = sorted(range(n), key=lambda j: band_k(spec.momentum(j), report.convention))
    for j in order:
        res = oracle.lehmann(j, "pm")
        kb = band_k(res.k, report.convention)
        for ln in res.lines:
            if ln.weight <= LINE_FLOOR:
                continue
            lines.append([kb, ln.omega, ln.weight, 4.0 * ln.weight])
        s = 2.0 * math.pi * res.broadened(omegas, args.eta)
        curve.extend([kb, float(w), float(v), 4.0 * float(v)] for w, v in zip(omegas, s))
    comparisons = compare_weights(report)
    summary = {
        "n_sites": n,
        "ground_energy": report.ground_energy,
        "ground_energy_per_site": report.ground_energy / n,
        "momentum_convention": report.convention,
        "convention_scores": report.convention_scores,
        "window_tolerance": report.tolerance,
        "in_band_fraction": report.in_band_fraction,
        "per_k": [
            {
                "k": r.k_band,
                "total_weight": r.total_weight,
                "in_band_weight": r.in_band_weight,
                "lowest_omega": r.lowest_omega,
                "w_l": band_boundaries(r.k_band).w_l,
                "w_u": band_boundaries(r.k_band).w_u,
            }
            for r in report.rows
        ],
        "analytic_ratio": [
            {"k": c.k_band, "ed_in_band": c.ed_in_band, "analytic": c.analytic, "ratio": c.ratio}
            for c in comparisons
        ],
    }
    meta = _metadata(
        cfg,
        broadening_eta=args.eta,
        line_units="s_pm column holds |<f|sigma^-_k|0>|^2 per line",
        curve_units="s_pm column holds 2 pi times unit-area Lorentzian sum",
        report=summary,
    )
    lines_table = Table(["k", "w", "s_pm", "s_xx"], lines, meta)
    curve_table = Table(["k", "w", "s_pm", "s_xx"], curve, meta)
    return {"lines": lines_table, "curve": curve_table}, []


def cmd_limit_check(args, cfg):
    from .xxz_dispersion import isotropic_limit_check

    rep = isotropic_limit_check(args.eps, betas=args.beta)
    rows = [[r.epsilon, r.beta, r.alpha, r.e_xxz, r.e_xxx, r.p_xxz, r.p_xxx] for r in rep.rows]
    meta = _metadata(
        cfg,
        energy_scale=rep.energy_scale,
        energy_scale_error=rep.energy_scale_error,
        orders={str(b): o for b, o in rep.orders.items()},
        monotone={str(b): m for b, m in rep.monotone.items()},
        substitution="q = -exp(-eps), alpha = -eps beta / pi",
    )
    return Table(["epsilon", "beta", "alpha", "e_xxz", "e_xxx", "p_xxz", "p_xxx"], rows, meta), []


COMMANDS = {
    "dispersion": cmd_dispersion,
    "dcf-point": cmd_dcf_point,
    "dcf-grid": cmd_dcf_grid,
    "sumrule": cmd_sumrule,
    "ed": cmd_ed,
    "limit-check": cmd_limit_check,
}


# --- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_quadrature(p):
    p.add_argument("--rel-tol", type=_positive, default=1e-10, help="form-factor relative tolerance")
    p.add_argument("--abs-tol", type=_positive, default=1e-14, help="form-factor absolute tolerance")
    p.add_argument("--split-point", type=_positive, default=30.0, help="quadrature/closed-form tail split")


def _add_output(p, name):
    p.add_argument("--output", "-o", help=f"output file (default: $TWOSPINON_OUTPUT_DIR/{name}.<format>)")
    p.add_argument("--format", choices=FORMATS, default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twospinon", description="Two-spinon dynamical correlation function tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of defaults for the chosen command")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dispersion", help="spinon energy and momentum table")
    p.add_argument("--model", choices=("xxx", "xxz"), default="xxx")
    p.add_argument("--q", type=parse_real, help="XXZ parameter in (-1, 0)")
    p.add_argument("--start", type=parse_real, default=-5.0)
    p.add_argument("--stop", type=parse_real, default=5.0)
    p.add_argument("--num", type=_count, default=101)
    _add_output(p, "dispersion")

    p = sub.add_parser("dcf-point", help="S at one (w, k), printed to stdout")
    p.add_argument("w", type=parse_real)
    p.add_argument("k", type=parse_real)
    _add_quadrature(p)

    p = sub.add_parser("dcf-grid", help="S on a k-major (k, w) grid")
    p.add_argument("--k-min", type=parse_real, default=0.0)
    p.add_argument("--k-max", type=parse_real, default=2.0 * math.pi)
    p.add_argument("--n-k", type=_count, default=200)
    p.add_argument("--w-min", type=parse_real, default=0.0)
    p.add_argument("--w-max", type=parse_real, default=2.0 * math.pi)
    p.add_argument("--n-w", type=_count, default=200)
    p.add_argument("--workers", type=_count, default=1, help="worker processes (affects speed only)")
    _add_quadrature(p)
    _add_output(p, "dcf-grid")

    p = sub.add_parser("sumrule", help="band-integrated weight at fixed k")
    p.add_argument("--k", type=_real_list, default=[0.5 * math.pi], help="comma-separated momenta, e.g. pi/2,3pi/4")
    p.add_argument("--weight-rel-tol", type=_positive, default=1e-8)
    p.add_argument("--zone", action="store_true", help="also integrate the weight over the zone")
    p.add_argument("--zone-nodes", type=_count, default=16)
    _add_quadrature(p)
    _add_output(p, "sumrule")

    p = sub.add_parser("ed", help="exact-diagonalization spectra of a finite ring")
    p.add_argument("--n-sites", type=_count, default=8)
    p.add_argument("--eta", type=_positive, default=0.05 * math.pi, help="Lorentzian half-width")
    p.add_argument("--omega-max", type=_positive, default=2.0 * math.pi)
    p.add_argument("--n-omega", type=_count, default=201)
    _add_output(p, "ed")

    p = sub.add_parser("limit-check", help="XXZ to XXX dispersion limit study")
    p.add_argument("--eps", type=_real_list, default=[0.5, 0.2, 0.1, 0.05])
    p.add_argument("--beta", type=_real_list, default=[0.0, 0.5, 1.0, 2.0])
    _add_output(p, "limit-check")
    return parser


def _load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        data = _load_config(args.config)
        # a config is either flat or keyed by command name
        section = data[args.command] if isinstance(data.get(args.command), dict) else data
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions if a.dest != "help"}
        defaults = {}
        for key, value in section.items():
            if key in COMMANDS:
                continue
            dest = key.replace("-", "_")
            if dest not in known:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            action = known[dest]
            try:
                value = action.type(value) if action.type is not None else value
            except (argparse.ArgumentTypeError, TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config key {key!r} must be one of {list(action.choices)}")
            defaults[dest] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _config_of(args) -> RunConfig:
    # worker count changes speed only, so it stays out of the output bytes
    skip = ("command", "config", "output", "workers")
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, params)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"twospinon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = _config_of(args)
    try:
        result, failures = COMMANDS[args.command](args, cfg)
    except (DomainError, UsageError) as exc:
        print(f"twospinon {args.command}: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TwoSpinonError as exc:
        print(f"twospinon {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if result is not None:
        tables = result if isinstance(result, dict) else {None: result}
        base = resolve_output(args.output, args.command, args.format)
        for suffix, table in tables.items():
            path = base if suffix is None else base.with_name(f"{base.stem}-{suffix}{base.suffix}")
            atomic_write(path, table.render(args.format))
            print(path)
    if failures:
        print(f"twospinon {args.command}: {len(failures)} point(s) failed", file=sys.stderr)
        for f in failures[:10]:
            print("  " + " ".join(str(x) for x in f), file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
