"""Command-line entry point: ``risopt {convergence,sweep-distance,sweep-area,validate}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from . import optimizer_mc as mc
from .em_model import DEFAULT_ORDER, PRESETS, parse_config, scenario_from_config

DEFAULTS = {
    "convergence": {"n_ris": [16, 64], "d_over_lambda": [0.125, 0.5]},
    "distance_sweep": {"d_over_lambda": [0.125, 0.1875, 0.25, 0.375, 0.5, 0.75, 1.0]},
    "constant_area_sweep": {"n_ris": [4, 9, 16, 25, 36, 49, 64, 100]},
    "validate": {},
}

COMMANDS = {
    "convergence": "convergence",
    "sweep-distance": "distance_sweep",
    "sweep-area": "constant_area_sweep",
    "validate": "validate",
}


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _ints(text):
    return [int(v) for v in text.replace(",", " ").split()]


def _parser():
    parser = argparse.ArgumentParser(prog="risopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--preset", default="paper-28ghz", choices=sorted(PRESETS))
        p.add_argument("--config", type=Path, help="key = value scenario/experiment file")
        p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        if name == "validate":
            continue
        p.add_argument("--d-over-lambda", type=_floats, help="spacings, comma separated")
        p.add_argument("--n-ris", type=_ints, help="RIS sizes (perfect squares), comma separated")
        p.add_argument("--strategies", type=lambda t: [s for s in t.replace(",", " ").split()])
        p.add_argument("--iters", type=int, help="maximum iterations K")
        p.add_argument("--eps-delta", type=float, help="adaptive step ratio delta * ||G^-1||")
        p.add_argument("--conv-tol", type=float, help="relative improvement for early stop (0 disables)")
        p.add_argument("--area-over-lambda2", type=float, help="fixed RIS area for sweep-area")
        p.add_argument("--order", type=int, help="Gauss-Legendre points per panel")
        if name == "convergence":
            p.add_argument("--force-diagonal", action="store_true", help="drop mutual coupling from Z_SS")
    return parser


def build_spec(args) -> harness.ExperimentSpec:
    kind = COMMANDS[args.command]
    entries = parse_config(args.config.read_text(encoding="utf-8")) if args.config else {}
    scenario = scenario_from_config(entries, PRESETS[args.preset]())

    def pick(attr, key, convert, default):
        value = getattr(args, attr, None)
        if value is not None:
            return value
        if key in entries:
            return convert(entries[key])
        return default

    base = DEFAULTS[kind]
    cfg = mc.McConfig(
        max_iters=pick("iters", "max_iters", int, 500),
        delta_policy=mc.AdaptiveDelta(pick("eps_delta", "eps_delta", float, 0.1)),
        conv_tol=pick("conv_tol", "conv_tol", float, 1e-8),
    )
    area_rel = pick("area_over_lambda2", "area_over_lambda2", float, None)
    return harness.ExperimentSpec(
        kind=kind,
        scenario=scenario,
        d_over_lambda=pick("d_over_lambda", "sweep_d_over_lambda", _floats, base.get("d_over_lambda", [])),
        n_ris=pick("n_ris", "sweep_n_ris", _ints, base.get("n_ris", [])),
        strategies=pick("strategies", "strategies", lambda t: t.replace(",", " ").split(), harness.STRATEGIES),
        output=args.out,
        mc_config=cfg,
        area=None if area_rel is None else area_rel * scenario.wavelength**2,
        order=pick("order", "quad_order", int, DEFAULT_ORDER),
        force_diagonal=getattr(args, "force_diagonal", False),
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    spec = build_spec(args)
    if spec.kind == "validate":
        report = harness.run_validate(spec)
        table = report.to_table()
        status = 0 if report.passed else 1
    else:
        runner = {
            "convergence": harness.run_convergence,
            "distance_sweep": harness.run_distance_sweep,
            "constant_area_sweep": harness.run_constant_area_sweep,
        }[spec.kind]
        table = runner(spec)
        status = 0
    if spec.output is None:
        table.write_csv(sys.stdout)
    else:
        print(f"wrote {spec.output}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
