"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure.
Errors print a single line ``cvedr: error[<kind>]: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .files import analyze_recorded, fmt, load_config, write_recorded, write_results
from .gaussian import apply_loss, make_vacuum
from .metrics import EdrReport, build_report, minimize_branciard
from .sampling import QUANTITIES, trial_batches
from .sweep import FAMILIES, ConfigError, StateSpec, SweepConfig, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3

#: Named parameters per family, in constructor order, with defaults.
STATE_PARAMS = {
    "coherent": (("mean_x", 0.0), ("mean_p", 0.0)),
    "squeezed_pure": (("r", 0.334),),
    "squeezed_db": (("sqz_db", -2.9), ("antisqz_db", 3.9)),
    "thermal": (("r", 0.334),),
}


def state_from_args(family: str, params: list[str] | None) -> StateSpec:
    """Build a :class:`StateSpec` from ``--state`` and repeated ``--param k=v``."""
    if family not in FAMILIES:
        raise ConfigError("state", f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    values = dict(STATE_PARAMS[family])
    for item in params or []:
        if "=" not in item:
            raise ConfigError("param", f"expected k=v, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in values:
            raise ConfigError("param", f"{family} has no parameter {k!r} (known: {', '.join(values)})")
        try:
            values[k] = float(v)
        except ValueError:
            raise ConfigError("param", f"unparsable value {v!r} for {k}") from None
    return StateSpec(family, tuple(values.values()))


def _signal(args):
    spec = state_from_args(args.state, args.param)
    state = spec.build()
    if args.loss_eff is not None:
        state = apply_loss(state, args.loss_eff)
    return spec, state


def format_report(rep: EdrReport, label: str = "") -> str:
    lines = []
    if label:
        lines.append(f"state={label}")
    for f in ("t", "epsilon", "eta", "sigma_a", "sigma_b", "c_ab"):
        lines.append(f"{f}={fmt(getattr(rep, f))}")
    for name in ("heisenberg", "ozawa", "branciard"):
        lhs = getattr(rep, f"lhs_{name}")
        verdict = "VIOLATED" if getattr(rep, f"{name}_violated") else "valid"
        lines.append(f"{name}: lhs={fmt(lhs)} bound={fmt(rep.c_ab)} {verdict}")
    if rep.branciard_clamped:
        lines.append("branciard: discriminant clamped at 0")
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    config = load_config(args.config) if args.config else SweepConfig()
    result = run_sweep(config, workers=args.workers)
    paths = write_results(result, args.out)
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    return EXIT_OK


def cmd_report(args) -> int:
    spec, signal = _signal(args)
    rep = build_report(signal, make_vacuum(), args.t)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=1))
    else:
        print(format_report(rep, spec.label))
    return EXIT_OK


def cmd_minimize(args) -> int:
    spec, signal = _signal(args)
    t_star, lhs_star = minimize_branciard(signal, make_vacuum())
    print(f"state={spec.label}")
    print(f"t_star={t_star:.6f}")
    print(f"lhs_star={fmt(lhs_star)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    res = analyze_recorded(args.x, args.p, args.t, args.signal)
    print(f"signal_spread={res.signal_source}")
    print(f"records={len(res.reports)}")
    print(format_report(res.report))
    if res.summaries is not None:
        for q in QUANTITIES:
            s = res.summaries[q]
            print(f"{q}_error_bar={fmt(s.rms_error_bar)}")
    print(f"clamp_count={res.clamp_count}")
    return EXIT_OK


def cmd_gen(args) -> int:
    """Write the records ``run_trials`` would draw for the same seed."""
    spec, signal = _signal(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.trials):
        xb, pb, sb = trial_batches(signal, make_vacuum(), args.t, args.n, args.seed, k)
        write_recorded(out / f"x_{k:03d}.csv", xb, seed=xb.seed)
        write_recorded(out / f"p_{k:03d}.csv", pb, seed=pb.seed)
        write_recorded(out / f"signal_{k:03d}.csv", sb, seed=sb.seed)
    print(f"state={spec.label}")
    print(f"wrote {args.trials} record set(s) to {out}")
    return EXIT_OK


def _add_state_args(p):
    p.add_argument("--state", required=True, choices=sorted(FAMILIES))
    p.add_argument("--param", action="append", metavar="K=V", help="state parameter, repeatable")
    p.add_argument("--loss-eff", type=float, default=None, help="detection efficiency applied to the signal")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_VALIDATION, f"cvedr: error[validation]: {' '.join(message.split())}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cvedr", description="Error-disturbance relations for Gaussian states."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a transmission sweep and write result files")
    p.add_argument("--config", help="key=value config file (defaults if omitted)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="print the analytic report at one transmission")
    _add_state_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("minimize", help="transmission minimising the Branciard LHS")
    _add_state_args(p)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("analyze", help="estimate the report from recorded quadrature files")
    p.add_argument("--x", action="append", required=True, help="X-basis record, repeatable")
    p.add_argument("--p", action="append", required=True, help="P-basis record, repeatable")
    p.add_argument("--signal", action="append", default=None, help="direct signal record, repeatable")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen", help="write synthetic recorded-data files")
    _add_state_args(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=500_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def _fail(kind: str, code: int, exc: BaseException) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"cvedr: error[{kind}]: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as e:
        return _fail("numerical", EXIT_NUMERICAL, e)
    except (ValueError, KeyError) as e:
        return _fail("validation", EXIT_VALIDATION, e)
    except OSError as e:
        return _fail("io", EXIT_IO, e)


if __name__ == "__main__":
    sys.exit(main())
