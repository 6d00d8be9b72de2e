"""Command-line interface.

Subcommands:
  solve              one flow run on the gravimetry benchmark
  table              a (schedule x tau) sweep driven by a JSON config file
  certify            evaluate the convergence certificate for given constants
  validate-schedule  check a schedule descriptor against the rate-function
                     requirements

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from typing import Optional, Sequence

from .certificate import CertificateInputs, build_certificate
from .errors import DomainError, NumericalError, ScheduleError
from .flow import SolverConfig, run_flow
from .gravimetry import GravimetryModel, GravimetryParams, initial_guess, true_interface
from .harness import (
    load_spec,
    parse_stop_rule,
    run_table,
    trajectory_export,
    write_table_csv,
    write_table_rows,
)
from .schedules import parse_schedule, validate_rate_function

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gnflow",
        description="Regularized Gauss-Newton flow solver and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the flow once on the gravimetry benchmark")
    solve.add_argument("--schedule", required=True, help="e.g. exp:alpha0=0.1,beta=3.5")
    solve.add_argument("--tau", type=float, default=0.1, help="time step (default 0.1)")
    solve.add_argument("--stepper", choices=("euler", "rk"), default="euler")
    solve.add_argument("--max-steps", type=int, default=500)
    solve.add_argument(
        "--stop",
        default="increase:3",
        help="fixed:N | floor:tol | increase:patience (default increase:3)",
    )
    solve.add_argument("--grid-n", type=int, default=201, help="node count (odd)")
    solve.add_argument("--H", type=float, default=2.0, help="source depth")
    solve.add_argument("--l", type=float, default=1.0, help="half-width of the interval")
    solve.add_argument("--rho", type=float, default=1.0, help="density")
    solve.add_argument("--epsilon", type=float, default=1e-3, help="domain margin")
    solve.add_argument("--record-every", type=int, default=1)
    solve.add_argument("--out", help="write the summary CSV here instead of stdout")
    solve.add_argument("--trajectory", help="write per-step trajectory CSV here")
    solve.set_defaults(func=_cmd_solve)

    table = sub.add_parser("table", help="run a sweep from a JSON config file")
    table.add_argument("--config", required=True, help="JSON config path")
    table.add_argument("--out", help="output CSV (overrides config output_path)")
    table.set_defaults(func=_cmd_table)

    certify = sub.add_parser("certify", help="evaluate the convergence certificate")
    certify.add_argument("--n1", type=float, required=True, help="bound on ||phi'||")
    certify.add_argument("--n2", type=float, required=True, help="bound on ||phi''||")
    certify.add_argument("--vnorm", type=float, required=True, help="source element norm")
    certify.add_argument("--alpha0", type=float, required=True, help="alpha(0)")
    certify.add_argument(
        "--logderiv0", type=float, required=True, help="(d/dt ln alpha)(0)"
    )
    certify.add_argument("--R", type=float, required=True, help="ball radius")
    certify.add_argument("--w0", type=float, default=None, help="||x0-x_hat||/alpha(0)")
    certify.set_defaults(func=_cmd_certify)

    validate = sub.add_parser(
        "validate-schedule", help="check a schedule descriptor"
    )
    validate.add_argument("--schedule", required=True)
    validate.set_defaults(func=_cmd_validate_schedule)
    return parser


def _fail(message: str, code: int) -> int:
    print(f"gnflow: {message}", file=sys.stderr)
    return code


def _cmd_solve(args) -> int:
    try:
        schedule = parse_schedule(args.schedule)
        validate_rate_function(schedule)
        stop_rule = parse_stop_rule(args.stop)
        params = GravimetryParams(
            half_width=args.l,
            depth=args.H,
            density=args.rho,
            epsilon=args.epsilon,
            node_count=args.grid_n,
        )
        config = SolverConfig(
            stepper=args.stepper,
            tau=args.tau,
            max_steps=args.max_steps,
            stop_rule=stop_rule,
            record_every=args.record_every,
        )
    except (ScheduleError, ValueError) as exc:
        return _fail(str(exc), USAGE_ERROR)

    try:
        model = GravimetryModel.synthetic(params)
        report = run_flow(
            model, schedule, initial_guess(params), config,
            reference=true_interface(params),
        )
        rows = [
            (
                "stepper", "schedule", "tau", "N",
                "delta_sup", "delta_l2", "sigma", "diverged", "stop_reason",
            ),
            (
                args.stepper,
                schedule.describe(),
                format(args.tau, "g"),
                str(report.steps_taken),
                format(report.error_sup, ".12e"),
                format(report.error_l2, ".12e"),
                format(report.discrepancy, ".12e"),
                str(int(report.diverged)),
                report.stop_reason,
            ),
        ]
        if args.out:
            with open(args.out, "w", newline="") as fh:
                csv.writer(fh).writerows(rows)
        else:
            csv.writer(sys.stdout).writerows(rows)
        if args.trajectory:
            trajectory_export(report, args.trajectory)
    except (DomainError, NumericalError, OSError) as exc:
        return _fail(str(exc), RUNTIME_ERROR)
    return 0


def _cmd_table(args) -> int:
    try:
        spec = load_spec(args.config)
    except OSError as exc:
        return _fail(f"cannot read config: {exc}", USAGE_ERROR)
    except (ScheduleError, ValueError) as exc:
        return _fail(f"bad config: {exc}", USAGE_ERROR)
    out = args.out or spec.output_path
    spec = dataclasses.replace(spec, output_path=None)  # CLI owns the output
    try:
        rows = run_table(spec)
        if out:
            write_table_csv(rows, out)
        else:
            write_table_rows(rows, sys.stdout)
    except OSError as exc:
        return _fail(str(exc), RUNTIME_ERROR)
    return 0


def _cmd_certify(args) -> int:
    try:
        inputs = CertificateInputs(
            n1=args.n1,
            n2=args.n2,
            v_norm=args.vnorm,
            alpha0=args.alpha0,
            logderiv0=args.logderiv0,
            radius=args.R,
            w0=args.w0,
        )
    except ValueError as exc:
        return _fail(str(exc), USAGE_ERROR)
    cert = build_certificate(inputs)
    print(f"C1={cert.c1:.6g}")
    print(f"C2={cert.c2:.6g}")
    print(f"C3={cert.c3:.6g}")
    if cert.c is not None:
        print(f"c={cert.c:.6g}")
        print(f"u1={cert.u1:.6g}")
        print(f"u2={cert.u2:.6g}")
    print(f"rate_cap={cert.rate_cap:.6g}")
    for v in cert.conditions:
        status = "PASS" if v.passed else "FAIL"
        print(f"condition {v.name}: {status} ({v.detail})")
    print(f"certificate: {'PASS' if cert.passed else 'FAIL'}")
    return 0


def _cmd_validate_schedule(args) -> int:
    try:
        schedule = parse_schedule(args.schedule)
        verdict = validate_rate_function(schedule)
    except ScheduleError as exc:
        return _fail(str(exc), USAGE_ERROR)
    kind = "strict" if verdict.strict else "weak (constant log-derivative)"
    print(f"schedule {schedule.describe()}: PASS [{kind}]")
    print(f"alpha(0)={verdict.alpha0:.6g}")
    print(f"logderiv(0)={verdict.log_derivative0:.6g}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
