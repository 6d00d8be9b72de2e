"""Experiment assembly: parameter sweeps, table CSVs, trajectory export.

A sweep runs the flow for every (schedule, step size) pair with the
requested steppers, against synthetic data, and records one table row per
pair.  Output is CSV throughout so runs can be diffed, plotted, and
reproduced without further tooling.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from .certificate import Certificate, bound_curve
from .flow import (
    DiscrepancyFloor,
    FirstDiscrepancyIncrease,
    FixedSteps,
    OperatorModel,
    RunReport,
    SolverConfig,
    StopRule,
    run_flow,
)
from .grids import GridFunction
from .gravimetry import GravimetryModel, GravimetryParams, initial_guess, true_interface
from .schedules import Schedule, parse_schedule
from .synthetic import certified_diagonal_instance

SYNTHETIC_PROBLEMS = ("certified-diagonal",)


def parse_stop_rule(text: str) -> StopRule:
    """Parse ``fixed:N``, ``floor:tol`` or ``increase:patience``."""
    head, sep, tail = text.strip().lower().partition(":")
    try:
        if head == "fixed" and sep:
            return FixedSteps(int(tail))
        if head == "floor" and sep:
            return DiscrepancyFloor(float(tail))
        if head == "increase" and sep:
            return FirstDiscrepancyIncrease(int(tail))
    except ValueError as exc:
        raise ValueError(f"bad stop-rule parameter in {text!r}: {exc}") from exc
    raise ValueError(
        f"unknown stop rule {text!r}; expected fixed:N, floor:tol or increase:patience"
    )


def format_stop_rule(rule: StopRule) -> str:
    if isinstance(rule, FixedSteps):
        return f"fixed:{rule.count}"
    if isinstance(rule, DiscrepancyFloor):
        return f"floor:{rule.tol:g}"
    return f"increase:{rule.patience}"


@dataclass(frozen=True)
class ExperimentSpec:
    """One table sweep: problem, schedules, step sizes, steppers."""

    problem: Union[GravimetryParams, str] = field(default_factory=GravimetryParams)
    schedules: Sequence[Schedule] = ()
    tau_values: Sequence[float] = ()
    steppers: Sequence[str] = ("euler", "rk")
    stop_rule: StopRule = FirstDiscrepancyIncrease()
    max_steps: int = 500
    record_every: int = 1
    output_path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if not self.schedules:
            raise ValueError("spec needs at least one schedule")
        if not self.tau_values:
            raise ValueError("spec needs at least one tau value")
        if any(tau <= 0 for tau in self.tau_values):
            raise ValueError("tau values must be positive")
        if not self.steppers:
            raise ValueError("spec needs at least one stepper")
        unknown = set(self.steppers) - {"euler", "rk"}
        if unknown:
            raise ValueError(f"unknown steppers {sorted(unknown)}")
        if isinstance(self.problem, str) and self.problem not in SYNTHETIC_PROBLEMS:
            raise ValueError(
                f"unknown synthetic problem {self.problem!r}; "
                f"expected one of {SYNTHETIC_PROBLEMS}"
            )


@dataclass(frozen=True)
class TableRow:
    """Per-(schedule, tau) results for both steppers (None when not run)."""

    schedule: str
    tau: float
    n_euler: Optional[int] = None
    delta_e_sup: Optional[float] = None
    delta_e_l2: Optional[float] = None
    sigma_e: Optional[float] = None
    euler_diverged: Optional[bool] = None
    n_rk: Optional[int] = None
    delta_r_sup: Optional[float] = None
    delta_r_l2: Optional[float] = None
    sigma_r: Optional[float] = None
    rk_diverged: Optional[bool] = None


TABLE_HEADER = (
    "schedule",
    "tau",
    "N_euler",
    "delta_E_sup",
    "delta_E_l2",
    "sigma_E",
    "euler_diverged",
    "N_rk",
    "delta_R_sup",
    "delta_R_l2",
    "sigma_R",
    "rk_diverged",
)


def build_problem(
    problem: Union[GravimetryParams, str],
) -> tuple[OperatorModel, GridFunction, GridFunction]:
    """Materialize (model, initial guess, reference solution) for a spec."""
    if isinstance(problem, GravimetryParams):
        model = GravimetryModel.synthetic(problem)
        return model, initial_guess(problem), true_interface(problem)
    instance = certified_diagonal_instance()
    return instance.model, instance.x0, instance.solution


def run_table(spec: ExperimentSpec) -> list[TableRow]:
    """Run the sweep and return rows in spec order (schedules outer, taus
    inner).  Individual run divergence is recorded in-band, never raised.
    Writes CSV to spec.output_path when set."""
    model, x0, reference = build_problem(spec.problem)
    rows = []
    for schedule in spec.schedules:
        for tau in spec.tau_values:
            row = TableRow(schedule=schedule.describe(), tau=tau)
            for stepper in spec.steppers:
                config = SolverConfig(
                    stepper=stepper,
                    tau=tau,
                    max_steps=spec.max_steps,
                    stop_rule=spec.stop_rule,
                    record_every=spec.record_every,
                )
                report = run_flow(model, schedule, x0, config, reference=reference)
                if stepper == "euler":
                    row = replace(
                        row,
                        n_euler=report.steps_taken,
                        delta_e_sup=report.error_sup,
                        delta_e_l2=report.error_l2,
                        sigma_e=report.discrepancy,
                        euler_diverged=report.diverged,
                    )
                else:
                    row = replace(
                        row,
                        n_rk=report.steps_taken,
                        delta_r_sup=report.error_sup,
                        delta_r_l2=report.error_l2,
                        sigma_r=report.discrepancy,
                        rk_diverged=report.diverged,
                    )
            rows.append(row)
    if spec.output_path is not None:
        write_table_csv(rows, spec.output_path)
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".12e")
    return str(value)


def write_table_rows(rows: Sequence[TableRow], fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(TABLE_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.schedule,
                _cell(r.tau),
                _cell(r.n_euler),
                _cell(r.delta_e_sup),
                _cell(r.delta_e_l2),
                _cell(r.sigma_e),
                _cell(r.euler_diverged),
                _cell(r.n_rk),
                _cell(r.delta_r_sup),
                _cell(r.delta_r_l2),
                _cell(r.sigma_r),
                _cell(r.rk_diverged),
            ]
        )


def write_table_csv(rows: Sequence[TableRow], path) -> None:
    with open(path, "w", newline="") as fh:
        write_table_rows(rows, fh)


def trajectory_export(
    report: RunReport,
    path,
    certificate: Optional[Certificate] = None,
    u0: Optional[float] = None,
) -> None:
    """Write the recorded trajectory as CSV.

    Columns: step, t, alpha, sigma, w (empty without a reference), error_sup
    (same), and, when a passing certificate and u0 are supplied, the
    majorant value bound(t).
    """
    with_bound = certificate is not None
    if with_bound and u0 is None:
        raise ValueError("exporting the bound column requires u0")
    header = ["step", "t", "alpha", "sigma", "w", "error_sup"]
    if with_bound:
        header.append("bound")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p in report.trajectory:
            row = [
                str(p.step),
                _cell(p.t),
                _cell(p.alpha),
                _cell(p.sigma),
                _cell(p.w),
                _cell(p.error_sup),
            ]
            if with_bound:
                row.append(_cell(bound_curve(certificate, u0, p.t)))
            writer.writerow(row)


def spec_to_config(spec: ExperimentSpec) -> dict:
    """JSON-serializable form of a spec (round-trips via `spec_from_config`)."""
    if isinstance(spec.problem, GravimetryParams):
        problem = {
            "l": spec.problem.half_width,
            "H": spec.problem.depth,
            "rho": spec.problem.density,
            "epsilon": spec.problem.epsilon,
            "grid_n": spec.problem.node_count,
        }
    else:
        problem = spec.problem
    return {
        "problem": problem,
        "schedules": [s.describe() for s in spec.schedules],
        "tau_values": list(spec.tau_values),
        "steppers": list(spec.steppers),
        "stop_rule": format_stop_rule(spec.stop_rule),
        "max_steps": spec.max_steps,
        "record_every": spec.record_every,
        "output_path": spec.output_path,
        "seed": spec.seed,
    }


def spec_from_config(config: dict) -> ExperimentSpec:
    """Build a spec from a parsed JSON config document."""
    problem = config.get("problem", {})
    if isinstance(problem, str):
        problem_obj: Union[GravimetryParams, str] = problem
    else:
        problem_obj = GravimetryParams(
            half_width=float(problem.get("l", 1.0)),
            depth=float(problem.get("H", 2.0)),
            density=float(problem.get("rho", 1.0)),
            epsilon=float(problem.get("epsilon", 1e-3)),
            node_count=int(problem.get("grid_n", 201)),
        )
    schedules = [parse_schedule(s) for s in config.get("schedules", [])]
    return ExperimentSpec(
        problem=problem_obj,
        schedules=schedules,
        tau_values=[float(t) for t in config.get("tau_values", [])],
        steppers=list(config.get("steppers", ("euler", "rk"))),
        stop_rule=parse_stop_rule(config.get("stop_rule", "increase:3")),
        max_steps=int(config.get("max_steps", 500)),
        record_every=int(config.get("record_every", 1)),
        output_path=config.get("output_path"),
        seed=int(config.get("seed", 0)),
    )


def load_spec(path) -> ExperimentSpec:
    with open(path) as fh:
        return spec_from_config(json.load(fh))


def save_spec(spec: ExperimentSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_config(spec), fh, indent=2)
        fh.write("\n")
