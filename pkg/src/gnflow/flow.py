"""Regularized Gauss-Newton flow: velocity field, steppers, and run loop.

The flow solves phi(x) = 0 for a nonlinear operator phi between weighted
discrete L2 spaces by integrating

    dx/dt = -(J* J + alpha(t) I)^{-1} (J* phi(x) + alpha(t) (x - x0)),

where J = phi'(x) and J* is the adjoint with respect to the quadrature
weights.  With step size tau = 1 the Euler stepper reproduces the damped
(iteratively regularized) Gauss-Newton iteration; as alpha(t) decays the
trajectory approaches a solution of phi(x) = 0.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
import scipy.linalg

from .errors import DomainError, GridMismatchError, NonFiniteValueError, NumericalError
from .grids import Grid, GridFunction, QuadratureWeights, l2_norm, sup_norm
from .schedules import Schedule, validate_rate_function


@dataclass(frozen=True)
class JacobianMatrix:
    """Dense Jacobian with the quadrature weights defining its adjoint.

    Rows are indexed by the data-space grid, columns by the unknown-space
    grid (one shared grid, so the matrix is square).  The adjoint is the
    weighted one, J* = W^{-1} J^T W, which makes J* J selfadjoint and
    nonnegative in the weighted inner product.
    """

    matrix: np.ndarray
    quadrature: QuadratureWeights

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = self.quadrature.grid.node_count
        if m.shape != (n, n):
            raise ValueError(f"Jacobian shape {m.shape} does not match grid size {n}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteValueError("Jacobian contains non-finite entries")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def adjoint_apply(self, v: np.ndarray) -> np.ndarray:
        w = self.quadrature.weights
        return (self.matrix.T @ (w * v)) / w

    def symmetrized(self) -> np.ndarray:
        """S J S^{-1} with S = diag(sqrt(w)); shares singular values with
        the weighted operator and makes the normal matrix plainly symmetric."""
        s = np.sqrt(self.quadrature.weights)
        return (self.matrix * s[:, None]) / s[None, :]

    def normal_solve(self, alpha: float, rhs: np.ndarray) -> np.ndarray:
        """Solve (J* J + alpha I) d = rhs by Cholesky factorization.

        The system is solved in symmetrized coordinates where it is plainly
        symmetric positive definite (alpha > 0 guarantees definiteness).
        """
        if alpha <= 0:
            raise NumericalError(f"normal equations need alpha > 0, got {alpha}")
        s = np.sqrt(self.quadrature.weights)
        b = self.symmetrized()
        system = b.T @ b
        system[np.diag_indices_from(system)] += alpha
        try:
            factor = scipy.linalg.cho_factor(system, lower=True, check_finite=False)
            d = scipy.linalg.cho_solve(factor, s * rhs, check_finite=False) / s
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"normal-equation factorization failed: {exc}") from exc
        if not np.all(np.isfinite(d)):
            raise NumericalError("normal-equation solve produced non-finite values")
        return d


class OperatorModel(ABC):
    """Nonlinear problem phi(x) = 0 posed on one shared grid.

    `jacobian` must return the Frechet derivative of `residual`: directional
    finite differences of the residual agree with the Jacobian action to
    first order at every admissible point.
    """

    @property
    @abstractmethod
    def grid(self) -> Grid: ...

    @property
    @abstractmethod
    def quadrature(self) -> QuadratureWeights: ...

    @abstractmethod
    def residual(self, x: GridFunction) -> GridFunction:
        """phi(x), in the data space."""

    @abstractmethod
    def jacobian(self, x: GridFunction) -> JacobianMatrix:
        """phi'(x) as a dense matrix with the weighted adjoint attached."""

    def domain_violation(self, x: GridFunction) -> Optional[str]:
        """None when x is admissible, else a human-readable reason."""
        return None


@dataclass(frozen=True)
class FixedSteps:
    """Run exactly `count` steps (bounded by max_steps)."""

    count: int


@dataclass(frozen=True)
class DiscrepancyFloor:
    """Stop at the first iterate whose discrepancy is <= tol."""

    tol: float


@dataclass(frozen=True)
class FirstDiscrepancyIncrease:
    """Stop after `patience` consecutive steps above the running minimum
    discrepancy, and report the minimizing iterate.

    Also stops once the schedule value drops below `alpha_floor`: below
    roughly 1e2 times the float64 epsilon the regularization no longer
    shifts the spectrum of the normal matrix, so further steps resolve
    rounding noise instead of data and eventually break the factorization.
    """

    patience: int = 3
    alpha_floor: float = 1e-13


StopRule = Union[FixedSteps, DiscrepancyFloor, FirstDiscrepancyIncrease]
StepperName = Literal["euler", "rk"]


@dataclass(frozen=True)
class SolverConfig:
    stepper: StepperName = "euler"
    tau: float = 0.1
    max_steps: int = 500
    stop_rule: StopRule = FirstDiscrepancyIncrease()
    record_every: int = 1

    def __post_init__(self):
        if self.stepper not in ("euler", "rk"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if isinstance(self.stop_rule, DiscrepancyFloor) and self.stop_rule.tol < 0:
            raise ValueError("discrepancy floor must be nonnegative")
        if isinstance(self.stop_rule, FixedSteps) and self.stop_rule.count < 0:
            raise ValueError("fixed step count must be nonnegative")
        if (
            isinstance(self.stop_rule, FirstDiscrepancyIncrease)
            and self.stop_rule.patience < 1
        ):
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class TrajectoryPoint:
    """One recorded iterate: time, regularization value, discrepancy, and,
    when a reference solution is known, the scaled error w = ||x - ref||/alpha
    and the sup-norm error."""

    step: int
    t: float
    alpha: float
    sigma: float
    w: Optional[float] = None
    error_sup: Optional[float] = None


@dataclass(frozen=True)
class RunReport:
    """Outcome of one flow integration."""

    steps_taken: int
    final_x: GridFunction
    discrepancy: float
    error_sup: Optional[float]
    error_l2: Optional[float]
    trajectory: list[TrajectoryPoint]
    diverged: bool
    stop_reason: str


def velocity(
    model: OperatorModel,
    schedule: Schedule,
    t: float,
    x: GridFunction,
    x0: GridFunction,
) -> GridFunction:
    """Right-hand side of the regularized Gauss-Newton flow at (t, x).

    Solves (J* J + alpha(t) I) d = -(J* phi(x) + alpha(t) (x - x0)) with the
    weighted adjoint J*; the system matrix is symmetric positive definite in
    the weighted inner product.
    """
    if x.grid != model.grid or x0.grid != model.grid:
        raise GridMismatchError("x and x0 must live on the model grid")
    reason = model.domain_violation(x)
    if reason is not None:
        raise DomainError(reason)
    alpha = schedule.alpha(t)
    jac = model.jacobian(x)
    res = model.residual(x)
    rhs = -(jac.adjoint_apply(res.values) + alpha * (x.values - x0.values))
    return GridFunction(model.grid, jac.normal_solve(alpha, rhs))


def euler_step(
    model: OperatorModel,
    schedule: Schedule,
    t_k: float,
    x_k: GridFunction,
    x0: GridFunction,
    tau: float,
) -> GridFunction:
    """x_{k+1} = x_k + tau * F(t_k, x_k); with tau = 1 this is one damped
    Gauss-Newton iteration with regularization alpha(t_k)."""
    d = velocity(model, schedule, t_k, x_k, x0)
    return GridFunction(model.grid, x_k.values + tau * d.values)


def rk_midpoint_step(
    model: OperatorModel,
    schedule: Schedule,
    t_k: float,
    x_k: GridFunction,
    x0: GridFunction,
    tau: float,
) -> GridFunction:
    """Explicit midpoint step: half Euler step, then a full step using the
    velocity at (t_k + tau/2, x_half).  Second-order accurate in tau."""
    d1 = velocity(model, schedule, t_k, x_k, x0)
    x_half = GridFunction(model.grid, x_k.values + 0.5 * tau * d1.values)
    reason = model.domain_violation(x_half)
    if reason is not None:
        raise DomainError(f"half-step point inadmissible: {reason}")
    d2 = velocity(model, schedule, t_k + 0.5 * tau, x_half, x0)
    return GridFunction(model.grid, x_k.values + tau * d2.values)


_STEPPERS = {"euler": euler_step, "rk": rk_midpoint_step}


def run_flow(
    model: OperatorModel,
    schedule: Schedule,
    x0: GridFunction,
    config: SolverConfig,
    reference: Optional[GridFunction] = None,
) -> RunReport:
    """Integrate the flow from x(0) = x0 and report the selected iterate.

    The discrepancy sigma_k = ||phi(x_k)||_L2 is evaluated at every iterate
    and drives the stop rule.  Under FirstDiscrepancyIncrease the iterate
    with minimal discrepancy is returned and steps_taken is its index.
    Non-finite iterates or domain violations end the run in-band: the report
    carries the last good state and diverged=True.
    """
    validate_rate_function(schedule)
    if x0.grid != model.grid:
        raise GridMismatchError("x0 must live on the model grid")
    if reference is not None and reference.grid != model.grid:
        raise GridMismatchError("reference must live on the model grid")
    reason = model.domain_violation(x0)
    if reason is not None:
        raise DomainError(f"initial point inadmissible: {reason}")

    stepper = _STEPPERS[config.stepper]
    rule = config.stop_rule
    quad = model.quadrature

    def sigma_at(x: GridFunction) -> float:
        return l2_norm(model.residual(x), quad)

    trajectory: list[TrajectoryPoint] = []

    def record(k: int, x: GridFunction, sigma: float, force: bool = False) -> None:
        if not force and k % config.record_every != 0:
            return
        t_k = k * config.tau
        w = err_sup = None
        if reference is not None:
            diff = GridFunction(model.grid, x.values - reference.values)
            alpha_k = schedule.alpha(t_k)
            err = l2_norm(diff, quad)
            # alpha can underflow to zero on long degraded runs
            w = err / alpha_k if alpha_k > 0 else (0.0 if err == 0 else math.inf)
            err_sup = sup_norm(diff)
        trajectory.append(
            TrajectoryPoint(k, t_k, schedule.alpha(t_k), sigma, w, err_sup)
        )

    x = x0
    sigma = sigma_at(x)
    record(0, x, sigma)

    best_x, best_sigma, best_k = x, sigma, 0
    diverged = False
    stop_reason = "max_steps"
    k = 0
    steps_above_best = 0

    if isinstance(rule, DiscrepancyFloor) and sigma <= rule.tol:
        stop_reason = "discrepancy_floor"
    elif isinstance(rule, FixedSteps) and rule.count == 0:
        stop_reason = "fixed_steps"
    else:
        limit = config.max_steps
        if isinstance(rule, FixedSteps):
            limit = min(limit, rule.count)
        while k < limit:
            if (
                isinstance(rule, FirstDiscrepancyIncrease)
                and schedule.alpha(k * config.tau) < rule.alpha_floor
            ):
                stop_reason = "alpha_floor"
                break
            try:
                x_next = stepper(model, schedule, k * config.tau, x, x0, config.tau)
                sigma_next = sigma_at(x_next)
            except (DomainError, NumericalError, NonFiniteValueError) as exc:
                diverged = True
                stop_reason = f"diverged: {exc}"
                break
            if not np.isfinite(sigma_next):
                diverged = True
                stop_reason = "diverged: non-finite discrepancy"
                break
            k += 1
            x, sigma = x_next, sigma_next
            record(k, x, sigma, force=(k == limit))
            if sigma < best_sigma:
                best_x, best_sigma, best_k = x, sigma, k
                steps_above_best = 0
            else:
                steps_above_best += 1
            if isinstance(rule, DiscrepancyFloor) and sigma <= rule.tol:
                stop_reason = "discrepancy_floor"
                break
            if (
                isinstance(rule, FirstDiscrepancyIncrease)
                and steps_above_best >= rule.patience
            ):
                stop_reason = "discrepancy_increase"
                break
        else:
            if isinstance(rule, FixedSteps) and k == rule.count:
                stop_reason = "fixed_steps"
            else:
                stop_reason = "max_steps"

    if isinstance(rule, FirstDiscrepancyIncrease):
        x, sigma, steps = best_x, best_sigma, best_k
    else:
        steps = k

    err_sup = err_l2 = None
    if reference is not None:
        diff = GridFunction(model.grid, x.values - reference.values)
        err_sup = sup_norm(diff)
        err_l2 = l2_norm(diff, quad)
    return RunReport(
        steps_taken=steps,
        final_x=x,
        discrepancy=sigma,
        error_sup=err_sup,
        error_l2=err_l2,
        trajectory=trajectory,
        diverged=diverged,
        stop_reason=stop_reason,
    )
