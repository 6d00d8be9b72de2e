"""Continuous regularized Gauss-Newton flow for ill-posed operator equations.

The package discretizes functions on uniform grids with Simpson quadrature,
integrates the regularized Gauss-Newton flow with Euler or midpoint
Runge-Kutta steppers under a decaying regularization schedule, certifies
convergence via an explicit Riccati majorant, and ships an inverse-gravimetry
benchmark with a sweep/export harness and CLI.
"""

from .certificate import (
    Certificate,
    CertificateInputs,
    ComparisonVerdict,
    bound_curve,
    build_certificate,
    comparison_check,
    default_u0,
)
from .errors import (
    DomainError,
    EvenNodeCountError,
    GnflowError,
    GridMismatchError,
    NonFiniteValueError,
    NumericalError,
    ScheduleError,
)
from .flow import (
    DiscrepancyFloor,
    FirstDiscrepancyIncrease,
    FixedSteps,
    JacobianMatrix,
    OperatorModel,
    RunReport,
    SolverConfig,
    TrajectoryPoint,
    euler_step,
    rk_midpoint_step,
    run_flow,
    velocity,
)
from .gravimetry import (
    GravimetryModel,
    GravimetryParams,
    forward,
    frechet_matrix,
    initial_guess,
    kernel,
    model_interface,
    synthesize_data,
    true_interface,
)
from .grids import (
    Grid,
    GridFunction,
    QuadratureWeights,
    inner_product,
    integrate,
    l2_norm,
    simpson_weights,
    sup_norm,
)
from .harness import (
    ExperimentSpec,
    TableRow,
    load_spec,
    parse_stop_rule,
    run_table,
    save_spec,
    trajectory_export,
    write_table_csv,
)
from .schedules import (
    Base2,
    Exponential,
    InversePower,
    RateVerdict,
    Schedule,
    parse_schedule,
    validate_rate_function,
)
from .synthetic import (
    CertifiedInstance,
    DiagonalLinearModel,
    certified_diagonal_instance,
)

__version__ = "0.1.0"
