"""Constrained minimum-energy LQ optimal control via Douglas-Rachford splitting.

The solver iterates a two-projection splitting operator on sampled control
signals, returns primal and dual candidates together with the operator's
fixed point, and certifies optimality through the fixed-point decomposition
and the Fenchel duality gap.
"""

from .certificate import (
    CertificateReport,
    CertificateTolerances,
    certify,
    dual_adjoint_fit,
    fit_adjoint,
    rebuild_fixed_point,
)
from .dynamics import (
    LtiSystem,
    TransitionCache,
    adjoint_output,
    build_transition_cache,
    propagate_adjoint,
    propagate_state,
)
from .duality import (
    ObjectivePair,
    dual_integrand,
    dual_integrand_adjoint,
    dual_objective,
    duality_gap,
    primal_objective,
    prox_affine,
    prox_energy,
)
from .errors import (
    ControllabilityError,
    DivergenceError,
    DrControlError,
    DualRepresentationError,
    DynamicsOverflowError,
    GridMismatchError,
    ProblemValidationError,
    ProjectorUnavailableError,
)
from .oracle import OracleResult, projected_gradient_solve
from .problems import (
    DOUBLE_INTEGRATOR,
    MANIPULATOR,
    build,
    catalog_names,
    default_grid_size,
    load_problem,
    save_problem,
)
from .projections import (
    DoubleIntegratorProjector,
    ShootingOperator,
    build_shooting,
    min_norm_control,
    project_affine_di,
    project_affine_shooting,
    project_box,
)
from .signals import Signal, TimeGrid, Trajectory, inner_product, norm_l2, norm_linf
from .solver import DrConfig, DrRun, IterationRecord, SweepRow, dr_apply, gamma_sweep, solve

__version__ = "0.1.0"
