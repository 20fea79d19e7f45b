"""The Douglas-Rachford iteration producing primal and dual iterates.

One application of the operator, written in algorithm order:

    u_box    = clamp(gamma * u)                 (box projection)
    u_affine = P_affine(2 * u_box - u)          (affine projection)
    dual     = u - u_box                        (dual update)
    u_next   = dual + u_affine                  (primal update)

The governing sequence u_k is not itself feasible; u_box converges to the
primal solution and dual to a dual solution.  Iteration stops when the
sup-norm step between consecutive governing iterates drops below epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


from .dynamics import LtiSystem
from .duality import dual_objective, primal_objective
from .errors import DivergenceError
from .projections import min_norm_control, project_box
from .signals import Signal, norm_linf

__all__ = ["DrConfig", "IterationRecord", "DrRun", "SweepRow", "dr_apply", "solve", "gamma_sweep"]

GAMMA_CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class DrConfig:
    """Run parameters.  gamma=None means the weight-consistent 1/(1+r)."""

    gamma: float | None = None
    epsilon: float = 1e-8
    max_iterations: int = 10000
    initial_iterate: Signal | None = None
    snapshot_stride: int = 50

    def __post_init__(self):
        if self.gamma is not None and not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie strictly inside (0, 1)")
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be positive")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    residual_linf: float
    primal_objective: float
    dual_objective: float


@dataclass(frozen=True, eq=False)
class DrRun:
    """Everything one solve produced.

    ``u_box`` is the box-feasible iterate returned by the stopping rule,
    ``u_affine`` the last affine projection (its trajectory meets the target
    endpoint), ``dual`` the dual candidate and ``fixed_point`` the final
    governing iterate, stored exactly as constructed: dual + u_affine.
    """

    converged: bool
    iterations: int
    gamma: float
    gamma_overrides_r: bool
    records: tuple[IterationRecord, ...]
    snapshots: tuple[tuple[int, Signal], ...] = field(repr=False)
    u_box: Signal = field(repr=False)
    u_affine: Signal = field(repr=False)
    dual: Signal = field(repr=False)
    fixed_point: Signal = field(repr=False)

    @property
    def final_residual(self) -> float:
        return self.records[-1].residual_linf


def _dr_step(sys: LtiSystem, projector, gamma: float, u: Signal):
    u_box = project_box(sys, gamma * u)
    u_affine = projector.project(2.0 * u_box - u)
    dual = u - u_box
    u_next = dual + u_affine
    return u_box, u_affine, dual, u_next


def dr_apply(sys: LtiSystem, projector, gamma: float, u: Signal) -> Signal:
    """One application of the splitting operator to u."""
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie strictly inside (0, 1)")
    return _dr_step(sys, projector, gamma, u)[3]


def solve(sys: LtiSystem, projector, config: DrConfig | None = None) -> DrRun:
    """Iterate the splitting operator until the stopping rule fires.

    Returns a DrRun with converged=False when max_iterations is exhausted;
    raises DivergenceError if an iterate stops being finite.
    """
    config = config or DrConfig()
    gamma = sys.default_gamma() if config.gamma is None else config.gamma
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie strictly inside (0, 1)")
    gamma_overrides_r = abs(gamma - sys.default_gamma()) > GAMMA_CONSISTENCY_TOL

    grid = projector.grid
    u = config.initial_iterate if config.initial_iterate is not None else Signal.zeros(grid)
    if u.grid != grid:
        raise ValueError("initial iterate lives on a different grid")
    anchor = min_norm_control(projector)

    records: list[IterationRecord] = []
    snapshots: list[tuple[int, Signal]] = [(0, u)]
    converged = False
    u_box = u_affine = dual = u_next = u
    for k in range(config.max_iterations):
        # signals reject non-finite values at construction, so any overflow
        # inside the step surfaces here as a ValueError
        try:
            u_box, u_affine, dual, u_next = _dr_step(sys, projector, gamma, u)
        except ValueError as exc:
            raise DivergenceError(f"divergence detected at iteration {k}") from exc
        residual = norm_linf(u_next - u)
        records.append(
            IterationRecord(
                k=k,
                residual_linf=residual,
                primal_objective=primal_objective(sys, u_box),
                dual_objective=dual_objective(sys, anchor, dual),
            )
        )
        if (k + 1) % config.snapshot_stride == 0:
            snapshots.append((k + 1, u_next))
        if residual <= config.epsilon:
            converged = True
            break
        u = u_next

    if snapshots[-1][0] != len(records):
        snapshots.append((len(records), u_next))

    return DrRun(
        converged=converged,
        iterations=len(records),
        gamma=gamma,
        gamma_overrides_r=gamma_overrides_r,
        records=tuple(records),
        snapshots=tuple(snapshots),
        u_box=u_box,
        u_affine=u_affine,
        dual=dual,
        fixed_point=u_next,
    )


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    iterations: int
    converged: bool
    final_residual: float


def gamma_sweep(sys: LtiSystem, projector, gammas, config: DrConfig | None = None) -> list[SweepRow]:
    """One solve per gamma, shared epsilon and start; rows in input order.

    A diverging row is recorded with converged=False and an infinite residual
    and the sweep continues.
    """
    config = config or DrConfig()
    rows = []
    for gamma in gammas:
        cfg = replace(config, gamma=float(gamma))
        try:
            run = solve(sys, projector, cfg)
            rows.append(SweepRow(float(gamma), run.iterations, run.converged, run.final_residual))
        except DivergenceError:
            rows.append(SweepRow(float(gamma), config.max_iterations, False, float("inf")))
    return rows
