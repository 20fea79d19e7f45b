"""Projections onto the two constraint sets of the split problem.

The box set is handled by a nodewise clamp.  The affine set (all controls
whose state trajectory meets both endpoint conditions) is handled either by
the closed-form corrector for the double integrator or, for general systems,
by a shooting operator: the terminal defect of the input is removed by
subtracting the right combination of adjoint output signals, which span the
orthogonal complement of the constraint set's direction space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import (
    LtiSystem,
    TransitionCache,
    adjoint_output_basis,
    build_transition_cache,
    choose_adjoint_anchor,
)
from .errors import ControllabilityError, GridMismatchError, ProjectorUnavailableError
from .signals import Signal, TimeGrid

__all__ = [
    "project_box",
    "project_affine_di",
    "DoubleIntegratorProjector",
    "ShootingOperator",
    "build_shooting",
    "project_affine_shooting",
    "min_norm_control",
]

# Condition estimate above which the shooting matrix is treated as singular.
CONDITION_LIMIT = 1e12


def project_box(sys: LtiSystem, u: Signal) -> Signal:
    """Nodewise clamp into [lower, upper]."""
    return Signal(u.grid, np.clip(u.values, sys.lower, sys.upper))


def _is_double_integrator(sys: LtiSystem) -> bool:
    return (
        sys.n == 2
        and np.array_equal(sys.A, [[0.0, 1.0], [0.0, 0.0]])
        and np.array_equal(sys.b, [0.0, 1.0])
        and sys.t_final == 1.0
    )


def _integral_one_minus_t(u: Signal) -> float:
    """Exact integral of (1 - t) * u(t) for piecewise-linear u on [0, 1].

    Per interval both factors are linear, so the product is quadratic and
    h/6 * [f0*(2g0+g1) + f1*(g0+2g1)] integrates it exactly.
    """
    t = u.grid.nodes
    v = u.values
    f0, f1 = 1.0 - t[:-1], 1.0 - t[1:]
    g0, g1 = v[:-1], v[1:]
    return float(u.grid.h / 6.0 * np.sum(f0 * (2.0 * g0 + g1) + f1 * (g0 + 2.0 * g1)))


def project_affine_di(sys: LtiSystem, u: Signal) -> Signal:
    """Closed-form affine projection for the double integrator on [0, 1].

    Adds the affine correction c1*t + c2 whose coefficients are determined by
    the two endpoint defects.  The input integrals are evaluated exactly for
    the piecewise-linear interpolant so the corrected control steers the
    propagated state onto the target endpoint to roundoff.
    """
    if not _is_double_integrator(sys):
        raise ProjectorUnavailableError("analytic projector unavailable")
    s0, v0 = sys.x0
    sf, vf = sys.xf
    w = u.grid.quadrature_weights
    integral_u = float(np.dot(w, u.values))  # trapezoid, exact for pw-linear
    alpha = s0 + v0 - sf + _integral_one_minus_t(u)
    beta = v0 - vf + integral_u
    c1 = 12.0 * alpha - 6.0 * beta
    c2 = -6.0 * alpha + 2.0 * beta
    return Signal(u.grid, u.values + c1 * u.grid.nodes + c2)


@dataclass(frozen=True)
class DoubleIntegratorProjector:
    """Affine projector backed by the closed-form double-integrator corrector."""

    sys: LtiSystem
    grid: TimeGrid

    def __post_init__(self):
        if not _is_double_integrator(self.sys):
            raise ProjectorUnavailableError("analytic projector unavailable")

    def project(self, u: Signal) -> Signal:
        return project_affine_di(self.sys, u)

    def min_norm(self) -> Signal:
        return self.project(Signal.zeros(self.grid))


@dataclass(frozen=True, eq=False)
class ShootingOperator:
    """Affine projector for a general LTI system on a fixed grid.

    ``terminal_map`` and ``x_free`` give the terminal state of any sampled
    control as the affine map x_free + terminal_map @ u. ``basis`` holds the
    adjoint output signals used as correction directions, and ``M`` is the
    square matrix mapping correction coefficients to terminal-state changes.
    The factorization works on the row/column-equilibrated copy of M because
    state components can carry wildly different units; ``condition`` is the
    equilibrated estimate, the one that governs solve accuracy.
    """

    sys: LtiSystem
    grid: TimeGrid
    cache: TransitionCache = field(repr=False)
    basis: np.ndarray = field(repr=False)
    terminal_map: np.ndarray = field(repr=False)
    x_free: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    lu: tuple = field(repr=False)
    row_scale: np.ndarray = field(repr=False)
    col_scale: np.ndarray = field(repr=False)
    condition: float
    anchor: str

    def terminal_state(self, u: Signal) -> np.ndarray:
        if u.grid != self.grid:
            raise GridMismatchError("incompatible grids")
        return self.x_free + self.terminal_map @ u.values

    def solve_correction(self, defect: np.ndarray) -> np.ndarray:
        y = scipy.linalg.lu_solve(self.lu, defect / self.row_scale)
        return y / self.col_scale

    def project(self, u: Signal) -> Signal:
        return project_affine_shooting(self, u)

    def min_norm(self) -> Signal:
        return self.project(Signal.zeros(self.grid))


def _terminal_affine_map(sys: LtiSystem, grid: TimeGrid, cache: TransitionCache):
    """Coefficients of the terminal state as an affine function of the samples.

    Accumulated backward so each interval's input weights are multiplied by
    the remaining state transition exactly once.
    """
    n, N = sys.n, grid.n_intervals
    R = np.zeros((n, grid.n_nodes))
    left = cache.in_left.copy()   # E^(N-1-i) @ in_left, filled backward
    right = cache.in_right.copy()
    for i in range(N - 1, -1, -1):
        R[:, i] += left
        R[:, i + 1] += right
        if i > 0:
            left = cache.interval @ left
            right = cache.interval @ right
    x_free = sys.x0.copy()
    for _ in range(N):
        x_free = cache.interval @ x_free
    return R, x_free


def build_shooting(sys: LtiSystem, grid: TimeGrid) -> ShootingOperator:
    """Assemble and factorize the shooting operator for one (system, grid).

    Raises ControllabilityError when the shooting matrix condition estimate
    exceeds the limit, which on a sensible grid means the system cannot steer
    between the prescribed endpoints.
    """
    cache = build_transition_cache(sys, grid)
    anchor = choose_adjoint_anchor(sys)
    basis = adjoint_output_basis(sys, grid, cache, anchor=anchor)
    terminal_map, x_free = _terminal_affine_map(sys, grid, cache)
    M = terminal_map @ basis

    col_scale = np.linalg.norm(M, axis=0)
    col_scale = np.where(col_scale > 0.0, col_scale, 1.0)
    scaled = M / col_scale
    row_scale = np.linalg.norm(scaled, axis=1)
    row_scale = np.where(row_scale > 0.0, row_scale, 1.0)
    scaled = scaled / row_scale[:, None]
    condition = float(np.linalg.cond(scaled))
    if not math.isfinite(condition) or condition > CONDITION_LIMIT:
        raise ControllabilityError("system not controllable on this grid")
    lu = scipy.linalg.lu_factor(scaled)

    for arr in (basis, terminal_map, x_free, M, row_scale, col_scale):
        arr.flags.writeable = False
    return ShootingOperator(
        sys=sys,
        grid=grid,
        cache=cache,
        basis=basis,
        terminal_map=terminal_map,
        x_free=x_free,
        M=M,
        lu=lu,
        row_scale=row_scale,
        col_scale=col_scale,
        condition=condition,
        anchor=anchor,
    )


def project_affine_shooting(op: ShootingOperator, u: Signal) -> Signal:
    """Remove the terminal defect of u by an adjoint-output correction.

    Solves M q = (terminal state of u) - xf and returns u minus the
    corresponding combination of basis signals; one iterative-refinement pass
    keeps the restored terminal state at roundoff level.
    """
    defect = op.terminal_state(u) - op.sys.xf
    q = op.solve_correction(defect)
    q += op.solve_correction(defect - op.M @ q)
    return Signal(u.grid, u.values - op.basis @ q)


def min_norm_control(projector) -> Signal:
    """Projection of the zero signal: the minimum-norm feasible control."""
    return projector.min_norm()
