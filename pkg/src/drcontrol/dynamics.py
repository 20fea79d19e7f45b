"""Linear time-invariant dynamics: forward state flow and adjoint flow.

Propagation is exact for the piecewise-linear interpolant of the sampled
control: each grid interval is advanced with precomputed exponential maps, so
the only discretization error left is the O(h^2) interpolation of the control
itself.  The exponentials are assembled from substeps small enough that the
matrix exponential is comfortably accurate even for stiff systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DynamicsOverflowError, GridMismatchError
from .signals import Signal, TimeGrid, Trajectory

__all__ = [
    "LtiSystem",
    "TransitionCache",
    "build_transition_cache",
    "propagate_state",
    "propagate_adjoint",
    "adjoint_output",
]

# Substeps are sized so that norm1(A) * h_sub stays below this bound.
SUBSTEP_NORM_BOUND = 0.5

# Beyond this value of norm1(A) * t_final the initial-time adjoint anchoring
# can overflow doubles for a stable system, so anchoring switches to the
# terminal time (same signal family, propagated in the stable direction).
STIFF_ANCHOR_THRESHOLD = 20.0


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """One control-constrained minimum-energy problem instance.

    dx/dt = A x + b u on [0, t_final], x(0) = x0, x(t_final) = xf,
    lower <= u(t) <= upper, objective (r/2) * integral of u^2.
    """

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    r: float
    lower: float
    upper: float
    x0: np.ndarray = field(repr=False)
    xf: np.ndarray = field(repr=False)
    t_final: float = 1.0

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be a square matrix")
        n = A.shape[0]
        if b.shape != (n,):
            raise ValueError(f"b must have length {n}, got {b.shape[0]}")
        x0 = np.array(self.x0, dtype=float).reshape(-1)
        xf = np.array(self.xf, dtype=float).reshape(-1)
        if x0.shape != (n,):
            raise ValueError(f"x0 must have length {n}, got {x0.shape[0]}")
        if xf.shape != (n,):
            raise ValueError(f"xf must have length {n}, got {xf.shape[0]}")
        for name, arr in (("A", A), ("b", b), ("x0", x0), ("xf", xf)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if not np.any(b != 0.0):
            raise ValueError("b must not be the zero vector")
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError("weight r must be positive")
        if not (self.lower < self.upper):
            raise ValueError("bounds must satisfy lower < upper")
        if not (math.isfinite(self.t_final) and self.t_final > 0.0):
            raise ValueError("t_final must be positive")
        for name, arr in (("A", A), ("b", b), ("x0", x0), ("xf", xf)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def default_gamma(self) -> float:
        return 1.0 / (1.0 + self.r)

    def grid(self, n_intervals: int) -> TimeGrid:
        return TimeGrid(n_intervals, t_final=self.t_final)


@dataclass(frozen=True, eq=False)
class TransitionCache:
    """Precomputed exponential maps for one (system, grid) pair.

    ``step`` / ``step_adjoint`` advance one substep of the state / adjoint
    flow.  ``interval`` together with ``in_left`` / ``in_right`` advance one
    full grid interval under a control that is linear across the interval:

        x_next = interval @ x + in_left * u_i + in_right * u_{i+1}
    """

    grid: TimeGrid
    n_sub: int
    h_sub: float
    step: np.ndarray = field(repr=False)
    step_adjoint: np.ndarray = field(repr=False)
    interval: np.ndarray = field(repr=False)
    interval_adjoint: np.ndarray = field(repr=False)
    in_left: np.ndarray = field(repr=False)
    in_right: np.ndarray = field(repr=False)


def _input_maps(A: np.ndarray, b: np.ndarray, tau: float):
    """Exponential step plus input weights for a linear control over [0, tau].

    Uses the augmented-matrix trick: exponentiating
        [[A, b, 0], [0, 0, 1], [0, 0, 0]] * tau
    yields exp(A tau) and the integrals of exp(A (tau-s)) b against 1 and s.
    """
    n = A.shape[0]
    aug = np.zeros((n + 2, n + 2))
    aug[:n, :n] = A
    aug[:n, n] = b
    aug[n, n + 1] = 1.0
    big = scipy.linalg.expm(aug * tau)
    step = big[:n, :n]
    phi1 = big[:n, n]          # integral of exp(A(tau-s)) b ds
    phi2 = big[:n, n + 1]      # integral of exp(A(tau-s)) s b ds
    g_right = phi2 / tau
    g_left = phi1 - g_right
    return step, g_left, g_right


def build_transition_cache(sys: LtiSystem, grid: TimeGrid) -> TransitionCache:
    h = grid.h
    norm1 = float(np.abs(sys.A).sum(axis=0).max()) if sys.n else 0.0
    n_sub = max(1, int(math.ceil(norm1 * h / SUBSTEP_NORM_BOUND)))
    h_sub = h / n_sub

    step, g_left, g_right = _input_maps(sys.A, sys.b, h_sub)
    step_adjoint = scipy.linalg.expm(-sys.A.T * h_sub)

    eye = np.eye(sys.n)
    round_trip = step @ scipy.linalg.expm(-sys.A * h_sub) - eye
    if not np.all(np.isfinite(step)) or np.max(np.abs(round_trip)) > 1e-10:
        raise DynamicsOverflowError(
            "dynamics overflow: matrix exponential round-trip failed at the substep size"
        )

    # Compose the substeps into one affine map per grid interval.  The control
    # is linear across the interval, so the substep endpoint values are convex
    # combinations of the interval endpoint values.
    interval = eye
    d_left = np.zeros(sys.n)
    d_right = np.zeros(sys.n)
    for j in range(n_sub):
        th0 = j / n_sub
        th1 = (j + 1) / n_sub
        d_left = step @ d_left + g_left * (1.0 - th0) + g_right * (1.0 - th1)
        d_right = step @ d_right + g_left * th0 + g_right * th1
        interval = step @ interval

    interval_adjoint = np.linalg.matrix_power(step_adjoint, n_sub)

    for arr in (step, step_adjoint, interval, interval_adjoint, d_left, d_right):
        arr.flags.writeable = False
    return TransitionCache(
        grid=grid,
        n_sub=n_sub,
        h_sub=h_sub,
        step=step,
        step_adjoint=step_adjoint,
        interval=interval,
        interval_adjoint=interval_adjoint,
        in_left=d_left,
        in_right=d_right,
    )


def _check_grid(sys: LtiSystem, grid: TimeGrid) -> None:
    if grid.t_start != 0.0 or not math.isclose(grid.t_final, sys.t_final, rel_tol=1e-12, abs_tol=0.0):
        raise GridMismatchError("incompatible grids: signal grid does not span [0, t_final]")


def propagate_state(
    sys: LtiSystem,
    u: Signal,
    x_init: np.ndarray | None = None,
    cache: TransitionCache | None = None,
) -> Trajectory:
    """Integrate dx/dt = A x + b u from x_init across u's grid.

    The control is interpolated linearly between nodes and each interval is
    advanced by the cached exponential maps, so the result is the exact flow
    of the interpolated control up to roundoff.
    """
    _check_grid(sys, u.grid)
    if cache is None:
        cache = build_transition_cache(sys, u.grid)
    x = np.asarray(sys.x0 if x_init is None else x_init, dtype=float).reshape(sys.n)
    uv = u.values
    out = np.empty((u.grid.n_nodes, sys.n))
    out[0] = x
    E, dl, dr = cache.interval, cache.in_left, cache.in_right
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(u.grid.n_intervals):
            x = E @ x + dl * uv[i] + dr * uv[i + 1]
            out[i + 1] = x
    if not np.all(np.isfinite(out)):
        raise DynamicsOverflowError("dynamics overflow")
    return Trajectory(u.grid, out)


def propagate_adjoint(
    sys: LtiSystem,
    lambda0: np.ndarray,
    grid: TimeGrid,
    cache: TransitionCache | None = None,
) -> Trajectory:
    """Integrate the costate flow dl/dt = -A^T l from l(0) = lambda0."""
    _check_grid(sys, grid)
    if cache is None:
        cache = build_transition_cache(sys, grid)
    lam = np.asarray(lambda0, dtype=float).reshape(sys.n)
    out = np.empty((grid.n_nodes, sys.n))
    out[0] = lam
    E = cache.interval_adjoint
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(grid.n_intervals):
            lam = E @ lam
            out[i + 1] = lam
    if not np.all(np.isfinite(out)):
        raise DynamicsOverflowError("dynamics overflow")
    return Trajectory(grid, out)


def adjoint_output(
    sys: LtiSystem,
    lambda0: np.ndarray,
    grid: TimeGrid,
    cache: TransitionCache | None = None,
) -> Signal:
    """The scalar signal t -> b^T lambda(t) along the costate flow."""
    traj = propagate_adjoint(sys, lambda0, grid, cache)
    return Signal(grid, traj.values @ sys.b)


def choose_adjoint_anchor(sys: LtiSystem) -> str:
    """Anchor time for representing adjoint flows: initial unless stiff."""
    norm1 = float(np.abs(sys.A).sum(axis=0).max())
    return "terminal" if norm1 * sys.t_final > STIFF_ANCHOR_THRESHOLD else "initial"


def adjoint_output_basis(
    sys: LtiSystem,
    grid: TimeGrid,
    cache: TransitionCache | None = None,
    anchor: str = "initial",
) -> np.ndarray:
    """Node samples of the n basis signals spanning all adjoint outputs.

    Column j samples t -> b^T p(t) for the costate flow whose value at the
    anchor time is the j-th unit vector.  ``anchor="initial"`` pins p(0) and
    follows the flow forward; ``anchor="terminal"`` pins p(t_final) and fills
    the nodes backward.  Both spans coincide; the terminal anchoring is the
    numerically safe one when the backward flow of a stiff stable system
    would overflow.
    """
    _check_grid(sys, grid)
    if cache is None:
        cache = build_transition_cache(sys, grid)
    out = np.empty((grid.n_nodes, sys.n))
    if anchor == "initial":
        # b^T exp(-A^T t) e_j = [exp(-A t) b]_j; one interval per step.
        back = cache.interval_adjoint.T
        row = sys.b.copy()
        out[0] = row
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(grid.n_intervals):
                row = back @ row
                out[i + 1] = row
    elif anchor == "terminal":
        # b^T exp(A^T (t_final - t)) e_j = [exp(A (t_final - t)) b]_j.
        row = sys.b.copy()
        out[-1] = row
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(grid.n_intervals - 1, -1, -1):
                row = cache.interval @ row
                out[i] = row
    else:
        raise ValueError(f"unknown anchor {anchor!r}")
    if not np.all(np.isfinite(out)):
        raise DynamicsOverflowError("dynamics overflow")
    return out
