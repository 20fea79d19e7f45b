"""Uniform time grids and sampled signals with the L2 machinery used everywhere else.

Signals are scalar-valued functions of time stored as node samples on a
uniform grid and interpreted as piecewise linear between nodes.  Trajectories
are their vector-valued counterparts.  All values are immutable; arithmetic
returns fresh objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "TimeGrid",
    "Signal",
    "Trajectory",
    "inner_product",
    "norm_l2",
    "norm_linf",
]


@dataclass(frozen=True)
class TimeGrid:
    """N+1 equally spaced nodes on [t_start, t_final].

    Nodes are generated with ``np.linspace`` so both endpoints are exact; no
    drift from repeated addition of the step.
    """

    n_intervals: int
    t_final: float = 1.0
    t_start: float = 0.0

    def __post_init__(self):
        if self.n_intervals < 2:
            raise ValueError("grid needs at least 2 intervals")
        if not (self.t_final > self.t_start):
            raise ValueError("t_final must exceed t_start")
        if not (math.isfinite(self.t_start) and math.isfinite(self.t_final)):
            raise ValueError("grid endpoints must be finite")

    @property
    def h(self) -> float:
        return (self.t_final - self.t_start) / self.n_intervals

    @property
    def n_nodes(self) -> int:
        return self.n_intervals + 1

    @property
    def nodes(self) -> np.ndarray:
        nodes = np.linspace(self.t_start, self.t_final, self.n_nodes)
        nodes.flags.writeable = False
        return nodes

    @property
    def quadrature_weights(self) -> np.ndarray:
        """Composite trapezoid weights: h*(1/2, 1, ..., 1, 1/2)."""
        w = np.full(self.n_nodes, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        w.flags.writeable = False
        return w


def _as_locked(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal values must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Scalar signal sampled on a grid, one value per node."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_locked(self.values, (self.grid.n_nodes,)))

    @classmethod
    def zeros(cls, grid: TimeGrid) -> "Signal":
        return cls(grid, np.zeros(grid.n_nodes))

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "Signal":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    def _require_same_grid(self, other: "Signal") -> None:
        if self.grid != other.grid:
            raise GridMismatchError("incompatible grids")

    def __add__(self, other: "Signal") -> "Signal":
        self._require_same_grid(other)
        return Signal(self.grid, self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        self._require_same_grid(other)
        return Signal(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Signal":
        return Signal(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Signal":
        return Signal(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Vector-valued function of time: one n-vector per grid node."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != self.grid.n_nodes:
            raise ValueError("trajectory needs one state vector per grid node")
        if not np.all(np.isfinite(arr)):
            raise ValueError("trajectory values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]

    def component(self, i: int) -> Signal:
        return Signal(self.grid, self.values[:, i])


def inner_product(a: Signal, b: Signal) -> float:
    """Trapezoidal approximation of the L2 pairing of two signals.

    Exact whenever the product a*b is piecewise linear on the grid, in
    particular when either factor is constant and the other piecewise linear.
    """
    a._require_same_grid(b)
    return float(np.dot(a.grid.quadrature_weights, a.values * b.values))


def norm_l2(a: Signal) -> float:
    return math.sqrt(max(inner_product(a, a), 0.0))


def norm_linf(a: Signal) -> float:
    """Largest absolute node value (no inter-node interpolation)."""
    return float(np.max(np.abs(a.values)))
