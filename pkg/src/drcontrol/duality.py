"""Prox operators, dual integrands, and the Fenchel duality gap.

The primal objective is the box-constrained weighted energy (r/2)*||u||^2.
Its prox is a scaled clamp; the prox of the dynamics constraint is the affine
projection.  The dual objective integrates a three-branch piecewise-quadratic
density of the dual signal and subtracts its pairing with the minimum-norm
feasible control, which stands in for the boundary term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import LtiSystem
from .signals import Signal, inner_product

__all__ = [
    "prox_energy",
    "prox_affine",
    "dual_integrand",
    "dual_integrand_adjoint",
    "primal_objective",
    "dual_objective",
    "duality_gap",
    "ObjectivePair",
]


def prox_energy(sys: LtiSystem, u: Signal) -> Signal:
    """Prox of the weighted energy plus box indicator: clamp(u / (1 + r)).

    Branch boundaries land in the middle branch; the clamp makes that
    automatic since the formulas agree there.
    """
    scaled = u.values / (1.0 + sys.r)
    return Signal(u.grid, np.clip(scaled, sys.lower, sys.upper))


def prox_affine(projector, u: Signal) -> Signal:
    """Prox of the dynamics-constraint indicator: the affine projection."""
    return projector.project(u)


def dual_integrand(sys: LtiSystem, w):
    """Density of the dual objective at dual value(s) w.

    Piecewise: upper*w - r*upper^2/2 above r*upper, w^2/(2r) in the middle
    band, lower*w - r*lower^2/2 below r*lower.  Continuous and convex; the
    strict comparisons assign band edges to the middle branch, where the
    branch values coincide.
    """
    w = np.asarray(w, dtype=float)
    r, lo, up = sys.r, sys.lower, sys.upper
    out = np.where(
        w > r * up,
        up * w - r * up * up / 2.0,
        np.where(w < r * lo, lo * w - r * lo * lo / 2.0, w * w / (2.0 * r)),
    )
    return float(out) if out.ndim == 0 else out


def dual_integrand_adjoint(sys: LtiSystem, p: np.ndarray) -> tuple[float, np.ndarray]:
    """Dual density in adjoint coordinates and its gradient.

    Both are branch-selected by b^T p against [r*lower, r*upper]; the gradient
    is upper*b / b (b^T p)/r / lower*b on the respective branches.
    """
    p = np.asarray(p, dtype=float)
    s = float(sys.b @ p)
    r, lo, up = sys.r, sys.lower, sys.upper
    if s > r * up:
        return up * s - r * up * up / 2.0, up * sys.b
    if s < r * lo:
        return lo * s - r * lo * lo / 2.0, lo * sys.b
    return s * s / (2.0 * r), sys.b * (s / r)


def primal_objective(sys: LtiSystem, u: Signal) -> float:
    """(r/2) * squared L2 norm of the control."""
    return 0.5 * sys.r * inner_product(u, u)


def dual_objective(sys: LtiSystem, anchor: Signal, w: Signal) -> float:
    """Integral of the dual density minus the pairing with the anchor.

    ``anchor`` is the minimum-norm feasible control; for dual-feasible w the
    pairing equals the endpoint boundary term, so no adjoint trajectory needs
    to be reconstructed here.
    """
    density = dual_integrand(sys, w.values)
    return float(np.dot(w.grid.quadrature_weights, density)) - inner_product(anchor, w)


@dataclass(frozen=True)
class ObjectivePair:
    """Primal and dual objective values; their sum is the duality gap."""

    primal_value: float
    dual_value: float
    gap: float


def duality_gap(sys: LtiSystem, u: Signal, w: Signal, anchor: Signal) -> ObjectivePair:
    """Evaluate both objectives; the gap vanishes at an optimal pair."""
    primal = primal_objective(sys, u)
    dual = dual_objective(sys, anchor, w)
    return ObjectivePair(primal_value=primal, dual_value=dual, gap=primal + dual)
