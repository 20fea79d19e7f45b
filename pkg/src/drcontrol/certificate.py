"""Optimality certificate for a numerical primal-dual-fixed-point triple.

A solution is certified by reconstructing the adjoint representation of the
dual signal, rebuilding the fixed point from it through the three-branch
formula, and checking every optimality residual: the fixed-point
decomposition, dual feasibility, primal feasibility at both endpoints, the
clamp relation between primal and dual, and the duality gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dynamics import (
    LtiSystem,
    adjoint_output,
    adjoint_output_basis,
    build_transition_cache,
    choose_adjoint_anchor,
    propagate_state,
)
from .duality import ObjectivePair, duality_gap
from .errors import DualRepresentationError
from .projections import CONDITION_LIMIT, min_norm_control, project_box
from .signals import Signal, TimeGrid, norm_l2, norm_linf

__all__ = [
    "CertificateTolerances",
    "dual_adjoint_fit",
    "CheckResult",
    "CertificateReport",
    "AdjointFit",
    "fit_adjoint",
    "rebuild_fixed_point",
    "certify",
]


@dataclass(frozen=True)
class CertificateTolerances:
    """Per-check tolerances.  Norm-dependent checks scale with (1 + norm)."""

    decomposition: float = 1e-6
    dual_fit: float = 1e-5
    terminal: float = 1e-6
    box: float = 1e-8
    kkt: float = 1e-5
    rebuild: float = 1e-6
    gap: float = 1e-4


@dataclass(frozen=True)
class CheckResult:
    value: float
    tolerance: float
    passed: bool


@dataclass(frozen=True, eq=False)
class AdjointFit:
    """Least-squares representation of a signal in the adjoint output family."""

    p0: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    anchor: str
    basis: np.ndarray = field(repr=False)
    fitted: Signal = field(repr=False)
    residual: float

    def adjoint_trajectory(self, sys: LtiSystem, cache) -> np.ndarray:
        """Node values of p(t) for the fitted flow, advanced from the anchor."""
        n_nodes = self.basis.shape[0]
        out = np.empty((n_nodes, sys.n))
        if self.anchor == "initial":
            step = cache.interval_adjoint
            p = self.coefficients.copy()
            out[0] = p
            for i in range(n_nodes - 1):
                p = step @ p
                out[i + 1] = p
        else:
            step = cache.interval.T  # exp(A^T h), stable toward t = 0
            p = self.coefficients.copy()
            out[-1] = p
            for i in range(n_nodes - 2, -1, -1):
                p = step @ p
                out[i] = p
        return out


def dual_adjoint_fit(sys: LtiSystem, w: Signal, cache=None) -> AdjointFit:
    grid = w.grid
    if cache is None:
        cache = build_transition_cache(sys, grid)
    anchor = choose_adjoint_anchor(sys)
    basis = adjoint_output_basis(sys, grid, cache, anchor=anchor)

    weights = grid.quadrature_weights
    scale = np.sqrt(np.einsum("i,ij,ij->j", weights, basis, basis))
    scale = np.where(scale > 0.0, scale, 1.0)
    scaled = basis / scale
    gram = scaled.T @ (weights[:, None] * scaled)
    condition = float(np.linalg.cond(gram))
    if not math.isfinite(condition) or condition > CONDITION_LIMIT:
        raise DualRepresentationError("dual representation ill-posed")
    rhs = scaled.T @ (weights * w.values)
    coeffs = np.linalg.solve(gram, rhs) / scale

    fitted = Signal(grid, basis @ coeffs)
    residual = norm_l2(w - fitted) / (1.0 + norm_l2(w))
    if anchor == "initial":
        p0 = coeffs.copy()
    else:
        p0 = scipy.linalg.expm(sys.A.T * sys.t_final) @ coeffs
    return AdjointFit(
        p0=p0,
        coefficients=coeffs,
        anchor=anchor,
        basis=basis,
        fitted=fitted,
        residual=residual,
    )


def fit_adjoint(sys: LtiSystem, w: Signal) -> tuple[np.ndarray, float]:
    """Best adjoint-flow representation of w: initial value p(0) and the
    relative L2 misfit."""
    fit = dual_adjoint_fit(sys, w)
    return fit.p0, fit.residual


def _rebuild_from_dual_values(sys: LtiSystem, z: np.ndarray) -> np.ndarray:
    """Fixed-point values from dual values z: upper+z / (1+r)z/r / lower+z."""
    r, lo, up = sys.r, sys.lower, sys.upper
    return np.where(
        z > r * up,
        up + z,
        np.where(z < r * lo, lo + z, (1.0 + r) * z / r),
    )


def rebuild_fixed_point(sys: LtiSystem, lambda0: np.ndarray, grid: TimeGrid) -> Signal:
    """Fixed point implied by a costate initial value.

    With z = -b^T lambda along the costate flow, the fixed point is upper+z
    above the band, (1+r)z/r inside, lower+z below; by construction it splits
    into the clamped primal plus the dual part.
    """
    z = -adjoint_output(sys, lambda0, grid).values
    return Signal(grid, _rebuild_from_dual_values(sys, z))


@dataclass(frozen=True, eq=False)
class CertificateReport:
    """All optimality residuals for one candidate triple plus the verdict."""

    phi_decomposition_residual: float
    dual_feasibility_residual: float
    primal_terminal_residual: float
    box_violation: float
    kkt_residual: float
    reconstructed_phi_residual: float
    gap: ObjectivePair
    checks: dict[str, CheckResult]
    verdict: bool
    p0: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "phi_decomposition_residual": self.phi_decomposition_residual,
            "dual_feasibility_residual": self.dual_feasibility_residual,
            "primal_terminal_residual": self.primal_terminal_residual,
            "box_violation": self.box_violation,
            "kkt_residual": self.kkt_residual,
            "reconstructed_phi_residual": self.reconstructed_phi_residual,
            "primal_objective": self.gap.primal_value,
            "dual_objective": self.gap.dual_value,
            "duality_gap": self.gap.gap,
            "p0": [float(v) for v in self.p0],
            "checks": {
                name: {"value": c.value, "tolerance": c.tolerance, "passed": c.passed}
                for name, c in self.checks.items()
            },
            "verdict": "pass" if self.verdict else "fail",
        }

    def to_text(self) -> str:
        lines = [
            f"phi_decomposition_residual={self.phi_decomposition_residual:.17g}",
            f"dual_feasibility_residual={self.dual_feasibility_residual:.17g}",
            f"primal_terminal_residual={self.primal_terminal_residual:.17g}",
            f"box_violation={self.box_violation:.17g}",
            f"kkt_residual={self.kkt_residual:.17g}",
            f"reconstructed_phi_residual={self.reconstructed_phi_residual:.17g}",
            f"primal_objective={self.gap.primal_value:.17g}",
            f"dual_objective={self.gap.dual_value:.17g}",
            f"duality_gap={self.gap.gap:.17g}",
        ]
        for name, check in self.checks.items():
            status = "pass" if check.passed else "fail"
            lines.append(f"check_{name}={status} value={check.value:.6g} tol={check.tolerance:.6g}")
        lines.append(f"verdict={'pass' if self.verdict else 'fail'}")
        return "\n".join(lines)


def certify(
    sys: LtiSystem,
    projector,
    u: Signal,
    w: Signal,
    phi: Signal,
    tolerances: CertificateTolerances | None = None,
) -> CertificateReport:
    """Evaluate every optimality residual for the triple (u, w, phi).

    Failing checks fail the verdict, not the call; only an unfittable dual
    raises.
    """
    tol = tolerances or CertificateTolerances()
    grid = u.grid
    if w.grid != grid or phi.grid != grid:
        raise ValueError("u, w, phi must share one grid")

    decomposition = norm_linf(phi - (u + w))

    cache = getattr(projector, "cache", None)
    fit = dual_adjoint_fit(sys, w, cache)
    phi_rebuilt = Signal(grid, _rebuild_from_dual_values(sys, fit.fitted.values))
    reconstructed = norm_linf(phi - phi_rebuilt)

    trajectory = propagate_state(sys, u, cache=cache)
    terminal = float(np.linalg.norm(trajectory.terminal - sys.xf))

    over = float(np.max(u.values - sys.upper, initial=0.0))
    under = float(np.max(sys.lower - u.values, initial=0.0))
    box_violation = max(0.0, over, under)

    kkt = norm_linf(u - project_box(sys, (1.0 / sys.r) * w))

    gap = duality_gap(sys, u, w, anchor=min_norm_control(projector))

    u_scale = 1.0 + norm_linf(u)
    phi_scale = 1.0 + norm_linf(phi)
    checks = {
        "phi_decomposition": CheckResult(
            decomposition, tol.decomposition * phi_scale, decomposition <= tol.decomposition * phi_scale
        ),
        "dual_feasibility": CheckResult(fit.residual, tol.dual_fit, fit.residual <= tol.dual_fit),
        "primal_terminal": CheckResult(
            terminal,
            tol.terminal * (1.0 + float(np.linalg.norm(sys.xf))),
            terminal <= tol.terminal * (1.0 + float(np.linalg.norm(sys.xf))),
        ),
        "box": CheckResult(box_violation, tol.box * u_scale, box_violation <= tol.box * u_scale),
        "kkt": CheckResult(kkt, tol.kkt * u_scale, kkt <= tol.kkt * u_scale),
        "phi_reconstruction": CheckResult(
            reconstructed, tol.rebuild * phi_scale, reconstructed <= tol.rebuild * phi_scale
        ),
        "duality_gap": CheckResult(
            abs(gap.gap),
            tol.gap * (1.0 + abs(gap.primal_value)),
            abs(gap.gap) <= tol.gap * (1.0 + abs(gap.primal_value)),
        ),
    }
    verdict = all(c.passed for c in checks.values())
    return CertificateReport(
        phi_decomposition_residual=decomposition,
        dual_feasibility_residual=fit.residual,
        primal_terminal_residual=terminal,
        box_violation=box_violation,
        kkt_residual=kkt,
        reconstructed_phi_residual=reconstructed,
        gap=gap,
        checks=checks,
        verdict=verdict,
        p0=fit.p0,
    )
