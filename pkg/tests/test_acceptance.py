"""Acceptance suite: one test per acceptance criterion, stated tolerances.

Each criterion prints a single PASS/FAIL line (run with -s to see them on
success).  The manipulator iteration-count bracket is asserted exactly as
specified and is expected to fail; see the assertion message for the
analysis.
"""

import time

import numpy as np
import pytest

from drcontrol import (
    DoubleIntegratorProjector,
    DrConfig,
    LtiSystem,
    Signal,
    TimeGrid,
    adjoint_output,
    build,
    build_shooting,
    certify,
    dr_apply,
    dual_integrand,
    dual_objective,
    inner_product,
    min_norm_control,
    norm_l2,
    norm_linf,
    primal_objective,
    projected_gradient_solve,
    solve,
)
from drcontrol.oracle import _dykstra


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {status}: {name}{suffix}")


@pytest.fixture(scope="module")
def benchmark_run():
    sys_ = build("double-integrator")
    op = build_shooting(sys_, TimeGrid(1000))
    start = time.perf_counter()
    run = solve(sys_, op, DrConfig(gamma=0.75, epsilon=1e-8))
    elapsed = time.perf_counter() - start
    return sys_, op, run, elapsed


@pytest.fixture(scope="module")
def manipulator_run():
    sys_ = build("machine-tool-manipulator")
    op = build_shooting(sys_, TimeGrid(2000, t_final=sys_.t_final))
    start = time.perf_counter()
    run = solve(sys_, op, DrConfig(gamma=0.55, epsilon=1e-4))
    elapsed = time.perf_counter() - start
    return sys_, op, run, elapsed


def test_benchmark_reproduction(benchmark_run):
    _, _, run, elapsed = benchmark_run
    ok = run.converged and 80 <= run.iterations <= 250 and elapsed < 5.0
    _report("double-integrator reproduction", ok,
            f"iterations={run.iterations}, {elapsed:.2f}s")
    assert run.converged
    assert 80 <= run.iterations <= 250
    assert elapsed < 5.0


def test_benchmark_certificate(benchmark_run):
    sys_, op, run, _ = benchmark_run
    report = certify(sys_, op, run.u_affine, run.dual, run.fixed_point)
    u_scale = 1.0 + norm_linf(run.u_affine)
    checks = {
        "decomposition": report.phi_decomposition_residual <= 1e-6,
        "kkt": report.kkt_residual <= 1e-5 * u_scale,
        "dual_fit": report.dual_feasibility_residual <= 1e-5,
        "terminal": report.primal_terminal_residual <= 1e-6,
        "gap": abs(report.gap.gap) <= 1e-4 * (1.0 + abs(report.gap.primal_value)),
    }
    _report("double-integrator certificate", all(checks.values()), str(checks))
    assert report.phi_decomposition_residual <= 1e-6
    assert report.kkt_residual <= 1e-5 * u_scale
    assert report.dual_feasibility_residual <= 1e-5
    assert report.primal_terminal_residual <= 1e-6
    assert abs(report.gap.gap) <= 1e-4 * (1.0 + abs(report.gap.primal_value))
    assert report.verdict


def test_manipulator_reproduction(manipulator_run):
    sys_, op, run, elapsed = manipulator_run
    report = certify(sys_, op, run.u_affine, run.dual, run.fixed_point)
    kkt_ok = report.kkt_residual <= 1e-2 * (1.0 + norm_linf(run.u_affine))
    ok = run.converged and elapsed < 60.0 and kkt_ok
    _report("manipulator convergence, runtime, certificate", ok,
            f"iterations={run.iterations}, {elapsed:.1f}s, kkt={report.kkt_residual:.2e}")
    assert run.converged
    assert elapsed < 60.0
    assert kkt_ok


def test_manipulator_iteration_bracket(manipulator_run):
    _, _, run, _ = manipulator_run
    ok = 150 <= run.iterations <= 600
    _report("manipulator iteration bracket [150, 600]", ok,
            f"iterations={run.iterations}")
    assert 150 <= run.iterations <= 600, (
        f"iterations={run.iterations}, outside [150, 600]. The published count "
        "(249) is not a property of the printed problem data: with bounds "
        "+/-2000 the minimum-norm feasible control peaks near 594, so the box "
        "constraint is inactive and the splitting operator contracts linearly "
        "at rate gamma=0.55, converging in ~21 iterations at any grid "
        "resolution (verified at N=500..4000, and for the alternative horizon "
        "0.0522, which gives 26).  Reaching 150+ iterations requires bounds "
        "near +/-400, far from the printed data.  Forcing the bracket would "
        "mean degrading the affine projector, which the restore and "
        "equivalence criteria forbid."
    )


def test_projector_equivalence():
    sys_ = build("double-integrator")
    grid = TimeGrid(1000)
    shooting = build_shooting(sys_, grid)
    analytic = DoubleIntegratorProjector(sys_, grid)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        u = Signal(grid, rng.uniform(-1.0, 1.0, grid.n_nodes))
        worst = max(worst, norm_linf(analytic.project(u) - shooting.project(u)))
    _report("analytic vs shooting projector equivalence", worst <= 1e-6,
            f"worst={worst:.2e}")
    assert worst <= 1e-6


def test_oracle_agreement():
    sys_ = build("double-integrator")
    grid = TimeGrid(200)
    op = build_shooting(sys_, grid)
    oracle = projected_gradient_solve(sys_, grid, projector=op)
    run = solve(sys_, op, DrConfig(gamma=0.75, epsilon=1e-8))
    dr_objective = run.records[-1].primal_objective
    rel = abs(dr_objective - oracle.objective) / abs(oracle.objective)

    scalar = LtiSystem(A=[[0.0]], b=[1.0], r=1.0, lower=-2.0, upper=2.0,
                       x0=[0.0], xf=[1.0])
    scalar_result = projected_gradient_solve(scalar, TimeGrid(200))
    scalar_err = abs(scalar_result.objective - 0.5)

    ok = rel <= 1e-3 and scalar_err <= 1e-6
    _report("oracle agreement", ok, f"rel={rel:.2e}, scalar_err={scalar_err:.2e}")
    assert oracle.converged
    assert rel <= 1e-3
    assert scalar_err <= 1e-6


def test_property_suites():
    sys_ = build("double-integrator")
    grid = TimeGrid(1000)
    op = build_shooting(sys_, grid)
    rng = np.random.default_rng(77)

    def rand(g, scale=1.0):
        return Signal(g, rng.uniform(-scale, scale, g.n_nodes))

    # Gramian example
    expected = np.array([[-1.0 / 6.0, 0.5], [-0.5, 1.0]])
    assert np.max(np.abs(op.M - expected)) <= 1e-6

    # idempotence and nonexpansiveness of both projectors
    from drcontrol import project_box

    for _ in range(20):
        u, v = rand(grid, 3.0), rand(grid, 3.0)
        pu = op.project(u)
        assert norm_linf(op.project(pu) - pu) <= 1e-8
        bu = project_box(sys_, u)
        assert np.array_equal(project_box(sys_, bu).values, bu.values)
        assert norm_l2(op.project(u) - op.project(v)) <= norm_l2(u - v) * (1 + 1e-12) + 1e-12
        assert norm_l2(project_box(sys_, u) - project_box(sys_, v)) <= norm_l2(u - v) + 1e-12

    # minimum-norm control orthogonality and adjoint-output orthogonality on
    # a fine verification grid (the properties hold to discretization order)
    fine = TimeGrid(16000)
    fine_op = build_shooting(sys_, fine)
    anchor = min_norm_control(fine_op)
    na = norm_l2(anchor)
    for _ in range(40):
        d = fine_op.project(rand(fine)) - fine_op.project(rand(fine))
        assert abs(inner_product(anchor, d)) <= 1e-7 * na * norm_l2(d)
        w = adjoint_output(sys_, rng.normal(size=2), fine)
        assert abs(inner_product(w, d)) <= 1e-7 * norm_l2(w) * norm_l2(d)

    # firm nonexpansiveness of the splitting operator
    for _ in range(20):
        u, v = rand(grid, 3.0), rand(grid, 3.0)
        du = dr_apply(sys_, op, 0.75, u) - dr_apply(sys_, op, 0.75, v)
        assert inner_product(du, du) <= inner_product(du, u - v) + 1e-9

    # adjoint pairing identity on a generic system
    from drcontrol import propagate_adjoint, propagate_state

    gen = LtiSystem(A=np.array([[0.0, 1.0, 0.0], [-1.0, -0.3, 0.5], [0.2, 0.0, -0.7]]),
                    b=[0.0, 1.0, 0.5], r=1.0, lower=-9, upper=9,
                    x0=[0.3, -0.1, 0.2], xf=np.zeros(3))
    pairing_grid = TimeGrid(1000)
    u = Signal.from_function(pairing_grid, lambda t: np.sin(3 * t) - 0.4 * np.cos(5 * t))
    lam0 = np.array([0.5, -1.0, 0.25])
    x = propagate_state(gen, u)
    lam = propagate_adjoint(gen, lam0, pairing_grid)
    lhs = float(x.terminal @ lam.terminal - x.values[0] @ lam.values[0])
    rhs = inner_product(u, adjoint_output(gen, lam0, pairing_grid))
    assert lhs == pytest.approx(rhs, abs=5e-6 * (1 + abs(lhs)))

    # convexity of the dual density
    for _ in range(200):
        a, b = rng.uniform(-6, 6, size=2)
        mid = dual_integrand(sys_, 0.5 * (a + b))
        assert mid <= 0.5 * (dual_integrand(sys_, a) + dual_integrand(sys_, b)) + 1e-12

    # weak duality on feasible/dual-feasible pairs
    small = TimeGrid(200)
    small_op = build_shooting(sys_, small)
    small_anchor = min_norm_control(small_op)
    for _ in range(5):
        feasible = _dykstra(sys_, small_op, rand(small, 2.0), 3000)
        w = adjoint_output(sys_, rng.normal(size=2), small)
        total = primal_objective(sys_, feasible) + dual_objective(sys_, small_anchor, w)
        assert total >= -1e-6

    _report("property suites", True)
