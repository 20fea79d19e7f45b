import numpy as np
import pytest

from drcontrol import (
    ControllabilityError,
    DoubleIntegratorProjector,
    LtiSystem,
    ProjectorUnavailableError,
    Signal,
    TimeGrid,
    adjoint_output,
    build,
    build_shooting,
    inner_product,
    min_norm_control,
    norm_l2,
    norm_linf,
    project_affine_di,
    project_box,
    propagate_state,
)

from conftest import random_signal


def scalar_system():
    return LtiSystem(A=[[0.0]], b=[1.0], r=1.0, lower=-2.0, upper=2.0, x0=[0.0], xf=[1.0])


# ---------------------------------------------------------------- box


def test_project_box_clamps(di_sys, di_grid):
    high = Signal.from_function(di_grid, lambda t: 3.0 * np.ones_like(t))
    assert np.all(project_box(di_sys, high).values == 2.5)

    inside = Signal.from_function(di_grid, lambda t: np.sin(t))
    assert np.array_equal(project_box(di_sys, inside).values, inside.values)

    ramp = Signal.from_function(di_grid, lambda t: 6 * t - 4)
    expected = np.clip(6 * di_grid.nodes - 4, -2.5, 2.5)
    assert np.array_equal(project_box(di_sys, ramp).values, expected)


# ---------------------------------------------------------------- analytic projector


def test_affine_di_zero_input(di_sys, di_grid):
    out = project_affine_di(di_sys, Signal.zeros(di_grid))
    # c1 = 12*(0+1-0) - 6*(1-0) = 6, c2 = -6*(1) + 2*(1) = -4
    assert np.max(np.abs(out.values - (6 * di_grid.nodes - 4))) < 1e-12


def test_affine_di_fixes_members(di_sys, di_grid):
    rng = np.random.default_rng(2)
    member = project_affine_di(di_sys, random_signal(di_grid, rng))
    again = project_affine_di(di_sys, member)
    assert norm_linf(again - member) <= 1e-8


def test_affine_di_trivial_endpoints(di_grid):
    sys_ = build("double-integrator", x0=[0.0, 0.0], xf=[0.0, 0.0])
    out = project_affine_di(sys_, Signal.zeros(di_grid))
    assert norm_linf(out) < 1e-14


def test_affine_di_rejects_other_systems():
    with pytest.raises(ProjectorUnavailableError, match="analytic projector unavailable"):
        project_affine_di(scalar_system(), Signal.zeros(TimeGrid(10)))


# ---------------------------------------------------------------- shooting


def test_shooting_matrix_double_integrator(di_op):
    expected = np.array([[-1.0 / 6.0, 0.5], [-0.5, 1.0]])
    assert np.max(np.abs(di_op.M - expected)) < 1e-6
    assert di_op.anchor == "initial"


def test_shooting_matrix_scalar():
    sys_ = scalar_system()
    op = build_shooting(sys_, TimeGrid(100))
    assert op.M[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert op.M.shape == (1, 1)


def test_shooting_rejects_uncontrollable():
    # second state is unreachable and has mismatched endpoints
    sys_ = LtiSystem(A=np.zeros((2, 2)), b=[1.0, 0.0], r=1.0, lower=-2, upper=2,
                     x0=[0.0, 0.0], xf=[1.0, 1.0])
    with pytest.raises(ControllabilityError, match="not controllable"):
        build_shooting(sys_, TimeGrid(50))


def test_shooting_zero_input_projection(di_sys, di_op, di_grid):
    out = di_op.project(Signal.zeros(di_grid))
    assert np.max(np.abs(out.values - (6 * di_grid.nodes - 4))) < 1e-9


def test_shooting_fixes_members(di_op, di_grid):
    rng = np.random.default_rng(4)
    member = di_op.project(random_signal(di_grid, rng))
    again = di_op.project(member)
    assert norm_linf(again - member) <= 1e-8


def test_shooting_scalar_projection():
    sys_ = scalar_system()
    grid = TimeGrid(100)
    op = build_shooting(sys_, grid)
    out = op.project(Signal.zeros(grid))
    assert np.allclose(out.values, 1.0, atol=1e-12)


def test_shooting_column_consistency(di_sys, di_op, di_grid):
    # column j of M equals the negated terminal state reached under -sigma_j
    for j in range(di_sys.n):
        sigma_j = Signal(di_grid, di_op.basis[:, j])
        traj = propagate_state(di_sys, -1.0 * sigma_j, x_init=[0.0, 0.0])
        assert np.max(np.abs(di_op.M[:, j] + traj.terminal)) < 1e-9


def test_shooting_matches_nodal_quadrature(di_sys, di_op):
    # trapezoid quadrature of the defining integrand, kernel exp(A(tf-t)) b
    # against each basis signal, reproduces M to discretization accuracy
    from drcontrol.dynamics import adjoint_output_basis

    w = di_op.grid.quadrature_weights
    kernel = adjoint_output_basis(di_sys, di_op.grid, di_op.cache, anchor="terminal")
    m_quad = kernel.T @ (w[:, None] * di_op.basis)
    assert np.max(np.abs(m_quad - di_op.M)) < 1e-5


# ---------------------------------------------------------------- shared properties


@pytest.mark.parametrize("which", ["box", "affine"])
def test_nonexpansiveness(di_sys, di_op, di_grid, which):
    rng = np.random.default_rng(6)
    for _ in range(25):
        u = random_signal(di_grid, rng, 3.0)
        v = random_signal(di_grid, rng, 3.0)
        if which == "box":
            pu, pv = project_box(di_sys, u), project_box(di_sys, v)
        else:
            pu, pv = di_op.project(u), di_op.project(v)
        assert norm_l2(pu - pv) <= norm_l2(u - v) * (1 + 1e-12) + 1e-12


def test_feasibility_after_projection(di_sys, di_op, di_grid):
    rng = np.random.default_rng(8)
    for _ in range(5):
        u = random_signal(di_grid, rng, 2.0)
        proj = di_op.project(u)
        terminal = propagate_state(di_sys, proj, cache=di_op.cache).terminal
        assert np.linalg.norm(terminal - di_sys.xf) <= 1e-7 * (1 + np.linalg.norm(di_sys.xf))
        boxed = project_box(di_sys, u)
        assert np.all(boxed.values <= di_sys.upper) and np.all(boxed.values >= di_sys.lower)


def test_min_norm_orthogonal_to_directions(di_sys):
    # The correction directions are smooth adjoint outputs, so orthogonality
    # against the discrete kernel carries an O(h^2) floor; the fine grid keeps
    # the check an order of magnitude under the tolerance.
    grid = TimeGrid(16000)
    op = build_shooting(di_sys, grid)
    anchor = min_norm_control(op)
    na = norm_l2(anchor)
    rng = np.random.default_rng(42)
    for _ in range(60):
        d = op.project(random_signal(grid, rng)) - op.project(random_signal(grid, rng))
        assert abs(inner_product(anchor, d)) <= 1e-7 * na * norm_l2(d)


def test_adjoint_outputs_orthogonal_to_directions(di_sys):
    grid = TimeGrid(16000)
    op = build_shooting(di_sys, grid)
    rng = np.random.default_rng(43)
    for _ in range(30):
        w = adjoint_output(di_sys, rng.normal(size=2), grid)
        d = op.project(random_signal(grid, rng)) - op.project(random_signal(grid, rng))
        assert abs(inner_product(w, d)) <= 1e-7 * norm_l2(w) * norm_l2(d)


def test_projection_minus_base_is_linear(di_op, di_grid):
    rng = np.random.default_rng(10)
    base = di_op.project(Signal.zeros(di_grid))
    for _ in range(10):
        u = random_signal(di_grid, rng)
        v = random_signal(di_grid, rng)
        a, b = rng.normal(size=2)
        lhs = di_op.project(a * u + b * v) - base
        rhs = a * (di_op.project(u) - base) + b * (di_op.project(v) - base)
        scale = 1.0 + norm_linf(rhs)
        assert norm_linf(lhs - rhs) <= 1e-8 * scale


def test_analytic_and_shooting_agree(di_sys, di_op, di_grid):
    analytic = DoubleIntegratorProjector(di_sys, di_grid)
    rng = np.random.default_rng(12)
    for _ in range(100):
        u = random_signal(di_grid, rng)
        diff = analytic.project(u) - di_op.project(u)
        assert norm_linf(diff) <= 1e-6


def test_min_norm_examples(di_op, di_grid):
    anchor = min_norm_control(di_op)
    assert np.max(np.abs(anchor.values - (6 * di_grid.nodes - 4))) < 1e-9

    trivial = build("double-integrator", x0=[0.0, 0.0], xf=[0.0, 0.0])
    op = build_shooting(trivial, di_grid)
    assert norm_linf(min_norm_control(op)) < 1e-12

    sys_ = scalar_system()
    op = build_shooting(sys_, TimeGrid(100))
    assert np.allclose(min_norm_control(op).values, 1.0, atol=1e-12)
