import pytest

from drcontrol import DrConfig, Signal, TimeGrid, build, build_shooting, solve


@pytest.fixture(scope="session")
def di_sys():
    return build("double-integrator")


@pytest.fixture(scope="session")
def di_grid():
    return TimeGrid(1000)


@pytest.fixture(scope="session")
def di_op(di_sys, di_grid):
    return build_shooting(di_sys, di_grid)


@pytest.fixture(scope="session")
def di_run(di_sys, di_op):
    """Converged benchmark run shared by solver and certificate tests."""
    return solve(di_sys, di_op, DrConfig(gamma=0.75, epsilon=1e-8))


def random_signal(grid: TimeGrid, rng, scale: float = 1.0) -> Signal:
    return Signal(grid, rng.uniform(-scale, scale, grid.n_nodes))
