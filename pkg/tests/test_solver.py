import math

import numpy as np
import pytest

from abcpiq import _kernels
from abcpiq.errors import DegenerateGridError, NonConvergenceError
from abcpiq.ladm import SeriesSolution, ladm_expand
from abcpiq.model import TABLE2, TABLE2_INIT, ModelParams, State
from abcpiq.solver import Grid, compare_series, solve_abc, solve_volterra
from abcpiq.thetapoly import ThetaPolynomial

from oracles import piq_rhs, rk4

RATES = tuple(TABLE2.get(n) for n in ("lambda", "gamma", "d0", "eta", "mu", "sigma", "h"))


@pytest.fixture(scope="module")
def rk4_table2_50():
    return rk4(piq_rhs(*RATES), TABLE2_INIT, 50.0, 50_000)


@pytest.mark.parametrize("theta", [0.3, 0.5, 0.7, 0.85, 1.0])
def test_kernel_moments_exact(theta):
    m = 2000
    C, W, B1 = _kernels.kernel_weights(theta, m)
    j = np.arange(1, m + 1)
    # sum of node weights for node j: C[j] + sum_{u=1}^{j-1} W[u] + B1
    totals = C[1:] + np.concatenate([[0.0], np.cumsum(W[1:m])]) + B1
    exact = j**theta / theta
    assert np.max(np.abs(totals / exact - 1.0)) <= 1e-12


def test_kernel_first_moment_theta_one_is_trapezoid():
    C, W, B1 = _kernels.kernel_weights(1.0, 5)
    assert B1 == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(C[1:], 0.5, atol=1e-15)
    assert np.allclose(W[1:], 1.0, atol=1e-15)


def test_kernel_large_distance_branch_continuous():
    # the series branch for distant cells must join the closed form smoothly
    C, W, _ = _kernels.kernel_weights(0.4, 40)
    ratio = W[2:] / W[1:-1]
    assert np.all(np.diff(ratio) > -1e-12)


def test_backend_parity():
    if not _kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    grid = Grid(20.0, 2000)
    a = solve_abc(TABLE2, TABLE2_INIT, 0.8, 1.0, grid, backend="numpy")
    b = solve_abc(TABLE2, TABLE2_INIT, 0.8, 1.0, grid, backend="numba")
    assert np.max(np.abs(a.states - b.states)) <= 1e-13
    assert np.array_equal(a.iterations, b.iterations)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("ABCPIQ_NO_NUMBA", "1")
    assert _kernels.default_backend() == "numpy"
    monkeypatch.setenv("ABCPIQ_NO_NUMBA", "0")
    assert _kernels.default_backend() == ("numba" if _kernels.HAVE_NUMBA else "numpy")


def test_theta_one_vs_rk4(rk4_table2_50, backend):
    ts, ref = rk4_table2_50
    traj = solve_abc(TABLE2, TABLE2_INIT, 1.0, 1.0, Grid(50.0, 5000), backend=backend)
    gap = np.max(np.abs(traj.states - ref[::10]), axis=0)
    assert np.all(gap <= 1e-4)


def test_refinement_is_second_order(rk4_table2_50, backend):
    ts, ref = rk4_table2_50
    errs = []
    for steps in (100, 200):
        traj = solve_abc(TABLE2, TABLE2_INIT, 1.0, 1.0, Grid(50.0, steps), backend=backend)
        errs.append(np.max(np.abs(traj.states - ref[:: 50_000 // steps])))
    assert errs[0] / errs[1] >= 3.0


@pytest.mark.parametrize("theta", [0.3, 0.75, 1.0])
def test_zero_field_constant(theta, backend):
    zero = ModelParams(0, 0, 0, 0, 0, 0, 0)
    traj = solve_abc(zero, TABLE2_INIT, theta, 1.0, Grid(10.0, 100), backend=backend)
    assert np.all(traj.states == np.array(TABLE2_INIT))
    assert traj.start == TABLE2_INIT


def test_states_start_and_diagnostics(backend):
    traj = solve_abc(TABLE2, TABLE2_INIT, 0.6, 1.0, Grid(5.0, 50), backend=backend)
    assert traj.state(0) == TABLE2_INIT
    assert traj.start != TABLE2_INIT
    assert len(traj) == 51
    assert traj.negative.shape == (51,) and not traj.negative.any()
    assert np.all(traj.iterations[1:] >= 1) and np.all(traj.iterations <= 50)


def test_scalar_decay_theta_one():
    states, _ = solve_volterra(lambda j, t, x: -x, [1.0], 1.0, 1.0, Grid(1.0, 100))
    assert abs(states[-1, 0] - math.exp(-1.0)) <= 1e-5


@pytest.mark.parametrize("theta", [0.5, 0.7, 0.9])
def test_scalar_decay_fractional(theta):
    states, start = solve_volterra(lambda j, t, x: -x, [1.0], theta, 1.0, Grid(5.0, 500))
    x = np.concatenate([start, states[1:, 0]])
    assert np.all(x > 0.0) and np.all(x <= 1.0)
    assert np.all(np.diff(x) < 0.0)


@pytest.mark.parametrize("theta", [0.55, 0.8, 1.0])
def test_sum_dynamics(theta):
    grid = Grid(30.0, 600)
    traj = solve_abc(TABLE2, TABLE2_INIT, theta, 1.0, grid)
    lam, d0, h, mu = TABLE2.lam, TABLE2.d0, TABLE2.h, TABLE2.mu
    iq = traj.states[:, 1:].copy()
    iq[0] = traj.start[1:]

    def field(j, t, n):
        return lam - d0 * n - h * iq[j, 0] - mu * iq[j, 1]

    states, start = solve_volterra(field, [TABLE2_INIT.total], theta, 1.0, grid)
    assert np.max(np.abs(states[:, 0] - traj.states.sum(axis=1))) <= 1e-6
    assert abs(start[0] - traj.start.total) <= 1e-6


def test_compare_series_self_test():
    zero = ModelParams(0, 0, 0, 0, 0, 0, 0)
    init = State(2.0, 1.0, 0.5)
    traj = solve_abc(zero, init, 0.7, 1.0, Grid(1.0, 10))
    c = [ThetaPolynomial.constant(v, 0.7) for v in init]
    s = SeriesSolution((c[0],), (c[1],), (c[2],), 0, 0.7)
    assert compare_series(traj, s) == 0.0


def test_compare_series_theta_one():
    traj = solve_abc(TABLE2, TABLE2_INIT, 1.0, 1.0, Grid(1.0, 1000))
    s = ladm_expand(TABLE2, TABLE2_INIT, 1.0, order=15)
    assert compare_series(traj, s, horizon=1.0) <= 1e-5


def test_grid_errors():
    with pytest.raises(DegenerateGridError):
        Grid(1.0, 0)
    with pytest.raises(DegenerateGridError):
        Grid(0.0, 10)
    with pytest.raises(DegenerateGridError):
        solve_abc(TABLE2, TABLE2_INIT, 1.0)
    g = Grid(2.0, 4)
    assert g.dt == 0.5 and g.times.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]


def test_non_convergence(backend):
    # populations in persons make gamma*P ~ 1e5 per day: the fixed point diverges
    big = State(35_525_047.0, 10_485.0, 18_000.0)
    from abcpiq.model import TABLE3

    with pytest.raises(NonConvergenceError):
        solve_abc(TABLE3, big, 1.0, 1.0, Grid(54.0, 1080), backend=backend)


def test_slow_contraction_exhausts_budget():
    # x = 1 - 0.7x contracts by 0.7 per sweep: 1e-12 needs ~78 sweeps
    with pytest.raises(NonConvergenceError):
        solve_volterra(lambda j, t, x: -x, [1.0], 0.3, 1.0, Grid(1.0, 10))


def test_iteration_budget_respected(backend):
    with pytest.raises(NonConvergenceError):
        solve_abc(TABLE2, TABLE2_INIT, 0.8, 1.0, Grid(1.0, 10), backend=backend, maxit=1)
