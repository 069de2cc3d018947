import numpy as np
import pytest

from abcpiq.calibrate import (
    CalibrationSpec,
    CaseSeries,
    fit,
    observation_grid,
    predict_infected,
    residual_report,
    sse,
)
from abcpiq.errors import DomainError, SolverError
from abcpiq.model import TABLE3, TABLE3_INIT, State
from abcpiq.solver import Grid, solve_abc

DAYS = np.arange(0.0, 55.0)


def _synthetic(params=TABLE3, theta=1.0, noise=0.0, seed=1):
    data = CaseSeries(list(zip(DAYS, np.ones_like(DAYS))))
    clean = predict_infected(params, data, theta, TABLE3_INIT)
    if noise:
        clean = clean * (1.0 + noise * np.random.default_rng(seed).uniform(-1, 1, clean.size))
    return CaseSeries(list(zip(DAYS, clean)))


@pytest.fixture(scope="module")
def clean_data():
    return _synthetic()


def _spec(free=("gamma", "sigma"), bump=1.2):
    base = TABLE3.with_values(**{n: bump * TABLE3.get(n) for n in free})
    return CalibrationSpec(base, free, TABLE3_INIT)


def test_case_series_validation():
    with pytest.raises(DomainError):
        CaseSeries([(0, 1), (1, 1), (2, 1)])
    with pytest.raises(DomainError):
        CaseSeries([(0, 1), (1, 1), (1, 2), (3, 1)])
    with pytest.raises(DomainError):
        CaseSeries([(0, 1), (1, -1), (2, 1), (3, 1)])
    s = CaseSeries([(3, 4), (1, 2), (0, 1), (2, 3)])
    assert s.times.tolist() == [0, 1, 2, 3] and s.cases.tolist() == [1, 2, 3, 4]


def test_spec_validation():
    with pytest.raises(DomainError):
        CalibrationSpec(TABLE3, ("alpha",), TABLE3_INIT)
    with pytest.raises(DomainError):
        CalibrationSpec(TABLE3, ("gamma", "gamma"), TABLE3_INIT)
    with pytest.raises(DomainError):
        CalibrationSpec(TABLE3, ("gamma",), TABLE3_INIT, bounds={"gamma": (1.0, 0.5)})
    with pytest.raises(DomainError):
        CalibrationSpec(TABLE3, ("gamma",), TABLE3_INIT, bounds={"mu": (0.0, 1.0)})


def test_observation_grid_spacing(clean_data):
    g = observation_grid(clean_data)
    assert g.t_end == 54.0 and g.steps >= 20 * 54


def test_zero_free_set(clean_data):
    res = fit(CalibrationSpec(TABLE3, (), TABLE3_INIT), clean_data)
    assert res.params == TABLE3 and res.converged and res.iterations == 0
    assert res.loss == sse(TABLE3, clean_data, 1.0, TABLE3_INIT)


def test_noiseless_round_trip(clean_data):
    res = fit(_spec(), clean_data)
    assert res.params.gamma == pytest.approx(TABLE3.gamma, rel=1e-2)
    assert res.params.sigma == pytest.approx(TABLE3.sigma, rel=1e-2)
    norm2 = float(clean_data.cases @ clean_data.cases)
    assert res.loss <= 1e-8 * norm2
    assert res.loss == pytest.approx(sse(res.params, clean_data, 1.0, TABLE3_INIT), rel=1e-12)
    assert res.converged


def test_noisy_round_trip():
    data = _synthetic(noise=0.01, seed=3)
    res = fit(_spec(), data)
    assert res.params.gamma == pytest.approx(TABLE3.gamma, rel=5e-2)
    assert res.params.sigma == pytest.approx(TABLE3.sigma, rel=5e-2)


def test_order_invariance(clean_data):
    rev = CaseSeries(clean_data.observations[::-1])
    a = fit(_spec(("gamma",)), clean_data)
    b = fit(_spec(("gamma",)), rev)
    assert a.params == b.params and a.loss == b.loss


def test_multistart_deterministic(clean_data):
    a = fit(_spec(("gamma",)), clean_data, starts=3, seed=5)
    b = fit(_spec(("gamma",)), clean_data, starts=3, seed=5)
    assert a == b


def test_bounds_respected(clean_data):
    spec = CalibrationSpec(TABLE3.with_values(gamma=0.25), ("gamma",), TABLE3_INIT,
                           bounds={"gamma": (0.22, 0.3)})
    res = fit(spec, clean_data)
    assert 0.22 <= res.params.gamma <= 0.3
    assert res.params.gamma == pytest.approx(0.22, rel=1e-6)


def test_residuals_on_model_data(clean_data):
    rows = residual_report(TABLE3, clean_data, 1.0, TABLE3_INIT)
    assert len(rows) == len(clean_data)
    assert max(abs(r[3]) for r in rows) <= 1e-8
    assert all(r[3] == r[2] - r[1] for r in rows)


def test_residual_horizon_error(clean_data):
    with pytest.raises(DomainError):
        residual_report(TABLE3, clean_data, 1.0, TABLE3_INIT, t_end=30.0)
    rows = residual_report(TABLE3, clean_data, 1.0, TABLE3_INIT, t_end=60.0)
    assert len(rows) == len(clean_data)


def test_start_point_failure_propagates(clean_data):
    persons = State(35_525_047.0, 10_485.0, 18_000.0)
    with pytest.raises(SolverError):
        fit(CalibrationSpec(TABLE3, ("gamma",), persons), clean_data)
