"""Least-squares fitting of rates to an infected-count time series.

The loss is the sum of squared differences between observed cases and the
infected compartment I(t) of the Volterra solver, linearly interpolated to
the observation times. Minimisation is derivative-free Nelder-Mead
(reflection 1, expansion 2, contraction 0.5, shrink 0.5) with coordinate
clipping to the bounds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, SolverError
from .model import PARAM_NAMES, ModelParams, State
from .solver import Grid, solve_abc

__all__ = [
    "CaseSeries",
    "CalibrationSpec",
    "CalibrationResult",
    "STEPS_PER_GAP",
    "observation_grid",
    "predict_infected",
    "sse",
    "fit",
    "residual_report",
]

STEPS_PER_GAP = 20
XATOL = 1e-8
MAXITER = 2000


@dataclass(frozen=True)
class CaseSeries:
    """Observed (t, cases) pairs, stored sorted by time."""

    times: np.ndarray
    cases: np.ndarray
    label: str = ""

    def __init__(self, observations, label=""):
        obs = sorted((float(t), float(c)) for t, c in observations)
        if len(obs) < 4:
            raise DomainError("a case series needs at least 4 observations")
        t = np.array([o[0] for o in obs])
        c = np.array([o[1] for o in obs])
        if np.any(np.diff(t) <= 0.0):
            raise DomainError("observation times must be distinct")
        if t[0] < 0.0:
            raise DomainError("observation times must be >= 0")
        if np.any(c < 0.0) or not np.all(np.isfinite(c)):
            raise DomainError("case counts must be finite and non-negative")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "cases", c)
        object.__setattr__(self, "label", label)

    def __len__(self):
        return self.times.size

    @property
    def observations(self):
        return list(zip(self.times.tolist(), self.cases.tolist()))


@dataclass(frozen=True)
class CalibrationSpec:
    """What to fit.

    ``base`` supplies every rate: fixed ones keep their value, free ones use
    it as the starting point. Missing bounds default to [0, inf).
    """

    base: ModelParams
    free: tuple
    init: State
    theta: float = 1.0
    b_norm: float = 1.0
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        free = tuple(self.free)
        unknown = [n for n in free if n not in PARAM_NAMES]
        if unknown:
            raise DomainError(f"unknown parameter(s) to fit: {', '.join(unknown)}")
        if len(set(free)) != len(free):
            raise DomainError("free parameters listed twice")
        object.__setattr__(self, "free", free)
        bounds = {}
        for name in free:
            lo, hi = self.bounds.get(name, (0.0, math.inf))
            if lo < 0.0 or lo > hi:
                raise DomainError(f"bad bounds for {name}: ({lo}, {hi})")
            bounds[name] = (float(lo), float(hi))
        extra = set(self.bounds) - set(free)
        if extra:
            raise DomainError(f"bounds given for fixed parameter(s): {', '.join(sorted(extra))}")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "init", State(*self.init))

    @property
    def fixed(self):
        return {k: v for k, v in self.base.as_dict().items() if k not in self.free}

    def lower(self):
        return np.array([self.bounds[n][0] for n in self.free])

    def upper(self):
        return np.array([self.bounds[n][1] for n in self.free])

    def start(self):
        return np.array([self.base.get(n) for n in self.free])

    def params_at(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lower(), self.upper())
        return self.base.with_values(**dict(zip(self.free, x.tolist())))


@dataclass(frozen=True)
class CalibrationResult:
    params: ModelParams
    loss: float
    iterations: int
    converged: bool
    evaluations: int = 0


def observation_grid(data: CaseSeries) -> Grid:
    """Solver grid over [0, last observation] with >= 20 steps per observation gap."""
    t = data.times
    gaps = np.diff(np.concatenate([[0.0], t])) if t[0] > 0.0 else np.diff(t)
    t_end = float(t[-1])
    steps = max(1, math.ceil(STEPS_PER_GAP * t_end / float(np.min(gaps)) - 1e-9))
    return Grid(t_end, steps)


def predict_infected(params, data: CaseSeries, theta, init, b_norm=1.0, grid=None, backend=None):
    grid = grid or observation_grid(data)
    traj = solve_abc(params, init, theta, b_norm, grid, backend=backend)
    return np.interp(data.times, traj.times, traj.I)


def sse(params, data: CaseSeries, theta, init, b_norm=1.0, grid=None, backend=None) -> float:
    resid = predict_infected(params, data, theta, init, b_norm, grid, backend) - data.cases
    return float(resid @ resid)


def _one_fit(spec: CalibrationSpec, data: CaseSeries, x_start, grid, backend):
    def loss(x):
        try:
            return sse(spec.params_at(x), data, spec.theta, spec.init, spec.b_norm, grid, backend)
        except SolverError:
            # trial point where the implicit step blows up: reject it
            return math.inf

    res = minimize(
        loss,
        x_start,
        method="Nelder-Mead",
        bounds=list(zip(spec.lower(), spec.upper())),
        options={"xatol": XATOL, "fatol": math.inf, "maxiter": MAXITER, "adaptive": False},
    )
    fitted = spec.params_at(res.x)
    return CalibrationResult(fitted, float(res.fun), int(res.nit), bool(res.status == 0), int(res.nfev))


def fit(spec: CalibrationSpec, data: CaseSeries, *, starts: int = 1, seed: int = 0,
        backend=None) -> CalibrationResult:
    """Minimise the SSE on I(t) over the free rates.

    With ``starts > 1`` additional starting points are drawn by
    log-normal jitter (10%) of the base values using ``seed``; all starts
    run in a thread pool and the lowest loss wins.
    """
    grid = observation_grid(data)
    # the starting point must be solvable; solver errors propagate from here
    start_loss = sse(spec.base, data, spec.theta, spec.init, spec.b_norm, grid, backend)
    if not spec.free:
        return CalibrationResult(spec.base, start_loss, 0, True, 1)

    x0 = spec.start()
    rng = np.random.default_rng(seed)
    points = [x0] + [
        np.clip(x0 * np.exp(0.1 * rng.standard_normal(x0.size)), spec.lower(), spec.upper())
        for _ in range(max(0, starts - 1))
    ]
    if len(points) == 1:
        results = [_one_fit(spec, data, x0, grid, backend)]
    else:
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda x: _one_fit(spec, data, x, grid, backend), points))
    return min(results, key=lambda r: r.loss)


def residual_report(params, data: CaseSeries, theta, init, b_norm=1.0, t_end=None, backend=None):
    """Rows (t, observed, predicted, residual) for each observation.

    With ``t_end`` given, the model is solved on [0, t_end] and any
    observation beyond it is an error.
    """
    if t_end is not None:
        if data.times[-1] > t_end:
            raise DomainError(
                f"observation at t={data.times[-1]:g} lies beyond the model horizon {t_end:g}"
            )
        base = observation_grid(data)
        grid = Grid(t_end, max(base.steps, math.ceil(base.steps * t_end / base.t_end)))
    else:
        grid = None
    pred = predict_infected(params, data, theta, init, b_norm, grid, backend)
    return [
        (float(t), float(o), float(p), float(p - o))
        for t, o, p in zip(data.times, data.cases, pred)
    ]
