"""Numerical solution of the ABC initial-value problem in Volterra form.

The problem D^theta x = f(x), x(0) = x0 (ABC derivative, normalization B)
is equivalent to

    x(t) = x0 + (1-theta)/B * f(x(t))
              + theta/(B*Gamma(theta)) * int_0^t (t-s)**(theta-1) f(x(s)) ds.

The integral is discretised by product integration: f is replaced by its
piecewise-linear interpolant on a uniform grid and integrated exactly
against the weakly singular kernel. At theta = 1 this is the trapezoidal
rule.

For theta < 1 the integral form forces a jump at t = 0: the right limit
x(0+) solves x = x0 + (1-theta)/B * f(x). The trajectory keeps the
prescribed x0 at index 0 and records x(0+) separately as ``start``; the
history integral uses f(x(0+)) at s = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateGridError, DomainError, NonConvergenceError
from .ladm import SeriesSolution, series_eval
from .model import ModelParams, State
from .special import gamma
from .thetapoly import check_theta

__all__ = [
    "Grid",
    "Trajectory",
    "FP_TOL",
    "FP_MAXIT",
    "solve_abc",
    "solve_volterra",
    "compare_series",
]

FP_TOL = 1e-12
FP_MAXIT = 50


@dataclass(frozen=True)
class Grid:
    """Uniform grid t_j = j * t_end / steps, j = 0..steps."""

    t_end: float
    steps: int

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise DegenerateGridError(f"grid needs at least one step, got {self.steps!r}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise DegenerateGridError(f"grid horizon must be positive, got {self.t_end!r}")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "t_end", float(self.t_end))

    @property
    def dt(self):
        return self.t_end / self.steps

    @property
    def times(self):
        return self.t_end * np.arange(self.steps + 1) / self.steps


@dataclass(frozen=True)
class Trajectory:
    grid: Grid
    states: np.ndarray  # (steps+1, 3): P, I, Q
    start: State  # right limit x(0+)
    theta: float
    b_norm: float
    iterations: np.ndarray  # fixed-point iterations per node
    negative: np.ndarray = field(init=False)

    def __post_init__(self):
        self.states.setflags(write=False)
        self.iterations.setflags(write=False)
        neg = np.any(self.states < 0.0, axis=1)
        neg.setflags(write=False)
        object.__setattr__(self, "negative", neg)

    @property
    def times(self):
        return self.grid.times

    @property
    def P(self):
        return self.states[:, 0]

    @property
    def I(self):  # noqa: E743
        return self.states[:, 1]

    @property
    def Q(self):
        return self.states[:, 2]

    def state(self, j) -> State:
        return State(*map(float, self.states[j]))

    def __len__(self):
        return self.states.shape[0]

    def interp(self, t):
        """Linear interpolation of (P, I, Q) to times inside the grid."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t > self.grid.t_end * (1 + 1e-12)):
            raise DomainError("interpolation time outside the trajectory horizon")
        ts = self.times
        return np.column_stack([np.interp(t, ts, self.states[:, c]) for c in range(3)])


def _coefficients(theta, b_norm, dt):
    theta = check_theta(theta)
    b_norm = float(b_norm)
    if not b_norm > 0.0:
        raise DomainError(f"normalization ABC(theta) must be positive, got {b_norm!r}")
    a_loc = (1.0 - theta) / b_norm
    c_mem_h = theta / (b_norm * gamma(theta)) * dt**theta
    return theta, b_norm, a_loc, c_mem_h


def _raise_for(status, j, t):
    if status == _kernels.NO_CONVERGENCE:
        raise NonConvergenceError(
            f"fixed-point iteration did not converge in {FP_MAXIT} iterations at t={t:g}"
        )
    raise NonConvergenceError(f"solution became non-finite at t={t:g}")


def solve_abc(
    params: ModelParams,
    init,
    theta,
    b_norm: float = 1.0,
    grid: Grid | None = None,
    *,
    backend: str | None = None,
    tol: float = FP_TOL,
    maxit: int = FP_MAXIT,
) -> Trajectory:
    """Integrate the P-I-Q system with ABC derivative of order theta."""
    if grid is None:
        raise DegenerateGridError("a Grid is required")
    theta, b_norm, a_loc, c_mem_h = _coefficients(getattr(theta, "theta", theta), b_norm, grid.dt)
    C, W, B1 = _kernels.kernel_weights(theta, grid.steps)
    x0 = np.array([float(v) for v in init], dtype=np.float64)
    X, _F, iters, start, status, failed = _kernels.piq_march(
        params.as_array(), x0, a_loc, c_mem_h, C, W, B1, grid.steps, tol, maxit, backend=backend
    )
    if status != _kernels.OK:
        _raise_for(status, failed, failed * grid.dt)
    return Trajectory(grid, X, State(*map(float, start)), theta, b_norm, iters)


def solve_volterra(field_fn, x0, theta, b_norm: float = 1.0, grid: Grid | None = None, *,
                   backend: str | None = None, tol: float = FP_TOL, maxit: int = FP_MAXIT):
    """Same scheme for an arbitrary field ``field_fn(j, t, x) -> array``.

    Slow path (Python call per iteration) used for scalar test problems and
    auxiliary equations driven by a computed trajectory. Returns
    ``(states, start)`` with ``states`` of shape (steps+1, d).
    """
    if grid is None:
        raise DegenerateGridError("a Grid is required")
    theta, b_norm, a_loc, c_mem_h = _coefficients(theta, b_norm, grid.dt)
    C, W, B1 = _kernels.kernel_weights(theta, grid.steps)
    ts = grid.times
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    d = x0.size
    X = np.empty((grid.steps + 1, d))
    F = np.empty((grid.steps + 1, d))
    X[0] = x0

    def settle(j, base, gain, guess):
        x = guess
        for _ in range(maxit):
            new = base + gain * np.asarray(field_fn(j, ts[j], x), dtype=np.float64)
            if not np.all(np.isfinite(new)):
                _raise_for(_kernels.NON_FINITE, j, ts[j])
            if np.all(np.abs(new - x) <= tol * np.maximum(1.0, np.abs(new))):
                return new
            x = new
        _raise_for(_kernels.NO_CONVERGENCE, j, ts[j])

    start = settle(0, x0, a_loc, x0.copy()) if a_loc != 0.0 else x0.copy()
    F[0] = field_fn(0, 0.0, start)
    gain = a_loc + c_mem_h * B1
    prev = start
    for j in range(1, grid.steps + 1):
        base = x0 + c_mem_h * _kernels.history_sum(C, W, F[:j], j, backend=backend)
        x = settle(j, base, gain, prev)
        X[j] = x
        F[j] = field_fn(j, ts[j], x)
        prev = x
    return X, start


def compare_series(traj: Trajectory, s: SeriesSolution, horizon: float | None = None) -> float:
    """Largest component-wise gap between a trajectory and a series.

    Taken over grid nodes with t <= horizon (default: whole grid). At t = 0
    the trajectory's right limit x(0+) is compared, since the series, like
    the integral form, already includes the (1-theta) jump there.
    """
    ts = traj.times
    mask = ts <= (traj.grid.t_end if horizon is None else horizon) * (1 + 1e-12)
    ref = np.array(traj.states[mask], copy=True)
    ref[0] = traj.start
    approx = series_eval(s, ts[mask])
    return float(np.max(np.abs(ref - approx)))
