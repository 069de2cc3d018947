"""Sensitivity of R0 and the numeric stability hypotheses.

Sensitivity indices are elasticities S_w = (w / R0) * dR0/dw. Stability
quantities are the Lipschitz constant of the field on a state box (sum
norm), the contraction constant Xi of the integral operator and the
Ulam-Hyers constant Omega.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, DomainError
from .model import PARAM_NAMES, ModelParams, r0, vector_field
from .special import gamma
from .thetapoly import check_theta

__all__ = [
    "SensitivityEntry",
    "SensitivityReport",
    "StabilityReport",
    "sensitivity_indices",
    "lipschitz_estimate",
    "contraction_constant",
    "ulam_bound",
    "stability_report",
]

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class SensitivityEntry:
    name: str
    index: float
    analytic: bool


@dataclass(frozen=True)
class SensitivityReport:
    entries: tuple

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e.index
        raise KeyError(name)

    def as_dict(self):
        return {e.name: e.index for e in self.entries}


def _log_derivatives(p: ModelParams):
    """d ln R0 / d w for each rate, differentiated by hand.

    With S = d0+mu+sigma and D = d0*S*(d0+h) + eta*(d0+mu),
    ln R0 = ln gamma + ln lambda + ln S - ln D.
    """
    s = p.d0 + p.mu + p.sigma
    d = p.d0 * s * (p.d0 + p.h) + p.eta * (p.d0 + p.mu)
    # dD/dd0: product rule on d0*S*(d0+h) plus eta
    dd_d0 = s * (p.d0 + p.h) + p.d0 * (p.d0 + p.h) + p.d0 * s + p.eta
    # dD/dmu: d0*(d0+h) from S, eta from (d0+mu)
    dd_mu = p.d0 * (p.d0 + p.h) + p.eta
    # dD/dsigma: only S depends on sigma
    dd_sigma = p.d0 * (p.d0 + p.h)
    dd_h = p.d0 * s
    dd_eta = p.d0 + p.mu
    return {
        "d0": 1.0 / s - dd_d0 / d,
        "mu": 1.0 / s - dd_mu / d,
        "sigma": 1.0 / s - dd_sigma / d,
        "h": -dd_h / d,
        "eta": -dd_eta / d,
    }


def sensitivity_indices(params: ModelParams, mode: str = "analytic") -> SensitivityReport:
    """Normalized forward sensitivity index of R0 for all seven rates.

    ``mode="analytic"`` uses the closed-form derivative; ``"finite_difference"``
    applies central differences with relative step 1e-6 to :func:`r0`.
    """
    base = r0(params)
    if base == 0.0:
        raise DegenerateModelError("sensitivity indices need R0 > 0")
    entries = []
    if mode == "analytic":
        dlog = _log_derivatives(params)
        for name in PARAM_NAMES:
            if name in ("gamma", "lambda"):
                # R0 is linear in gamma and in lambda
                idx = 1.0
            else:
                idx = params.get(name) * dlog[name]
            entries.append(SensitivityEntry(name, idx, True))
    elif mode == "finite_difference":
        for name in PARAM_NAMES:
            w = params.get(name)
            step = FD_REL_STEP * w if w != 0.0 else FD_REL_STEP
            up = r0(params.with_values(**{name: w + step}))
            down = r0(params.with_values(**{name: max(w - step, 0.0)}))
            deriv = (up - down) / (w + step - max(w - step, 0.0))
            entries.append(SensitivityEntry(name, w / base * deriv, False))
    else:
        raise ValueError(f"unknown sensitivity mode {mode!r}")
    return SensitivityReport(tuple(entries))


def lipschitz_estimate(params: ModelParams, box) -> float:
    """Lipschitz constant of the field on [0,P]x[0,I]x[0,Q] in the sum norm.

    The induced 1-norm of the Jacobian is its largest absolute column sum.
    Every Jacobian entry is affine in the state, so each column sum is
    convex and its maximum over the box sits at a corner.
    """
    pb, ib, qb = (float(v) for v in box)
    if min(pb, ib, qb) < 0.0:
        raise DomainError("state box bounds must be non-negative")
    g, d0 = params.gamma, params.d0
    loss_i = d0 + params.h + params.eta
    loss_q = d0 + params.mu + params.sigma
    best = 0.0
    for p, i in itertools.product((0.0, pb), (0.0, ib)):
        col_p = abs(-g * i - d0) + abs(g * i)
        col_i = abs(g * p) + abs(g * p - loss_i) + abs(params.eta)
        col_q = abs(params.sigma) + abs(loss_q)
        best = max(best, col_p, col_i, col_q)
    return best


def contraction_constant(l_phi, theta, tau, b_norm=1.0):
    """Xi = (1-theta)*L/B + tau**theta*L/(Gamma(theta)*B) and the verdict Xi < 1."""
    theta = check_theta(getattr(theta, "theta", theta))
    if l_phi < 0.0:
        raise DomainError("Lipschitz constant must be non-negative")
    if not tau > 0.0:
        raise DomainError("horizon tau must be positive")
    xi = (1.0 - theta) * l_phi / b_norm + tau**theta * l_phi / (gamma(theta) * b_norm)
    return xi, xi < 1.0


def ulam_bound(epsilon, theta, tau, b_norm=1.0):
    """Omega = epsilon * (Gamma(theta) + tau**theta) / (Gamma(theta) * B)."""
    theta = check_theta(getattr(theta, "theta", theta))
    if epsilon < 0.0:
        raise DomainError("epsilon must be non-negative")
    if not tau > 0.0:
        raise DomainError("horizon tau must be positive")
    g = gamma(theta)
    return epsilon * ((g + tau**theta) / (g * b_norm))


@dataclass(frozen=True)
class StabilityReport:
    l_phi: float
    xi: float
    xi_ok: bool
    omega_bound: float  # per unit epsilon
    tau: float
    theta: float
    box: tuple

    def lines(self):
        return [
            f"L_phi = {self.l_phi!r}",
            f"Xi = {self.xi!r}",
            f"Xi < 1: {'yes' if self.xi_ok else 'no'}",
            f"Omega per unit epsilon = {self.omega_bound!r}",
        ]


def stability_report(params: ModelParams, box, theta, tau, b_norm=1.0) -> StabilityReport:
    l_phi = lipschitz_estimate(params, box)
    xi, ok = contraction_constant(l_phi, theta, tau, b_norm)
    omega = ulam_bound(1.0, theta, tau, b_norm)
    return StabilityReport(l_phi, xi, ok, omega, float(tau), float(getattr(theta, "theta", theta)),
                           tuple(float(v) for v in box))


def sum_norm_gap(params: ModelParams, a, b):
    """|f(a) - f(b)|_1, used when sampling the Lipschitz bound."""
    return float(np.sum(np.abs(np.subtract(vector_field(params, a), vector_field(params, b)))))
