"""P-I-Q compartment model: rates, state, vector field and R0.

P is susceptible, I infected, Q quarantined. The right-hand side is

    f1 = lambda - gamma*P*I - d0*P
    f2 = gamma*P*I - (d0 + h + eta)*I + sigma*Q
    f3 = eta*I - (d0 + mu + sigma)*Q

States are plain finite reals; positivity is monitored by the solver
diagnostics and never enforced by clamping.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import DegenerateModelError, DomainError
from .thetapoly import check_theta

__all__ = [
    "PARAM_NAMES",
    "ModelParams",
    "State",
    "FractionalOrder",
    "TABLE2",
    "TABLE2_INIT",
    "TABLE3",
    "TABLE3_INIT",
    "vector_field",
    "r0",
    "r0_parts",
    "total_population_rate",
]

# Config-file spelling of each rate, in the order used for packed arrays.
PARAM_NAMES = ("lambda", "gamma", "d0", "eta", "mu", "sigma", "h")


@dataclass(frozen=True)
class ModelParams:
    """The seven non-negative epidemiological rates.

    ``lam`` is the recruitment rate (persons/day); it is spelled ``lambda``
    in config files and in :meth:`as_dict`.
    """

    lam: float
    gamma: float
    d0: float
    eta: float
    mu: float
    sigma: float
    h: float

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            object.__setattr__(self, f.name, v)
            if not (v >= 0.0 and np.isfinite(v)):
                raise DomainError(f"rate {f.name} must be finite and >= 0, got {v!r}")

    @classmethod
    def from_dict(cls, d):
        return cls(**{("lam" if k == "lambda" else k): d[k] for k in PARAM_NAMES})

    def as_dict(self):
        return dict(zip(PARAM_NAMES, astuple(self)))

    def as_array(self):
        """Rates packed as float64 in ``PARAM_NAMES`` order (solver kernels use this)."""
        return np.array(astuple(self), dtype=np.float64)

    def get(self, name):
        return getattr(self, "lam" if name == "lambda" else name)

    def with_values(self, **changes):
        """Copy with some rates replaced; accepts the ``lambda`` spelling."""
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        return replace(self, **changes)


class State(NamedTuple):
    """Compartment sizes (P, I, Q)."""

    p: float
    i: float
    q: float

    @property
    def total(self):
        return self.p + self.i + self.q

    def as_array(self):
        return np.array(self, dtype=np.float64)


@dataclass(frozen=True)
class FractionalOrder:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))

    def __float__(self):
        return self.theta


# Simulation study rates; populations are in millions.
TABLE2 = ModelParams(lam=0.003, gamma=0.009, d0=0.009, eta=0.004, mu=0.004, sigma=0.003, h=0.007)
TABLE2_INIT = State(10.0, 0.01, 0.0011)

# Khyber Pakhtunkhwa calibration rates. Initial counts are kept in millions
# like TABLE2_INIT so that gamma*P stays on a day scale.
TABLE3 = ModelParams(lam=0.028, gamma=0.2, d0=0.011, eta=0.3, mu=0.2, sigma=0.04, h=0.06)
TABLE3_INIT = State(35.525047, 0.010485, 0.018)


def vector_field(params: ModelParams, s) -> tuple[float, float, float]:
    """Right-hand side (f1, f2, f3) at state ``s = (P, I, Q)``."""
    p, i, q = s
    infection = params.gamma * p * i
    f1 = params.lam - infection - params.d0 * p
    f2 = infection - (params.d0 + params.h + params.eta) * i + params.sigma * q
    f3 = params.eta * i - (params.d0 + params.mu + params.sigma) * q
    return f1, f2, f3


def total_population_rate(params: ModelParams, s) -> float:
    """dN/dt for N = P + I + Q, i.e. the sum of the three field components.

    Evaluated as that literal sum so it matches ``sum(vector_field(...))``
    bit for bit; algebraically it is ``lambda - d0*N - h*I - mu*Q``.
    """
    f1, f2, f3 = vector_field(params, s)
    return f1 + f2 + f3


def r0_parts(params: ModelParams) -> tuple[float, float]:
    """Numerator and denominator of R0."""
    s = params.d0 + params.mu + params.sigma
    num = params.gamma * params.lam * s
    den = params.d0 * s * (params.d0 + params.h) + params.eta * (params.d0 + params.mu)
    return num, den


def r0(params: ModelParams) -> float:
    """Basic reproduction number

        R0 = gamma*lambda*(d0+mu+sigma) / [d0*(d0+mu+sigma)*(d0+h) + eta*(d0+mu)]
    """
    num, den = r0_parts(params)
    if den == 0.0:
        raise DegenerateModelError("R0 denominator vanishes for these rates")
    return num / den
