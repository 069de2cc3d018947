"""Gamma and two-parameter Mittag-Leffler functions on the real line.

Gamma uses the Lanczos approximation with g = 607/128 and 15 coefficients
(Godfrey's set), which keeps the relative error near 2e-15 on (0, 171].
The Mittag-Leffler function is summed directly from its power series, so
it is only offered on a bounded window |z| <= Z_MAX.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = [
    "MLParams",
    "Z_MAX",
    "PrecisionWarning",
    "gamma",
    "log_gamma",
    "gamma_ratio",
    "mittag_leffler",
]

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_COEF = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Gamma(x) overflows a double just above this point.
GAMMA_X_MAX = 171.62437695630272

Z_MAX = 50.0
ML_TOL = 1e-15
ML_MAX_TERMS = 10_000


class PrecisionWarning(RuntimeWarning):
    """Emitted when an alternating series loses most of its significant digits."""


def _lanczos_sum(x):
    # x is the shifted argument (original x minus 1)
    a = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[k] / (x + k)
    return a


def _check_arg(x):
    if not x > 0.0:
        raise DomainError(f"gamma is only defined here for x > 0, got {x!r}")
    if math.isinf(x):
        raise OverflowError("gamma(inf) is not representable")


def gamma(x: float) -> float:
    """Gamma function for real ``x > 0``.

    Raises:
        DomainError: for ``x <= 0`` (or NaN).
        OverflowError: when the result exceeds the double range.
    """
    x = float(x)
    _check_arg(x)
    if x > GAMMA_X_MAX:
        raise OverflowError(f"gamma({x}) exceeds the floating-point range")
    if x < 0.5:
        # Lanczos is tuned for x >= 0.5; shift up once.
        return gamma(x + 1.0) / x
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split the power so that t**(z+0.5) never overflows on its own
    half = t ** ((z + 0.5) * 0.5)
    out = _SQRT_2PI * half * (math.exp(-t) * _lanczos_sum(z)) * half
    if math.isinf(out):
        raise OverflowError(f"gamma({x}) exceeds the floating-point range")
    return out


def log_gamma(x: float) -> float:
    """Natural log of Gamma for real ``x > 0``; never overflows."""
    x = float(x)
    _check_arg(x)
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b), going through logs when either side would overflow."""
    if a <= GAMMA_X_MAX and b <= GAMMA_X_MAX:
        return gamma(a) / gamma(b)
    return math.exp(log_gamma(a) - log_gamma(b))


@dataclass(frozen=True)
class MLParams:
    """Parameters (alpha, beta) of E_{alpha,beta}; both must be positive."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise DomainError(
                f"Mittag-Leffler parameters must be positive, got "
                f"alpha={self.alpha!r}, beta={self.beta!r}"
            )


def mittag_leffler(p: MLParams, z: float, *, z_max: float = Z_MAX) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.

    Direct power series sum_k z**k / Gamma(alpha*k + beta) with Kahan
    compensated summation. Terms are formed in log space so large |z| and
    large k do not overflow. Summation stops once the series is past its
    largest term and the current term is below ``1e-15 * |partial sum|``.

    For negative z the series alternates; when the largest term dwarfs the
    result a :class:`PrecisionWarning` is issued since digits are lost to
    cancellation.

    Raises:
        DomainError: |z| > z_max.
        ConvergenceError: tolerance not met within 10,000 terms.
    """
    z = float(z)
    if not abs(z) <= z_max:
        raise DomainError(f"|z| = {abs(z)} outside the series window |z| <= {z_max}")

    first = 1.0 / gamma(p.beta) if p.beta <= GAMMA_X_MAX else math.exp(-log_gamma(p.beta))
    total = first
    comp = 0.0
    if z == 0.0:
        return total

    log_abs_z = math.log(abs(z))
    largest = abs(first)
    prev = abs(first)
    for k in range(1, ML_MAX_TERMS):
        mag = math.exp(k * log_abs_z - log_gamma(p.alpha * k + p.beta))
        term = -mag if (z < 0.0 and k % 2) else mag
        # Kahan step
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        largest = max(largest, mag)
        if mag <= prev and mag < ML_TOL * abs(total):
            break
        prev = mag
    else:
        raise ConvergenceError(
            f"Mittag-Leffler series for z={z} did not converge in {ML_MAX_TERMS} terms"
        )

    if total != 0.0 and largest * 2.2e-16 > 1e-10 * abs(total):
        warnings.warn(
            f"E_{{{p.alpha},{p.beta}}}({z}): cancellation leaves fewer than 10 "
            f"significant digits",
            PrecisionWarning,
            stacklevel=2,
        )
    return total
