"""Laplace-Adomian decomposition of the fractional P-I-Q system.

Each iterate is a :class:`ThetaPolynomial`. Starting from the constant
initial data, the next iterates are

    P_{n+1} = A[src(n) - gamma*H_n - d0*P_n]
    I_{n+1} = A[gamma*H_n - (d0+h+eta)*I_n + sigma*Q_n]
    Q_{n+1} = A[eta*I_n - (d0+mu+sigma)*Q_n]

where A is :func:`abc_inverse` and H_n the Adomian polynomial of P*I.
The recruitment source enters P_1 only unless ``source_every_term`` is
set, in which case it is re-injected into every P_{n+1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, State
from .thetapoly import ThetaPolynomial, abc_inverse, check_theta, poly_eval

__all__ = [
    "DEFAULT_ORDER",
    "SeriesSolution",
    "adomian_product",
    "ladm_expand",
    "series_eval",
    "truncation_estimate",
]

DEFAULT_ORDER = 15


@dataclass(frozen=True)
class SeriesSolution:
    p_terms: tuple
    i_terms: tuple
    q_terms: tuple
    order: int
    theta: float
    b_norm: float = 1.0

    def __post_init__(self):
        n = self.order + 1
        if not (len(self.p_terms) == len(self.i_terms) == len(self.q_terms) == n):
            raise ValueError(f"series of order {self.order} needs {n} iterates per compartment")

    def iterate(self, n):
        return self.p_terms[n], self.i_terms[n], self.q_terms[n]

    def __call__(self, t):
        return series_eval(self, t)

    def render(self, digits=5):
        lines = []
        for name, terms in (("P", self.p_terms), ("I", self.i_terms), ("Q", self.q_terms)):
            for n, poly in enumerate(terms):
                lines.append(f"{name}_{n}(t) = {poly.render(digits)}")
        return "\n".join(lines)


def adomian_product(p_terms, i_terms, n: int) -> ThetaPolynomial:
    """Adomian polynomial H_n of the product P*I.

    For a bilinear nonlinearity the n-th derivative formula collapses to the
    Cauchy convolution H_n = sum_{k=0}^{n} P_k * I_{n-k}.
    """
    if n < 0:
        raise IndexError("Adomian index must be non-negative")
    if len(p_terms) <= n or len(i_terms) <= n:
        raise IndexError(f"need at least {n + 1} iterates to form H_{n}")
    acc = ThetaPolynomial.zero(p_terms[0].theta)
    for k in range(n + 1):
        acc = acc + p_terms[k] * i_terms[n - k]
    return acc


def ladm_expand(
    params: ModelParams,
    init,
    theta,
    b_norm: float = 1.0,
    order: int = DEFAULT_ORDER,
    source_every_term: bool = False,
) -> SeriesSolution:
    """Build the truncated decomposition series up to iterate ``order``."""
    theta = check_theta(getattr(theta, "theta", theta))
    if order < 0:
        raise ValueError("series order must be >= 0")
    p0, i0, q0 = (float(v) for v in init)
    const = lambda c: ThetaPolynomial.constant(c, theta)  # noqa: E731

    ps, is_, qs = [const(p0)], [const(i0)], [const(q0)]
    lam = const(params.lam)
    loss_i = params.d0 + params.h + params.eta
    loss_q = params.d0 + params.mu + params.sigma

    for n in range(order):
        hn = adomian_product(ps, is_, n)
        g_p = -params.gamma * hn - params.d0 * ps[n]
        if n == 0 or source_every_term:
            g_p = g_p + lam
        g_i = params.gamma * hn - loss_i * is_[n] + params.sigma * qs[n]
        g_q = params.eta * is_[n] - loss_q * qs[n]
        ps.append(abc_inverse(g_p, theta, b_norm))
        is_.append(abc_inverse(g_i, theta, b_norm))
        qs.append(abc_inverse(g_q, theta, b_norm))

    return SeriesSolution(tuple(ps), tuple(is_), tuple(qs), order, theta, float(b_norm))


def _sum_terms(terms, t):
    total = poly_eval(terms[0], t)
    for poly in terms[1:]:
        total = total + poly_eval(poly, t)
    return total


def series_eval(s: SeriesSolution, t):
    """Truncated series value; scalar t gives a State, array t gives a (len(t), 3) array."""
    if np.ndim(t) == 0:
        return State(_sum_terms(s.p_terms, t), _sum_terms(s.i_terms, t), _sum_terms(s.q_terms, t))
    t = np.asarray(t, dtype=float)
    return np.column_stack([_sum_terms(s.p_terms, t), _sum_terms(s.i_terms, t), _sum_terms(s.q_terms, t)])


def truncation_estimate(s: SeriesSolution, t: float) -> float:
    """Magnitude of the last retained iterate at ``t`` (max over compartments).

    This is the usual last-term heuristic for an asymptotic series, not an
    error bound.
    """
    if s.order < 1:
        raise ValueError("truncation estimate needs order >= 1")
    return max(abs(poly_eval(poly, t)) for poly in s.iterate(s.order))
