"""Generalized polynomials sum_k c_k * t**(m_k + n_k*theta).

Every Adomian iterate of the P-I-Q system is a finite sum of such
monomials, so the decomposition can be carried out exactly in coefficient
space. Exponents are kept as the integer pair (m, n); theta is a number
attached to the polynomial, not a symbol.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import DomainError, MismatchedOrderError
from .special import gamma_ratio

__all__ = [
    "ThetaMonomial",
    "ThetaPolynomial",
    "PRUNE_BELOW",
    "poly_eval",
    "poly_add",
    "poly_scale",
    "poly_mul",
    "abc_inverse",
    "check_theta",
]

# Denormal guard only; accuracy-driven truncation is the caller's business.
PRUNE_BELOW = 1e-300


def check_theta(theta):
    theta = float(theta)
    if not 0.0 < theta <= 1.0:
        raise DomainError(f"fractional order must lie in (0, 1], got {theta!r}")
    return theta


class ThetaMonomial(tuple):
    """``coeff * t**(m + n*theta)`` as an immutable (coeff, m, n) triple."""

    __slots__ = ()

    def __new__(cls, coeff, m=0, n=0):
        m, n = int(m), int(n)
        if m < 0 or n < 0:
            raise DomainError("monomial exponents (m, n) must be non-negative")
        return super().__new__(cls, (float(coeff), m, n))

    @property
    def coeff(self):
        return self[0]

    @property
    def m(self):
        return self[1]

    @property
    def n(self):
        return self[2]

    def exponent(self, theta):
        return self[1] + self[2] * theta


class ThetaPolynomial:
    """Immutable finite sum of theta-monomials.

    Terms are keyed by their exponent pair, stored in ascending order of
    the exponent value ``m + n*theta`` (ties broken by the pair itself),
    and coefficients smaller than ``PRUNE_BELOW`` in magnitude are dropped.
    """

    __slots__ = ("theta", "_terms")

    def __init__(self, terms: Mapping[tuple[int, int], float] | Iterable = (), theta=1.0):
        theta = check_theta(theta)
        merged: dict[tuple[int, int], float] = {}
        items = terms.items() if isinstance(terms, Mapping) else (
            ((mono[1], mono[2]), mono[0]) for mono in map(_as_monomial, terms)
        )
        for (m, n), c in items:
            key = (int(m), int(n))
            if key[0] < 0 or key[1] < 0:
                raise DomainError("monomial exponents (m, n) must be non-negative")
            merged[key] = merged.get(key, 0.0) + float(c)
        kept = [(k, c) for k, c in merged.items() if abs(c) >= PRUNE_BELOW]
        kept.sort(key=lambda kc: (kc[0][0] + kc[0][1] * theta, kc[0]))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "_terms", tuple(kept))

    def __setattr__(self, name, value):
        raise AttributeError("ThetaPolynomial is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c, theta=1.0):
        return cls({(0, 0): c}, theta)

    @classmethod
    def monomial(cls, c, m=0, n=0, theta=1.0):
        return cls({(m, n): c}, theta)

    @classmethod
    def zero(cls, theta=1.0):
        return cls({}, theta)

    # -- container protocol -------------------------------------------
    def __iter__(self) -> Iterator[ThetaMonomial]:
        for (m, n), c in self._terms:
            yield ThetaMonomial(c, m, n)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(self._terms)

    def coeff(self, m, n):
        for key, c in self._terms:
            if key == (m, n):
                return c
        return 0.0

    def exponents(self):
        """Exponent values m + n*theta in storage (ascending) order."""
        return [m + n * self.theta for (m, n), _ in self._terms]

    def max_multiplicity(self):
        """Largest theta-multiplicity n present (-1 for the empty polynomial)."""
        return max((n for (_, n), _ in self._terms), default=-1)

    def with_theta(self, theta):
        """Same coefficient table reinterpreted at another fractional order."""
        return ThetaPolynomial(dict(self._terms), theta)

    def __eq__(self, other):
        if not isinstance(other, ThetaPolynomial):
            return NotImplemented
        return self.theta == other.theta and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.theta, self._terms))

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        return poly_add(self, other)

    def __sub__(self, other):
        return poly_add(self, poly_scale(other, -1.0))

    def __neg__(self):
        return poly_scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, ThetaPolynomial):
            return poly_mul(self, other)
        return poly_scale(self, other)

    __rmul__ = __mul__

    def __call__(self, t):
        return poly_eval(self, t)

    # -- rendering -----------------------------------------------------
    def render(self, digits=5):
        """Human-readable form, e.g. ``0.5 + 0.56419*t^(0.5)``."""
        if not self._terms:
            return "0"
        parts = []
        for i, ((m, n), c) in enumerate(self._terms):
            mag = f"{abs(c):.{digits}g}"
            if (m, n) != (0, 0):
                mag += f"*t^({m + n * self.theta:g})"
            if i == 0:
                parts.append(("-" if c < 0 else "") + mag)
            else:
                parts.append(("- " if c < 0 else "+ ") + mag)
        return " ".join(parts)

    def __str__(self):
        return self.render()

    def __repr__(self):
        body = ", ".join(f"({m}, {n}): {c!r}" for (m, n), c in self._terms)
        return f"ThetaPolynomial({{{body}}}, theta={self.theta!r})"


def _as_monomial(obj):
    if isinstance(obj, ThetaMonomial):
        return obj
    return ThetaMonomial(*obj)


def _same_order(a, b):
    if a.theta != b.theta:
        raise MismatchedOrderError(
            f"cannot combine polynomials of order {a.theta} and {b.theta}"
        )


def poly_eval(p: ThetaPolynomial, t):
    """Evaluate at ``t >= 0`` (scalar or array)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("theta-polynomials are evaluated on t >= 0 only")
    out = np.zeros_like(t_arr)
    for (m, n), c in p._terms:
        if m == 0 and n == 0:
            out = out + c
        else:
            out = out + c * t_arr ** (m + n * p.theta)
    if np.ndim(t) == 0:
        return float(out)
    return out


def poly_add(a: ThetaPolynomial, b: ThetaPolynomial) -> ThetaPolynomial:
    _same_order(a, b)
    acc = dict(a._terms)
    for key, c in b._terms:
        acc[key] = acc.get(key, 0.0) + c
    return ThetaPolynomial(acc, a.theta)


def poly_scale(a: ThetaPolynomial, c) -> ThetaPolynomial:
    c = float(c)
    return ThetaPolynomial({k: c * v for k, v in a._terms}, a.theta)


def poly_mul(a: ThetaPolynomial, b: ThetaPolynomial) -> ThetaPolynomial:
    """Product; exponent pairs add component-wise."""
    _same_order(a, b)
    acc: dict[tuple[int, int], float] = {}
    for (m1, n1), c1 in a._terms:
        for (m2, n2), c2 in b._terms:
            key = (m1 + m2, n1 + n2)
            acc[key] = acc.get(key, 0.0) + c1 * c2
    return ThetaPolynomial(acc, a.theta)


def abc_inverse(g: ThetaPolynomial, theta=None, b_norm=1.0) -> ThetaPolynomial:
    """Closed-form inverse of the ABC derivative applied to ``g``.

    Returns ``(1-theta)/b_norm * g + theta/b_norm * I^theta g`` where the
    Riemann-Liouville integral acts term by term as
    ``t**a -> Gamma(a+1)/Gamma(a+theta+1) * t**(a+theta)``.
    In exponent pairs this moves (m, n) to (m, n+1).
    """
    theta = check_theta(g.theta if theta is None else theta)
    if g.theta != theta:
        raise MismatchedOrderError(
            f"polynomial has order {g.theta}, operator requested {theta}"
        )
    b_norm = float(b_norm)
    if not b_norm > 0.0:
        raise DomainError(f"normalization ABC(theta) must be positive, got {b_norm!r}")

    local = (1.0 - theta) / b_norm
    memory = theta / b_norm
    acc: dict[tuple[int, int], float] = {}
    for (m, n), c in g._terms:
        if local != 0.0:
            acc[(m, n)] = acc.get((m, n), 0.0) + local * c
        a = m + n * theta
        key = (m, n + 1)
        acc[key] = acc.get(key, 0.0) + memory * c * gamma_ratio(a + 1.0, a + theta + 1.0)
    return ThetaPolynomial(acc, theta)

