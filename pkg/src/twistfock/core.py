"""Exact scalars, multi-indices and the formal hbar ring.

Rationals are gmpy2 ``mpq`` values internally (falling back to
:class:`fractions.Fraction` when gmpy2 is missing); both compare and hash
alike, and public accessors hand back Fractions.  A multi-index is a tuple
of non-negative ints of length N.  Cutoffs are ints, or ``EXACT``
(``math.inf``) for objects that are known completely (polynomials).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence, Tuple, Union

MultiIndex = Tuple[int, ...]
Scalar = Union[int, Fraction]

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

EXACT = math.inf
_SCALARS = (int, Fraction, type(Q(0)))


class TwistFockError(Exception):
    """Base class for every error raised by the package."""

    code = 3


class StructureError(TwistFockError, ValueError):
    """Operands disagree on dimension or shape."""


class DomainError(TwistFockError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateMetricError(DomainError):
    """The metric (or a series matrix) has a singular constant term."""


class RepresentationError(DomainError):
    """The truncated H-matrix is singular."""

    def __init__(self, message: str, degree: int | None = None):
        super().__init__(message)
        self.degree = degree


class PoleError(DomainError):
    """A Gamma-function coefficient hits a pole at the requested hbar."""


class ChartError(DomainError):
    """A coordinate transition is not invertible at its base point."""


class PrecisionError(TwistFockError):
    """The certified region of a result is smaller than requested."""


class InvariantViolation(TwistFockError, AssertionError):
    """An internal consistency check failed; indicates a bug."""


def to_fraction(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and rationals.  Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise DomainError(f"malformed rational {value!r}") from exc
    if isinstance(value, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    try:
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise TypeError(f"cannot interpret {value!r} as an exact rational") from None


def qq(value):
    """Internal rational type from anything :func:`to_fraction` accepts."""
    if isinstance(value, int) and not isinstance(value, bool):
        return Q(value)
    if Q is not Fraction and type(value) is Q:
        return value
    f = to_fraction(value)
    return Q(f.numerator, f.denominator)


def fraction_str(q) -> str:
    q = to_fraction(q)
    return f"{q.numerator}/{q.denominator}"


# --- multi-indices -------------------------------------------------------


def zero_index(n: int) -> MultiIndex:
    return (0,) * n


def unit_index(n: int, i: int) -> MultiIndex:
    if not 0 <= i < n:
        raise StructureError(f"index {i} out of range for dimension {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def madd(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def msub(a: MultiIndex, b: MultiIndex) -> MultiIndex | None:
    """``a - b``, or None when some entry would go negative."""
    out = tuple(x - y for x, y in zip(a, b))
    if any(x < 0 for x in out):
        return None
    return out


def mdeg(a: MultiIndex) -> int:
    return sum(a)


@lru_cache(maxsize=None)
def mfact(a: MultiIndex) -> int:
    out = 1
    for x in a:
        out *= math.factorial(x)
    return out


def mbinom(a: MultiIndex, b: MultiIndex) -> int:
    out = 1
    for x, y in zip(a, b):
        out *= math.comb(x, y)
    return out


def mleq(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


@lru_cache(maxsize=None)
def multi_indices(n: int, max_degree: int, min_degree: int = 0) -> Tuple[MultiIndex, ...]:
    """All multi-indices of length n with min_degree <= |m| <= max_degree.

    Sorted by total degree, then reverse-lexicographically within a degree.
    """
    out = []
    for d in range(min_degree, max_degree + 1):
        out.extend(_indices_of_degree(n, d))
    return tuple(out)


def _indices_of_degree(n: int, d: int) -> list:
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    res = []
    for first in range(d, -1, -1):
        for rest in _indices_of_degree(n - 1, d - first):
            res.append((first,) + rest)
    return res


def sub_indices(a: MultiIndex) -> Iterable[MultiIndex]:
    """Every multi-index g with g <= a componentwise."""
    return product(*(range(x + 1) for x in a))


def cutoff_min(*cs) -> float | int:
    return min(cs)


def cutoff_shift(c, delta: int):
    if c == EXACT:
        return EXACT
    return c + delta


# --- formal hbar ---------------------------------------------------------


class HbarPoly:
    """Polynomial in hbar truncated after hbar**order.

    Coefficients are Fractions; products drop every power above ``order``.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Sequence[Scalar], order: int):
        if order < 0:
            raise DomainError("hbar order must be non-negative")
        cs = [qq(c) for c in list(coeffs)[: order + 1]]
        cs.extend(Q(0) for _ in range(order + 1 - len(cs)))
        self.coeffs = cs
        self.order = order

    @classmethod
    def constant(cls, c: Scalar, order: int) -> "HbarPoly":
        return cls([c], order)

    @classmethod
    def hbar(cls, order: int) -> "HbarPoly":
        return cls([0, 1], order)

    def _coerce(self, other) -> "HbarPoly":
        if isinstance(other, HbarPoly):
            return other
        if isinstance(other, _SCALARS):
            return HbarPoly([other], self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        k = min(self.order, o.order)
        return HbarPoly([a + b for a, b in zip(self.coeffs[: k + 1], o.coeffs[: k + 1])], k)

    __radd__ = __add__

    def __neg__(self):
        return HbarPoly([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return HbarPoly([c * other for c in self.coeffs], self.order)
        if not isinstance(other, HbarPoly):
            return NotImplemented
        k = min(self.order, other.order)
        out = [Q(0)] * (k + 1)
        for i, a in enumerate(self.coeffs[: k + 1]):
            if a == 0:
                continue
            for j in range(k + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return HbarPoly(out, k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _SCALARS):
            return HbarPoly([c / other for c in self.coeffs], self.order)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, _SCALARS):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        if isinstance(other, HbarPoly):
            k = min(self.order, other.order)
            return self.coeffs[: k + 1] == other.coeffs[: k + 1]
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def evaluate(self, hbar: Scalar) -> Fraction:
        """Substitute a numeric hbar.  The reverse direction does not exist."""
        h = qq(hbar)
        out = Q(0)
        for c in reversed(self.coeffs):
            out = out * h + c
        return to_fraction(out)

    def inverse(self) -> "HbarPoly":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise DomainError("HbarPoly with zero constant term is not invertible")
        out = [Q(0)] * (self.order + 1)
        out[0] = 1 / c0
        for n in range(1, self.order + 1):
            s = sum(self.coeffs[j] * out[n - j] for j in range(1, n + 1))
            out[n] = -s / c0
        return HbarPoly(out, self.order)

    def __repr__(self):
        terms = [f"{c}*h^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"HbarPoly({' + '.join(terms) or '0'}; O(h^{self.order + 1}))"
