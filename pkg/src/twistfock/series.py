"""Truncated power series in z^1..z^N and their conjugates.

A series knows its coefficients for every monomial z^m zbar^k with
|m| <= dz and |k| <= dzb.  Anything beyond that box is *unknown*, not zero.
Either cutoff may be ``EXACT`` (infinity) when the object is a polynomial
known completely.  Arithmetic uses min-semantics: the result is certified on
the intersection of the operands' boxes, which is always honest because the
box complement is an ideal.

Internally a monomial is a packed integer holding (|m|, |k|, m_1..m_N,
k_1..k_N) in 16-bit slots, so multiplying monomials is integer addition and
degree tests are bit masks.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

from .core import (
    EXACT,
    DegenerateMetricError,
    DomainError,
    MultiIndex,
    Q,
    StructureError,
    fraction_str,
    qq,
    to_fraction,
)

_BITS = 16
_MASK = (1 << _BITS) - 1


def _pack(m: Sequence[int], k: Sequence[int]) -> int:
    key = 0
    shift = 2 * _BITS
    for x in tuple(m) + tuple(k):
        if x < 0:
            raise DomainError("negative exponent")
        key |= x << shift
        shift += _BITS
    return key | sum(m) | (sum(k) << _BITS)


def _unpack(key: int, n: int) -> Tuple[MultiIndex, MultiIndex]:
    vals = []
    key >>= 2 * _BITS
    for _ in range(2 * n):
        vals.append(key & _MASK)
        key >>= _BITS
    return tuple(vals[:n]), tuple(vals[n:])


def _slot_shift(n: int, holo: bool, i: int) -> int:
    return (2 + (i if holo else n + i)) * _BITS


def _cut(c):
    """Normalize a cutoff: ints stay ints, None/inf mean exact."""
    if c is None or c == EXACT:
        return EXACT
    c = int(c)
    return c


class TruncatedSeries:
    """Immutable truncated series with exact rational coefficients."""

    __slots__ = ("N", "dz", "dzb", "_t")

    def __init__(self, N: int, terms=None, dz=EXACT, dzb=EXACT):
        self.N = int(N)
        self.dz = _cut(dz)
        self.dzb = _cut(dzb)
        d: Dict[int, object] = {}
        if terms:
            for (m, k), c in terms.items():
                m, k = tuple(m), tuple(k)
                if len(m) != self.N or len(k) != self.N:
                    raise StructureError("multi-index length does not match N")
                if sum(m) > self.dz or sum(k) > self.dzb:
                    continue
                c = qq(c)
                if c:
                    key = _pack(m, k)
                    d[key] = d.get(key, 0) + c
        self._t = {k: v for k, v in d.items() if v}

    # construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, N, d, dz, dzb) -> "TruncatedSeries":
        s = cls.__new__(cls)
        s.N, s.dz, s.dzb, s._t = N, dz, dzb, d
        return s

    @classmethod
    def zero(cls, N, dz=EXACT, dzb=EXACT):
        return cls._raw(N, {}, _cut(dz), _cut(dzb))

    @classmethod
    def constant(cls, N, c, dz=EXACT, dzb=EXACT):
        c = qq(c)
        return cls._raw(N, {0: c} if c else {}, _cut(dz), _cut(dzb))

    @classmethod
    def monomial(cls, m, k, c=1, dz=EXACT, dzb=EXACT):
        m, k = tuple(m), tuple(k)
        return cls(len(m), {(m, k): c}, dz, dzb)

    @classmethod
    def z(cls, N, i, dz=EXACT, dzb=EXACT):
        m = tuple(1 if j == i else 0 for j in range(N))
        return cls.monomial(m, (0,) * N, 1, dz, dzb)

    @classmethod
    def zb(cls, N, i, dz=EXACT, dzb=EXACT):
        k = tuple(1 if j == i else 0 for j in range(N))
        return cls.monomial((0,) * N, k, 1, dz, dzb)

    # inspection -----------------------------------------------------------

    @property
    def cutoffs(self):
        return (self.dz, self.dzb)

    def terms(self) -> Dict[Tuple[MultiIndex, MultiIndex], Fraction]:
        return {_unpack(k, self.N): to_fraction(v) for k, v in self._t.items()}

    def raw_items(self):
        """(m, k, coefficient) triples with the internal rational type."""
        for key, v in self._t.items():
            m, k = _unpack(key, self.N)
            yield m, k, v

    def coeff(self, m, k) -> Fraction:
        m, k = tuple(m), tuple(k)
        if sum(m) > self.dz or sum(k) > self.dzb:
            raise DomainError(f"coefficient of {m},{k} lies outside the certified box")
        return to_fraction(self._t.get(_pack(m, k), 0))

    def __len__(self):
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def degrees(self) -> Tuple[int, int]:
        """Largest |m| and |k| among stored terms (-1 for the zero series)."""
        if not self._t:
            return (-1, -1)
        return (max(k & _MASK for k in self._t), max((k >> _BITS) & _MASK for k in self._t))

    def is_holomorphic(self) -> bool:
        return all((k >> _BITS) & _MASK == 0 for k in self._t)

    def is_antiholomorphic(self) -> bool:
        return all(k & _MASK == 0 for k in self._t)

    def constant_term(self):
        return self._t.get(0, Q(0))

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if other.N != self.N:
            raise StructureError(f"dimension mismatch {self.N} vs {other.N}")

    def truncate(self, dz=EXACT, dzb=EXACT) -> "TruncatedSeries":
        dz = min(self.dz, _cut(dz))
        dzb = min(self.dzb, _cut(dzb))
        if dz == self.dz and dzb == self.dzb:
            return self
        d = {k: v for k, v in self._t.items() if (k & _MASK) <= dz and ((k >> _BITS) & _MASK) <= dzb}
        return TruncatedSeries._raw(self.N, d, dz, dzb)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.N, other)
        self._check(other)
        dz, dzb = min(self.dz, other.dz), min(self.dzb, other.dzb)
        a, b = self.truncate(dz, dzb), other.truncate(dz, dzb)
        d = dict(a._t)
        for k, v in b._t.items():
            s = d.get(k)
            if s is None:
                d[k] = v
            else:
                s = s + v
                if s:
                    d[k] = s
                else:
                    del d[k]
        return TruncatedSeries._raw(self.N, d, dz, dzb)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.N, {k: -v for k, v in self._t.items()}, self.dz, self.dzb)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.N, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = qq(c)
        if not c:
            return TruncatedSeries._raw(self.N, {}, self.dz, self.dzb)
        return TruncatedSeries._raw(self.N, {k: v * c for k, v in self._t.items()}, self.dz, self.dzb)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        dz, dzb = min(self.dz, other.dz), min(self.dzb, other.dzb)
        return TruncatedSeries._raw(self.N, _mul_dicts(self._t, other._t, dz, dzb), dz, dzb)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        return self.scale(1 / qq(c))

    def __pow__(self, e: int):
        if e < 0:
            raise DomainError("negative powers need series_reciprocal")
        out = TruncatedSeries.constant(self.N, 1, self.dz, self.dzb)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other):
        """Equality inside the common certified box."""
        if isinstance(other, (int, Fraction)) or (Q is not Fraction and isinstance(other, type(Q(0)))):
            other = TruncatedSeries.constant(self.N, other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.N != self.N:
            return False
        return (self - other).is_zero()

    __hash__ = None

    # calculus -------------------------------------------------------------

    def diff(self, var: str, i: int) -> "TruncatedSeries":
        """Partial derivative by z^i (var='z') or zbar^i (var='zb')."""
        holo = var == "z"
        if var not in ("z", "zb"):
            raise DomainError("var must be 'z' or 'zb'")
        if not 0 <= i < self.N:
            raise StructureError("derivative index out of range")
        sh = _slot_shift(self.N, holo, i)
        dec = (1 << sh) + (1 if holo else (1 << _BITS))
        d = {}
        for k, v in self._t.items():
            e = (k >> sh) & _MASK
            if e:
                d[k - dec] = v * e
        dz = self.dz - 1 if holo and self.dz != EXACT else self.dz
        dzb = self.dzb - 1 if (not holo) and self.dzb != EXACT else self.dzb
        return TruncatedSeries._raw(self.N, d, dz, dzb)

    def diff_multi(self, var: str, alpha: Sequence[int]) -> "TruncatedSeries":
        out = self
        for i, a in enumerate(alpha):
            for _ in range(a):
                out = out.diff(var, i)
        return out

    def conj(self) -> "TruncatedSeries":
        """Complex conjugate (coefficients are real, so swap m and k)."""
        d = {}
        for key, v in self._t.items():
            m, k = _unpack(key, self.N)
            d[_pack(k, m)] = v
        return TruncatedSeries._raw(self.N, d, self.dzb, self.dz)

    def mul_monomial(self, m, k, c=1) -> "TruncatedSeries":
        """Multiply by c z^m zbar^k; certification moves up with the shift."""
        shift = _pack(m, k)
        c = qq(c)
        dz = self.dz + sum(m) if self.dz != EXACT else EXACT
        dzb = self.dzb + sum(k) if self.dzb != EXACT else EXACT
        d = {key + shift: v * c for key, v in self._t.items()} if c else {}
        return TruncatedSeries._raw(self.N, d, dz, dzb)

    def holomorphic_part(self) -> "TruncatedSeries":
        """f(z, 0)."""
        return TruncatedSeries._raw(self.N, {k: v for k, v in self._t.items() if not (k >> _BITS) & _MASK}, self.dz, EXACT)

    def antiholomorphic_part(self) -> "TruncatedSeries":
        """f(0, zbar)."""
        return TruncatedSeries._raw(self.N, {k: v for k, v in self._t.items() if not k & _MASK}, EXACT, self.dzb)

    def map_coeffs(self, fn: Callable) -> "TruncatedSeries":
        d = {}
        for k, v in self._t.items():
            w = fn(v)
            if w:
                d[k] = w
        return TruncatedSeries._raw(self.N, d, self.dz, self.dzb)

    def evaluate(self, z: Sequence[complex], zb: Sequence[complex] | None = None) -> complex:
        """Float evaluation of the stored polynomial (zb defaults to conj(z))."""
        if zb is None:
            zb = [complex(x).conjugate() for x in z]
        total = 0j
        for m, k, c in self.raw_items():
            t = complex(float(c))
            for x, e in zip(z, m):
                t *= complex(x) ** e
            for x, e in zip(zb, k):
                t *= complex(x) ** e
            total += t
        return total

    def graded(self) -> List[Dict[int, object]]:
        """Split into homogeneous pieces by total degree |m| + |k|."""
        out: List[Dict[int, object]] = []
        for k, v in self._t.items():
            d = (k & _MASK) + ((k >> _BITS) & _MASK)
            while len(out) <= d:
                out.append({})
            out[d][k] = v
        return out

    # serialization --------------------------------------------------------

    def to_json_obj(self) -> dict:
        items = sorted(self.terms().items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0]))
        return {
            "N": self.N,
            "Dz": None if self.dz == EXACT else self.dz,
            "Dzb": None if self.dzb == EXACT else self.dzb,
            "terms": [{"m": list(m), "k": list(k), "c": fraction_str(c)} for (m, k), c in items],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TruncatedSeries":
        try:
            N = int(obj["N"])
            terms = {}
            for t in obj["terms"]:
                key = (tuple(int(x) for x in t["m"]), tuple(int(x) for x in t["k"]))
                terms[key] = terms.get(key, Fraction(0)) + to_fraction(str(t["c"]))
            return cls(N, terms, obj.get("Dz"), obj.get("Dzb"))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed series JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, text: str) -> "TruncatedSeries":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self):
        parts = []
        for (m, k), c in sorted(self.terms().items(), key=lambda kv: (sum(kv[0][0]) + sum(kv[0][1]), kv[0])):
            parts.append(f"{c}*z^{list(m)}*zb^{list(k)}")
        return f"TruncatedSeries(N={self.N}, cut=({self.dz},{self.dzb}); {' + '.join(parts) or '0'})"


def _mul_dicts(a: dict, b: dict, dz, dzb) -> dict:
    if len(a) > len(b):
        a, b = b, a
    bi = sorted(b.items(), key=lambda kv: kv[0] & _MASK)
    out: dict = {}
    get = out.get
    exact_z = dz == EXACT
    exact_zb = dzb == EXACT
    for k1, c1 in a.items():
        a1 = k1 & _MASK
        b1 = (k1 >> _BITS) & _MASK
        if (not exact_z and a1 > dz) or (not exact_zb and b1 > dzb):
            continue
        for k2, c2 in bi:
            if not exact_z and a1 + (k2 & _MASK) > dz:
                break
            if not exact_zb and b1 + ((k2 >> _BITS) & _MASK) > dzb:
                continue
            key = k1 + k2
            out[key] = get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _require_finite(f: TruncatedSeries, what: str):
    if f.dz == EXACT or f.dzb == EXACT:
        nz_z, nz_zb = f.degrees()
        # a series with no z (resp. zbar) dependence can stay exact in that group
        if (f.dz == EXACT and nz_z > 0) or (f.dzb == EXACT and nz_zb > 0):
            raise DomainError(f"{what} of a non-constant exact polynomial is an infinite series; truncate first")


def _hom_mul(a: dict, b: dict, dz, dzb) -> dict:
    return _mul_dicts(a, b, dz, dzb) if a and b else {}


def _from_graded(N, parts: List[dict], dz, dzb) -> TruncatedSeries:
    d = {}
    for p in parts:
        for k, v in p.items():
            if v:
                d[k] = v
    return TruncatedSeries._raw(N, d, dz, dzb)


def _max_total(f: TruncatedSeries) -> int:
    if f.dz == EXACT and f.dzb == EXACT:
        return 0
    if f.dz == EXACT:
        return f.dzb
    if f.dzb == EXACT:
        return f.dz
    return f.dz + f.dzb


def series_exp(f: TruncatedSeries) -> TruncatedSeries:
    """exp(f) for f with zero constant term, via d*g_d = sum_j j f_j g_{d-j}."""
    if f.constant_term():
        raise DomainError("series_exp needs a zero constant term")
    if f.is_zero():
        return TruncatedSeries.constant(f.N, 1, f.dz, f.dzb)
    _require_finite(f, "exp")
    fg = f.graded()
    D = _max_total(f)
    g: List[dict] = [{0: Q(1)}]
    for d in range(1, D + 1):
        acc: dict = {}
        for j in range(1, min(d, len(fg) - 1) + 1):
            if not fg[j] or not g[d - j]:
                continue
            for k, v in _hom_mul(fg[j], g[d - j], f.dz, f.dzb).items():
                acc[k] = acc.get(k, 0) + v * j
        g.append({k: v / d for k, v in acc.items() if v})
    return _from_graded(f.N, g, f.dz, f.dzb)


def series_log(g: TruncatedSeries) -> TruncatedSeries:
    """log(g) for g with constant term 1."""
    if g.constant_term() != 1:
        raise DomainError("series_log needs constant term 1")
    _require_finite(g, "log")
    gg = g.graded()
    D = _max_total(g)
    f: List[dict] = [{}]
    for d in range(1, D + 1):
        acc = {k: v * d for k, v in (gg[d] if d < len(gg) else {}).items()}
        for j in range(1, d):
            if not f[j] or d - j >= len(gg) or not gg[d - j]:
                continue
            for k, v in _hom_mul(f[j], gg[d - j], g.dz, g.dzb).items():
                acc[k] = acc.get(k, 0) - v * j
        f.append({k: v / d for k, v in acc.items() if v})
    return _from_graded(g.N, f, g.dz, g.dzb)


def series_power(g: TruncatedSeries, a) -> TruncatedSeries:
    """g**a for rational a and g with constant term 1."""
    a = qq(a)
    if g.constant_term() != 1:
        raise DomainError("series_power needs constant term 1")
    if a == int(a) and a >= 0:
        return g ** int(a)
    _require_finite(g, "power")
    gg = g.graded()
    D = _max_total(g)
    h: List[dict] = [{0: Q(1)}]
    for d in range(1, D + 1):
        acc: dict = {}
        for j in range(1, min(d, len(gg) - 1) + 1):
            if not gg[j] or not h[d - j]:
                continue
            w = a * j - (d - j)
            if not w:
                continue
            for k, v in _hom_mul(gg[j], h[d - j], g.dz, g.dzb).items():
                acc[k] = acc.get(k, 0) + v * w
        h.append({k: v / d for k, v in acc.items() if v})
    return _from_graded(g.N, h, g.dz, g.dzb)


def series_reciprocal(g: TruncatedSeries) -> TruncatedSeries:
    c0 = g.constant_term()
    if not c0:
        raise DomainError("series_reciprocal needs a nonzero constant term")
    if g.is_zero() or len(g) == 1:
        return TruncatedSeries.constant(g.N, 1 / c0, g.dz, g.dzb)
    _require_finite(g, "reciprocal")
    gg = g.graded()
    D = _max_total(g)
    inv0 = 1 / c0
    h: List[dict] = [{0: inv0}]
    for d in range(1, D + 1):
        acc: dict = {}
        for j in range(1, min(d, len(gg) - 1) + 1):
            if not gg[j] or not h[d - j]:
                continue
            for k, v in _hom_mul(gg[j], h[d - j], g.dz, g.dzb).items():
                acc[k] = acc.get(k, 0) - v
        h.append({k: v * inv0 for k, v in acc.items() if v})
    return _from_graded(g.N, h, g.dz, g.dzb)


def series_compose(outer: Sequence, f: TruncatedSeries) -> TruncatedSeries:
    """sum_j outer[j] * f**j for a univariate outer series and f(0) = 0.

    ``outer`` may be finite (a polynomial) even when f is exact; otherwise f
    must have finite cutoffs so that only finitely many powers matter.
    """
    if f.constant_term():
        raise DomainError("series_compose needs f with zero constant term")
    outer = [qq(c) for c in outer]
    D = _max_total(f)
    if D == 0 and not f.is_zero():
        terms = len(outer)
    else:
        terms = min(len(outer), D + 1)
    out = TruncatedSeries.constant(f.N, 0, f.dz, f.dzb)
    for c in reversed(outer[:terms]):
        out = out * f + c
    return out


def series_diff(f: TruncatedSeries, var: str, i: int) -> TruncatedSeries:
    return f.diff(var, i)


def series_arith(f: TruncatedSeries, g, op: str) -> TruncatedSeries:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "scale":
        return f.scale(g)
    raise DomainError(f"unknown op {op!r}")


def log1p_coeffs(n: int, sign: int = 1) -> List[Fraction]:
    """Coefficients of ln(1 + sign*t) up to t**n."""
    return [Fraction(0)] + [Fraction(sign ** j * (-1) ** (j + 1), j) for j in range(1, n + 1)]


class SeriesMatrix:
    """Square matrix of TruncatedSeries."""

    def __init__(self, rows: Sequence[Sequence[TruncatedSeries]]):
        self.rows = [list(r) for r in rows]
        self.n = len(self.rows)
        if any(len(r) != self.n for r in self.rows):
            raise StructureError("SeriesMatrix must be square")

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def identity(cls, n: int, N: int, dz=EXACT, dzb=EXACT) -> "SeriesMatrix":
        return cls([[TruncatedSeries.constant(N, 1 if i == j else 0, dz, dzb) for j in range(n)] for i in range(n)])

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix([[self.rows[j][i] for j in range(self.n)] for i in range(self.n)])

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if other.n != self.n:
            raise StructureError("matrix size mismatch")
        out = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                acc = self.rows[i][0] * other.rows[0][j]
                for k in range(1, self.n):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out)

    def constant_matrix(self):
        return [[to_fraction(e.constant_term()) for e in r] for r in self.rows]

    def map(self, fn) -> "SeriesMatrix":
        return SeriesMatrix([[fn(e) for e in r] for r in self.rows])

    def conj(self) -> "SeriesMatrix":
        return self.map(lambda e: e.conj())

    def is_identity(self) -> bool:
        return all(self.rows[i][j] == (1 if i == j else 0) for i in range(self.n) for j in range(self.n))

    def __repr__(self):
        return f"SeriesMatrix({self.rows!r})"


def matrix_inverse(M: SeriesMatrix) -> SeriesMatrix:
    """Gauss-Jordan elimination over the series ring.

    Pivots are chosen by a nonzero constant term, so the only failure mode is
    a singular constant-term matrix.
    """
    n = M.n
    if n == 0:
        return SeriesMatrix([])
    N = M.rows[0][0].N
    A = [list(r) for r in M.rows]
    I = [[TruncatedSeries.constant(N, 1 if i == j else 0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col].constant_term()), None)
        if piv is None:
            raise DegenerateMetricError("constant term of the matrix is singular")
        A[col], A[piv] = A[piv], A[col]
        I[col], I[piv] = I[piv], I[col]
        inv = series_reciprocal(A[col][col])
        A[col] = [e * inv for e in A[col]]
        I[col] = [e * inv for e in I[col]]
        for r in range(n):
            if r == col or A[r][col].is_zero():
                continue
            fac = A[r][col]
            A[r] = [a - fac * b for a, b in zip(A[r], A[col])]
            I[r] = [a - fac * b for a, b in zip(I[r], I[col])]
    return SeriesMatrix(I)


class HbarSeries:
    """Formal series sum_n hbar^n F_n with TruncatedSeries coefficients, n <= K."""

    __slots__ = ("parts", "order")

    def __init__(self, parts: Sequence[TruncatedSeries], order: int | None = None):
        parts = list(parts)
        if not parts:
            raise StructureError("HbarSeries needs at least one part")
        if order is None:
            order = len(parts) - 1
        N = parts[0].N
        while len(parts) <= order:
            parts.append(TruncatedSeries.zero(N, parts[0].dz, parts[0].dzb))
        self.parts = parts[: order + 1]
        self.order = order

    @property
    def N(self):
        return self.parts[0].N

    @classmethod
    def of(cls, f: TruncatedSeries, order: int) -> "HbarSeries":
        return cls([f] + [TruncatedSeries.zero(f.N, f.dz, f.dzb)] * order, order)

    def cutoffs(self):
        return (min(p.dz for p in self.parts), min(p.dzb for p in self.parts))

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            other = HbarSeries.of(other, self.order)
        k = min(self.order, other.order)
        return HbarSeries([a + b for a, b in zip(self.parts[: k + 1], other.parts[: k + 1])], k)

    def __neg__(self):
        return HbarSeries([-p for p in self.parts], self.order)

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            other = HbarSeries.of(other, self.order)
        return self + (-other)

    def scale(self, c):
        return HbarSeries([p.scale(c) for p in self.parts], self.order)

    def shift(self, s: int = 1) -> "HbarSeries":
        """Multiply by hbar**s."""
        z = TruncatedSeries.zero(self.N, self.parts[0].dz, self.parts[0].dzb)
        return HbarSeries([z] * s + self.parts[: self.order + 1 - s], self.order)

    def shift_pad(self, j: int, K: int) -> "HbarSeries":
        """Multiply by hbar**j and re-cap the order at K."""
        z = TruncatedSeries.zero(self.N, *self.cutoffs())
        return HbarSeries([z] * j + self.parts, K)

    def mul_poly(self, p) -> "HbarSeries":
        """Multiply by an HbarPoly scalar."""
        k = min(self.order, p.order)
        out = []
        for n in range(k + 1):
            acc = TruncatedSeries.zero(self.N, self.parts[0].dz, self.parts[0].dzb)
            for j in range(n + 1):
                c = p.coeffs[j]
                if c:
                    acc = acc + self.parts[n - j].scale(c)
            out.append(acc)
        return HbarSeries(out, k)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts)

    def truncate(self, dz, dzb) -> "HbarSeries":
        return HbarSeries([p.truncate(dz, dzb) for p in self.parts], self.order)

    def conj(self) -> "HbarSeries":
        return HbarSeries([p.conj() for p in self.parts], self.order)

    def evaluate_hbar(self, hbar) -> TruncatedSeries:
        """Numeric hbar substitution (order-K truncation)."""
        h = qq(hbar)
        out = self.parts[-1]
        for p in reversed(self.parts[:-1]):
            out = out * h + p
        return out

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            other = HbarSeries.of(other, self.order)
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def to_json_obj(self) -> dict:
        return {"order": self.order, "hbar_parts": [p.to_json_obj() for p in self.parts]}

    @classmethod
    def from_json_obj(cls, obj) -> "HbarSeries":
        return cls([TruncatedSeries.from_json_obj(p) for p in obj["hbar_parts"]], int(obj["order"]))

    def __repr__(self):
        return f"HbarSeries(order={self.order}, parts={self.parts!r})"
