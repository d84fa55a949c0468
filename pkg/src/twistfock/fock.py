"""Twisted Fock algebra at a fixed rational hbar.

Everything is stored in the unnormalized basis

    E_{m,n} = z^m * exp(-Phi/hbar) * (dPhi/hbar)^n_*  = sqrt(m! n!) |m><n|,

which as a function reads E_{m,n} = n! sum_k H_{n,k} z^m zbar^k exp(-Phi/hbar).
Products obey E_{m,n} E_{k,l} = delta_{n,k} n! E_{m,l}, so all structure
constants stay rational.

Certification
-------------
A FockMatrix is only trusted on the box |m| <= cz, |n| <= czb (``certified``);
``EXACT`` in a slot means every nonzero entry is stored.  ``band`` (lo, hi),
when known, says A_{m,n} = 0 unless lo <= |n| - |m| <= hi, including entries
outside the box.  Products use the band to bound the inner sum.  ``lost``
records that an operation dropped entries or relied on the truncated H
inverse of a non-degree-diagonal potential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import (
    EXACT,
    DomainError,
    MultiIndex,
    PrecisionError,
    Q,
    StructureError,
    fraction_str,
    madd,
    mdeg,
    mfact,
    msub,
    multi_indices,
    qq,
    to_fraction,
    unit_index,
    zero_index,
)
from .kahler import KahlerData
from .series import TruncatedSeries, series_exp

KINDS = ("create", "annihilate_underline", "a_bar", "a_underline_dagger")
_KIND_ALIASES = {
    "create": "create",
    "adag": "create",
    "a_dagger": "create",
    "annihilate_underline": "annihilate_underline",
    "a_underline": "annihilate_underline",
    "ua": "annihilate_underline",
    "a_bar": "a_bar",
    "a": "a_bar",
    "a_underline_dagger": "a_underline_dagger",
    "uadag": "a_underline_dagger",
}


def _require_numeric(kd: KahlerData):
    if kd.hbar is None or kd.D is None:
        raise DomainError("Fock objects need KahlerData with a numeric hbar and a cutoff")


def _cadd(c, d):
    return EXACT if c == EXACT else c + d


@dataclass(frozen=True)
class Generator:
    """a^dagger_i = z^i, a_underline_i = d_i Phi / hbar, a_i = zbar^i,
    a_underline^dagger_i = d_ibar Phi / hbar, multiplied from ``side``."""

    kind: str
    i: int
    side: str = "left"

    def __post_init__(self):
        k = _KIND_ALIASES.get(self.kind)
        if k is None:
            raise DomainError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "kind", k)
        if self.side not in ("left", "right"):
            raise DomainError("side must be 'left' or 'right'")

    @classmethod
    def parse(cls, text: str) -> "Generator":
        """``left:create:0`` style."""
        try:
            side, kind, i = text.split(":")
            return cls(kind, int(i), side)
        except ValueError as exc:
            raise DomainError(f"malformed generator {text!r}; expected side:kind:index") from exc


class WeightedElement:
    """The function P(z, zbar) exp(-Phi/hbar)."""

    def __init__(self, P: TruncatedSeries, kd: KahlerData, band=None):
        _require_numeric(kd)
        if P.N != kd.N:
            raise StructureError("dimension mismatch")
        self.P = P
        self.kd = kd
        self.band = band if band is not None else _series_band(P)

    def __eq__(self, other):
        if not isinstance(other, WeightedElement):
            return NotImplemented
        return other.kd is self.kd and self.P == other.P

    __hash__ = None

    def __sub__(self, other):
        return WeightedElement(self.P - other.P, self.kd, None)

    def truncate(self, dz, dzb):
        return WeightedElement(self.P.truncate(dz, dzb), self.kd, self.band)

    def __repr__(self):
        return f"WeightedElement({self.P!r})"


def _series_band(P: TruncatedSeries):
    """Band of |k| - |m| over the terms, when P is an exact polynomial."""
    if P.dz != EXACT or P.dzb != EXACT:
        return None
    diffs = [sum(k) - sum(m) for (m, k) in P.terms()]
    if not diffs:
        return (0, 0)
    return (min(diffs), max(diffs))


class FockMatrix:
    """Sparse matrix in the E basis with certification data."""

    def __init__(self, kd: KahlerData, entries=None, certified=(EXACT, EXACT), band=None, lost=False):
        _require_numeric(kd)
        self.kd = kd
        cz, czb = certified
        self.certified = (EXACT if cz is None else cz, EXACT if czb is None else czb)
        self.band = band
        self.lost = lost
        d = {}
        for (m, n), v in (entries or {}).items():
            m, n = tuple(m), tuple(n)
            if len(m) != kd.N or len(n) != kd.N:
                raise StructureError("multi-index length does not match N")
            if mdeg(m) > self.certified[0] or mdeg(n) > self.certified[1]:
                continue
            v = qq(v)
            if v:
                d[(m, n)] = d.get((m, n), 0) + v
        self.entries = {k: v for k, v in d.items() if v}

    @classmethod
    def _raw(cls, kd, entries, certified, band, lost):
        A = cls.__new__(cls)
        A.kd, A.entries, A.certified, A.band, A.lost = kd, entries, certified, band, lost
        return A

    @property
    def N(self):
        return self.kd.N

    def get(self, m, n) -> Fraction:
        m, n = tuple(m), tuple(n)
        if mdeg(m) > self.certified[0] or mdeg(n) > self.certified[1]:
            raise PrecisionError(f"entry {m},{n} lies outside the certified block {self.certified}")
        return to_fraction(self.entries.get((m, n), 0))

    def truncate(self, cz, czb) -> "FockMatrix":
        cz, czb = min(self.certified[0], cz), min(self.certified[1], czb)
        d = {k: v for k, v in self.entries.items() if mdeg(k[0]) <= cz and mdeg(k[1]) <= czb}
        return FockMatrix._raw(self.kd, d, (cz, czb), self.band, self.lost)

    def _check(self, other):
        if not isinstance(other, FockMatrix):
            raise TypeError("expected a FockMatrix")
        if other.kd is not self.kd:
            if other.kd.N != self.kd.N or other.kd.hbar != self.kd.hbar:
                raise StructureError("FockMatrix operands come from different KahlerData")

    def __add__(self, other):
        self._check(other)
        cz = min(self.certified[0], other.certified[0])
        czb = min(self.certified[1], other.certified[1])
        d = dict(self.truncate(cz, czb).entries)
        for k, v in other.truncate(cz, czb).entries.items():
            s = d.get(k, 0) + v
            if s:
                d[k] = s
            else:
                d.pop(k, None)
        band = _band_union(self.band, other.band)
        return FockMatrix._raw(self.kd, d, (cz, czb), band, self.lost or other.lost)

    def scale(self, c) -> "FockMatrix":
        c = qq(c)
        d = {k: v * c for k, v in self.entries.items()} if c else {}
        return FockMatrix._raw(self.kd, d, self.certified, self.band, self.lost)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        return fock_mul(self, other)

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, FockMatrix):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def diagonal(self) -> Dict[MultiIndex, Fraction]:
        return {m: to_fraction(v) for (m, n), v in self.entries.items() if m == n}

    def normalized_entries(self) -> Dict[Tuple[MultiIndex, MultiIndex], Tuple[Fraction, Fraction]]:
        """Coefficients on |m><n| as (rational, radicand): value = r * sqrt(s)."""
        out = {}
        for (m, n), v in self.entries.items():
            out[(m, n)] = (to_fraction(v), Fraction(mfact(m) * mfact(n)))
        return out

    def to_json_obj(self) -> dict:
        cz, czb = self.certified
        return {
            "hbar": fraction_str(self.kd.hbar),
            "model": self.kd.model,
            "N": self.N,
            "D": self.kd.D,
            "entries": [
                {"m": list(m), "n": list(n), "c": fraction_str(v)}
                for (m, n), v in sorted(self.entries.items(), key=lambda kv: (mdeg(kv[0][0]), mdeg(kv[0][1]), kv[0]))
            ],
            "certified": [None if cz == EXACT else cz, None if czb == EXACT else czb],
            "band": None if self.band is None else list(self.band),
            "lost": self.lost,
        }

    @classmethod
    def from_json_obj(cls, obj: dict, kd: KahlerData) -> "FockMatrix":
        try:
            entries = {}
            for e in obj["entries"]:
                key = (tuple(int(x) for x in e["m"]), tuple(int(x) for x in e["n"]))
                entries[key] = entries.get(key, Fraction(0)) + to_fraction(str(e["c"]))
            cert = obj.get("certified", [None, None])
            band = obj.get("band")
            return cls(kd, entries, tuple(cert), tuple(band) if band else None, bool(obj.get("lost", False)))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed FockMatrix JSON: {exc}") from exc

    def __repr__(self):
        return f"FockMatrix(certified={self.certified}, band={self.band}, entries={ {k: str(v) for k, v in self.entries.items()} })"


def _band_union(a, b):
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]))


# --- basic elements -------------------------------------------------------------


def vacuum(kd: KahlerData) -> FockMatrix:
    """|0><0| = exp(-Phi/hbar)."""
    z = zero_index(kd.N)
    return FockMatrix(kd, {(z, z): 1}, (EXACT, EXACT), (0, 0))


def vacuum_weighted(kd: KahlerData) -> WeightedElement:
    return WeightedElement(TruncatedSeries.constant(kd.N, 1), kd)


def basis(kd: KahlerData, m, n, c=1) -> FockMatrix:
    return FockMatrix(kd, {(tuple(m), tuple(n)): c}, (EXACT, EXACT), (mdeg(n) - mdeg(m),) * 2)


def identity(kd: KahlerData, d: int | None = None) -> FockMatrix:
    """sum_{|n| <= d} E_{n,n} / n!, certified on the (d, d) block."""
    _require_numeric(kd)
    d = kd.D if d is None else d
    ent = {(n, n): Q(1, mfact(n)) for n in multi_indices(kd.N, d)}
    return FockMatrix._raw(kd, ent, (d, d), (0, 0), False)


# --- dictionary between functions and matrices -------------------------------------


def to_fock(w: WeightedElement) -> FockMatrix:
    """A_{m,n} = (1/n!) sum_k P_{m,k} Hinv_{k,n}."""
    kd = w.kd
    H, Hinv = kd.H, kd.Hinv
    D = kd.D
    pz, pzb = w.P.cutoffs
    out: dict = {}
    for m, k, c in w.P.raw_items():
        if mdeg(k) > D:
            continue
        for n, h in Hinv.row(k):
            key = (m, n)
            out[key] = out.get(key, 0) + c * h
    ent = {}
    for (m, n), v in out.items():
        if v:
            ent[(m, n)] = v / mfact(n)
    if H.degree_diagonal:
        czb = min(pzb, D)
        lost = False
    else:
        czb = min(pzb, D)
        lost = True
    if pzb == EXACT and w.P.degrees()[1] <= D and H.degree_diagonal:
        czb = EXACT
    cert = (pz, czb)
    A = FockMatrix._raw(kd, {}, cert, w.band if H.degree_diagonal else None, lost)
    A.entries = {k: v for k, v in ent.items() if mdeg(k[0]) <= cert[0] and mdeg(k[1]) <= cert[1]}
    return A


def from_fock(A: FockMatrix) -> WeightedElement:
    """P_{m,k} = sum_n A_{m,n} n! H_{n,k}."""
    kd = A.kd
    H = kd.H
    D = kd.D
    cz, czb = A.certified
    terms: dict = {}
    for (m, n), v in A.entries.items():
        if mdeg(n) > D:
            continue
        f = v * mfact(n)
        for k, h in H.row(n):
            key = (m, k)
            terms[key] = terms.get(key, 0) + f * h
    finite_cols = czb == EXACT and all(mdeg(n) <= D for (_, n) in A.entries)
    if H.degree_diagonal:
        pz, pzb = cz, (EXACT if finite_cols else min(czb, D))
    elif finite_cols:
        pz, pzb = cz, D
    elif A.band is not None:
        pz, pzb = min(cz, min(czb, D) - A.band[1]), D
    else:
        pz, pzb = -1, -1
    if pz < 0:
        raise PrecisionError("no coefficient of the function is certified")
    P = TruncatedSeries(kd.N, terms, pz, pzb)
    return WeightedElement(P, kd, A.band)


def function_matrix(f: TruncatedSeries, kd: KahlerData) -> FockMatrix:
    """Matrix of the function f (not weighted): to_fock of f exp(Phi/hbar)."""
    E = exp_phi(kd)
    P = f * E
    band = None
    if kd.H.degree_diagonal:
        fb = _series_band(f)
        band = fb
    return to_fock(WeightedElement(P, kd, band))


def exp_phi(kd: KahlerData) -> TruncatedSeries:
    """exp(Phi/hbar) = sum H_{m,n} z^m zbar^n on the (D, D) box."""
    H = kd.H
    return TruncatedSeries(kd.N, {k: v for k, v in H.entries.items()}, kd.D, kd.D)


def exp_minus_phi(kd: KahlerData, d: int | None = None) -> TruncatedSeries:
    d = kd.D if d is None else d
    return series_exp(kd.phi.series.truncate(d, d).scale(-1 / qq(kd.hbar)))


def generator_matrix(kd: KahlerData, kind: str, i: int) -> FockMatrix:
    """The generator itself as an element of the algebra."""
    kind = Generator(kind, i).kind
    E = exp_phi(kd)
    N = kd.N
    diag = kd.H.degree_diagonal
    if kind == "create":
        P, band = E.mul_monomial(unit_index(N, i), zero_index(N)), (-1, -1)
    elif kind == "a_bar":
        P, band = E.mul_monomial(zero_index(N), unit_index(N, i)), (1, 1)
    elif kind == "annihilate_underline":
        P, band = E.diff("z", i), (1, 1)
    else:
        P, band = E.diff("zb", i), (-1, -1)
    return to_fock(WeightedElement(P, kd, band if diag else None))


# --- products ---------------------------------------------------------------------


def fock_mul(A: FockMatrix, B: FockMatrix) -> FockMatrix:
    """C_{m,l} = sum_n A_{m,n} n! B_{n,l}."""
    A._check(B)
    kd = A.kd
    rows: dict = {}
    for (n, l), v in B.entries.items():
        rows.setdefault(n, []).append((l, v))
    out: dict = {}
    for (m, n), a in A.entries.items():
        r = rows.get(n)
        if not r:
            continue
        f = a * mfact(n)
        for l, b in r:
            key = (m, l)
            out[key] = out.get(key, 0) + f * b
    cert = _product_certificate(A, B)
    band = None
    if A.band is not None and B.band is not None:
        band = (A.band[0] + B.band[0], A.band[1] + B.band[1])
    ent = {k: v for k, v in out.items() if v and mdeg(k[0]) <= cert[0] and mdeg(k[1]) <= cert[1]}
    lost = A.lost or B.lost or cert[0] < 0 or cert[1] < 0
    return FockMatrix._raw(kd, ent, (max(cert[0], -1), max(cert[1], -1)), band, lost)


def _product_certificate(A: FockMatrix, B: FockMatrix):
    (az, azb), (bz, bzb) = A.certified, B.certified
    inner = min(azb, bz)
    if inner == EXACT:
        return (az, bzb)
    options = []
    if A.band is not None:
        options.append((min(az, inner - A.band[1]), bzb))
    if B.band is not None:
        options.append((az, min(bzb, inner + B.band[0])))
    if not options:
        return (-1, -1)

    def size(o):
        a, b = o
        if a < 0 or b < 0:
            return -1
        return (a + 1 if a != EXACT else 10**9) * (b + 1 if b != EXACT else 10**9)

    return max(options, key=size)


# --- generator actions ------------------------------------------------------------------


def _shift(A: FockMatrix, which: str, delta: MultiIndex, factor_slot: int | None) -> FockMatrix:
    """Move entries by +-e_i in the row (which='m') or column index.

    ``factor_slot`` multiplies by the pre-shift exponent (lowering operators).
    """
    kd = A.kd
    D = kd.D
    cz, czb = A.certified
    raising = factor_slot is None
    ent: dict = {}
    dropped = False
    for (m, n), v in A.entries.items():
        if which == "m":
            if raising:
                m2, f = madd(m, delta), 1
            else:
                f = m[factor_slot]
                if not f:
                    continue
                m2 = msub(m, delta)
            n2 = n
        else:
            if raising:
                n2, f = madd(n, delta), 1
            else:
                f = n[factor_slot]
                if not f:
                    continue
                n2 = msub(n, delta)
            m2 = m
        if mdeg(m2) > D or mdeg(n2) > D:
            dropped = True
            continue
        ent[(m2, n2)] = v * f
    if which == "m":
        cz = min(_cadd(cz, 1), D) if raising else _cadd(cz, -1)
        if dropped:
            cz = min(cz, D)
    else:
        czb = min(_cadd(czb, 1), D) if raising else _cadd(czb, -1)
        if dropped:
            czb = min(czb, D)
    if A.certified[0] == EXACT and not dropped and which == "m":
        cz = EXACT
    if A.certified[1] == EXACT and not dropped and which == "n":
        czb = EXACT
    band = None
    if A.band is not None:
        s = (-1 if raising else 1) if which == "m" else (1 if raising else -1)
        band = (A.band[0] + s, A.band[1] + s)
    ent = {k: v for k, v in ent.items() if mdeg(k[0]) <= cz and mdeg(k[1]) <= czb}
    return FockMatrix._raw(kd, ent, (cz, czb), band, A.lost or dropped)


def apply_generator(x, g: Generator, path: str = "matrix"):
    """Multiply x by the generator from g.side.

    path='matrix': index shifts for a^dagger / a_underline on the left and
    a_underline / a^dagger on the right; the other four go through the
    dictionary matrices of zbar^i and d_ibar Phi / hbar.
    path='weighted': closed differential rules on P, available for left
    a^dagger, left a_underline, right a_bar and right a_underline_dagger.
    """
    if isinstance(x, WeightedElement):
        if path == "weighted" and _weighted_defined(g):
            return _apply_weighted(x, g)
        return from_fock(apply_generator(to_fock(x), g, "matrix"))
    if path == "weighted":
        if not _weighted_defined(g):
            raise DomainError(f"no weighted rule for {g.side} {g.kind}")
        return to_fock(_apply_weighted(from_fock(x), g))
    N = x.N
    e = unit_index(N, g.i)
    if g.side == "left":
        if g.kind == "create":
            return _shift(x, "m", e, None)
        if g.kind == "annihilate_underline":
            return _shift(x, "m", e, g.i)
        return fock_mul(generator_matrix(x.kd, g.kind, g.i), x)
    if g.kind == "annihilate_underline":
        return _shift(x, "n", e, None)
    if g.kind == "create":
        return _shift(x, "n", e, g.i)
    return fock_mul(x, generator_matrix(x.kd, g.kind, g.i))


def _weighted_defined(g: Generator) -> bool:
    return (g.side, g.kind) in {
        ("left", "create"),
        ("left", "annihilate_underline"),
        ("right", "a_bar"),
        ("right", "a_underline_dagger"),
    }


def _apply_weighted(w: WeightedElement, g: Generator) -> WeightedElement:
    N = w.kd.N
    e = unit_index(N, g.i)
    z = zero_index(N)
    P = w.P
    if (g.side, g.kind) == ("left", "create"):
        P2 = P.mul_monomial(e, z)
    elif (g.side, g.kind) == ("left", "annihilate_underline"):
        P2 = P.diff("z", g.i)
    elif (g.side, g.kind) == ("right", "a_bar"):
        P2 = P.mul_monomial(z, e)
    else:
        P2 = P.diff("zb", g.i)
    return WeightedElement(P2, w.kd)


def word_to_fock(word: Sequence[Generator], kd: KahlerData, start: str = "vacuum", d: int | None = None) -> FockMatrix:
    """Apply generators in order to the vacuum or to the truncated identity."""
    if not word:
        raise DomainError("word must be nonempty")
    x = vacuum(kd) if start == "vacuum" else identity(kd, d)
    for g in word:
        x = apply_generator(x, g)
    return x


# --- identities --------------------------------------------------------------------------


def completeness_defect(kd: KahlerData, d: int) -> TruncatedSeries:
    """(sum_{|n|<=d} E_{n,n}/n!) as a function, minus 1, on the (d, d) box."""
    if d > kd.D:
        raise PrecisionError("degree exceeds the H cutoff")
    w = from_fock(identity(kd, d))
    f = w.P.truncate(d, d) * exp_minus_phi(kd, d)
    return (f - 1).truncate(d, d)


def conjugate_fock(A: FockMatrix) -> FockMatrix:
    """Matrix of the complex conjugate function.

    conj(E_{m,n}) = n! sum_{k,l} (1/l!) H_{k,n} Hinv_{m,l} E_{k,l}.
    """
    kd = A.kd
    H, Hinv = kd.H, kd.Hinv
    D = kd.D
    out: dict = {}
    for (m, n), v in A.entries.items():
        if mdeg(n) > D or mdeg(m) > D:
            continue
        f = v * mfact(n)
        hcol = H.col(n)
        hirow = Hinv.row(m)
        for k, h in hcol:
            fh = f * h
            for l, hi in hirow:
                key = (k, l)
                out[key] = out.get(key, 0) + fh * hi / mfact(l)
    cz, czb = A.certified
    if H.degree_diagonal:
        cert = (min(czb, D), min(cz, D))
        if cz == EXACT and czb == EXACT and all(mdeg(m) <= D and mdeg(n) <= D for m, n in A.entries):
            cert = (EXACT, EXACT)
        lost = A.lost
    else:
        cert = (min(czb, D), min(cz, D))
        lost = True
    band = None if A.band is None else (-A.band[1], -A.band[0])
    ent = {k: v for k, v in out.items() if v and mdeg(k[0]) <= cert[0] and mdeg(k[1]) <= cert[1]}
    return FockMatrix._raw(kd, ent, cert, band, lost)


def conjugate_fock_oracle(A: FockMatrix) -> FockMatrix:
    """Conjugation through the function picture (independent check)."""
    w = from_fock(A)
    return to_fock(WeightedElement(w.P.conj(), A.kd))


def vac_dphi_residual(kd: KahlerData, n: MultiIndex, d: int | None = None) -> FockMatrix:
    """vac * (a_underline)^n - n! sum_m H_{n,m} vac * (a)^m, with the right
    a-actions taken through the dictionary matrix of zbar."""
    N = kd.N
    lhs = vacuum(kd)
    for i, c in enumerate(n):
        for _ in range(c):
            lhs = apply_generator(lhs, Generator("annihilate_underline", i, "right"))
    rhs = None
    for m, h in kd.H.row(n):
        x = vacuum(kd)
        for i, c in enumerate(m):
            for _ in range(c):
                x = apply_generator(x, Generator("a_bar", i, "right"))
        t = x.scale(h * mfact(n))
        rhs = t if rhs is None else rhs + t
    res = lhs - rhs if rhs is not None else lhs
    return res


def vacuum_lemma_residuals(f: TruncatedSeries, kd: KahlerData):
    """(vac * f - f(0,zbar) vac, f * vac - f(z,0) vac) for a polynomial f.

    Each monomial z^a zbar^b equals z^a * zbar^b, so the products are built
    from generator actions on the vacuum.
    """
    N = kd.N
    left_total = None
    right_total = None
    for (a, b), c in f.terms().items():
        x = vacuum(kd)
        for i, e in enumerate(a):
            for _ in range(e):
                x = apply_generator(x, Generator("create", i, "right"))
        for i, e in enumerate(b):
            for _ in range(e):
                x = apply_generator(x, Generator("a_bar", i, "right"))
        x = x.scale(c)
        left_total = x if left_total is None else left_total + x
        y = vacuum(kd)
        for i, e in enumerate(b):
            for _ in range(e):
                y = apply_generator(y, Generator("a_bar", i, "left"))
        for i, e in enumerate(a):
            for _ in range(e):
                y = apply_generator(y, Generator("create", i, "left"))
        y = y.scale(c)
        right_total = y if right_total is None else right_total + y
    r1 = left_total - to_fock(WeightedElement(f.antiholomorphic_part(), kd))
    r2 = right_total - to_fock(WeightedElement(f.holomorphic_part(), kd))
    return r1, r2


def mixed_commutator(kd: KahlerData, i: int, j: int, d: int | None = None) -> FockMatrix:
    """[a_i, a^dagger_j] as a matrix, certified on a sub-block."""
    A = generator_matrix(kd, "a_bar", i)
    B = generator_matrix(kd, "create", j)
    return fock_mul(A, B) - fock_mul(B, A)


def canonical_commutators(kd: KahlerData) -> Dict[str, FockMatrix]:
    """The six relations among the generators, as residual matrices."""
    N = kd.N
    I = identity(kd)
    out = {}
    gm = {(k, i): generator_matrix(kd, k, i) for k in KINDS for i in range(N)}

    def comm(x, y):
        return fock_mul(x, y) - fock_mul(y, x)

    for i in range(N):
        for j in range(N):
            delta = I if i == j else I.scale(0)
            out[f"[ua_{i},adag_{j}]-delta"] = comm(gm[("annihilate_underline", i)], gm[("create", j)]) - delta
            out[f"[a_{i},uadag_{j}]-delta"] = comm(gm[("a_bar", i)], gm[("a_underline_dagger", j)]) - delta
            out[f"[adag_{i},adag_{j}]"] = comm(gm[("create", i)], gm[("create", j)])
            out[f"[ua_{i},ua_{j}]"] = comm(gm[("annihilate_underline", i)], gm[("annihilate_underline", j)])
            out[f"[uadag_{i},uadag_{j}]"] = comm(gm[("a_underline_dagger", i)], gm[("a_underline_dagger", j)])
            out[f"[a_{i},a_{j}]"] = comm(gm[("a_bar", i)], gm[("a_bar", j)])
    return out
