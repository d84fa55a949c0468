"""Kähler potentials, their metric, and the H-matrix of exp(Phi/hbar)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Optional, Tuple

from .core import (
    EXACT,
    DomainError,
    MultiIndex,
    PrecisionError,
    Q,
    RepresentationError,
    StructureError,
    mfact,
    multi_indices,
    qq,
    to_fraction,
)
from .linalg import exact_inverse
from .series import (
    SeriesMatrix,
    TruncatedSeries,
    log1p_coeffs,
    matrix_inverse,
    series_compose,
    series_exp,
)

MODELS = ("Cn", "cylinder_chart", "CPn_chart", "CHn", "perturbed")
_ALIASES = {
    "cn": "Cn",
    "cylinder": "cylinder_chart",
    "cylinder_chart": "cylinder_chart",
    "cpn": "CPn_chart",
    "cpn_chart": "CPn_chart",
    "chn": "CHn",
    "perturbed": "perturbed",
}


def canonical_model(name: str) -> str:
    key = name.lower()
    if name in MODELS:
        return name
    if key not in _ALIASES:
        raise DomainError(f"unknown model {name!r}; choose one of {', '.join(MODELS)}")
    return _ALIASES[key]


@dataclass
class KahlerPotential:
    series: TruncatedSeries
    normalized: bool = False
    model: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for (m, k), c in self.series.terms().items():
            if sum(k) <= self.series.dz and sum(m) <= self.series.dzb:
                other = self.series.coeff(k, m)
                if other != c:
                    raise DomainError(f"potential is not real: coefficient of {m},{k} differs from its mirror")

    @property
    def N(self) -> int:
        return self.series.N

    @property
    def cutoffs(self):
        return self.series.cutoffs

    def is_normalized(self) -> bool:
        return all(sum(m) and sum(k) for (m, k) in self.series.terms())

    def is_radial(self) -> bool:
        """Depends only on |z^1|, ..., |z^N| (every monomial has m == k)."""
        return all(m == k for (m, k) in self.series.terms())

    def is_balanced(self) -> bool:
        """Every monomial has |m| == |k|; then H is degree-diagonal."""
        return all(sum(m) == sum(k) for (m, k) in self.series.terms())


def normalize_potential(phi: KahlerPotential) -> KahlerPotential:
    """Drop the constant, pure-z and pure-zbar parts; the metric is unchanged."""
    s = phi.series
    pure = s.holomorphic_part() + s.antiholomorphic_part() - TruncatedSeries.constant(s.N, s.constant_term())
    out = (s - pure).truncate(s.dz, s.dzb)
    return KahlerPotential(out, True, phi.model, dict(phi.meta))


def metric(phi: KahlerPotential) -> SeriesMatrix:
    """g_{k lbar} = d_k d_lbar Phi as a series matrix (row k, column l)."""
    s = phi.series
    dz = [s.diff("z", k) for k in range(s.N)]
    return SeriesMatrix([[dz[k].diff("zb", l) for l in range(s.N)] for k in range(s.N)])


def _modulus_squared(N: int, dz=EXACT, dzb=EXACT) -> TruncatedSeries:
    out = TruncatedSeries.zero(N, dz, dzb)
    for i in range(N):
        e = tuple(1 if j == i else 0 for j in range(N))
        out = out + TruncatedSeries.monomial(e, e, 1, dz, dzb)
    return out


def builtin_potential(model: str, N: int, cutoffs=(EXACT, EXACT), eps=Fraction(1, 10)) -> KahlerPotential:
    """Expanded, normalized potential of one of the example geometries.

    ``perturbed`` is |z|^2 + eps (z^1 zbar^1)^2.  Polynomial models are exact
    regardless of the requested cutoffs.
    """
    model = canonical_model(model)
    if N < 1:
        raise DomainError("dimension must be positive")
    dz, dzb = cutoffs
    if model in ("Cn", "cylinder_chart"):
        s = _modulus_squared(N)
        meta = {"period": "2*pi", "identification": "z ~ z + 2 pi"} if model == "cylinder_chart" else {}
        if model == "cylinder_chart" and N != 1:
            raise DomainError("the cylinder chart is one-dimensional")
        return KahlerPotential(s, True, model, meta)
    if model == "perturbed":
        e1 = tuple(2 if j == 0 else 0 for j in range(N))
        s = _modulus_squared(N) + TruncatedSeries.monomial(e1, e1, eps)
        return KahlerPotential(s, True, model, {"eps": str(Fraction(eps))})
    if dz == EXACT or dzb == EXACT:
        raise DomainError(f"{model} has a non-polynomial potential; give finite cutoffs")
    t = _modulus_squared(N, dz, dzb)
    n = min(dz, dzb)
    if model == "CPn_chart":
        s = series_compose(log1p_coeffs(n, 1), t)
    else:
        s = series_compose(log1p_coeffs(n, -1), t).scale(-1)
    return KahlerPotential(s, True, model, {})


# --- H matrix --------------------------------------------------------------


@dataclass
class HMatrix:
    """Coefficients H_{m,n} of exp(Phi/hbar) = sum H_{m,n} z^m zbar^n."""

    hbar: Fraction
    N: int
    D: int
    entries: Dict[Tuple[MultiIndex, MultiIndex], object]
    degree_diagonal: bool

    def __call__(self, m, n):
        if sum(m) > self.D or sum(n) > self.D:
            raise PrecisionError(f"H entry {m},{n} lies beyond the cutoff {self.D}")
        return self.entries.get((tuple(m), tuple(n)), Q(0))

    def get(self, m, n):
        return self.entries.get((tuple(m), tuple(n)), Q(0))

    @property
    def indices(self):
        return multi_indices(self.N, self.D)

    def row(self, m):
        """Nonzero entries (n, H_{m,n}) in row m."""
        return self._rows.get(tuple(m), ())

    def col(self, n):
        return self._cols.get(tuple(n), ())

    def __post_init__(self):
        rows: dict = {}
        cols: dict = {}
        for (m, n), v in self.entries.items():
            rows.setdefault(m, []).append((n, v))
            cols.setdefault(n, []).append((m, v))
        self._rows = rows
        self._cols = cols

    def to_json_obj(self) -> dict:
        from .core import fraction_str

        return {
            "hbar": fraction_str(self.hbar),
            "N": self.N,
            "cutoff": self.D,
            "degree_diagonal": self.degree_diagonal,
            "entries": [
                {"m": list(m), "n": list(n), "c": fraction_str(v)}
                for (m, n), v in sorted(self.entries.items(), key=lambda kv: (sum(kv[0][0]), kv[0]))
            ],
        }


def _check_hbar(hbar) -> Fraction:
    h = to_fraction(hbar)
    if h <= 0:
        raise DomainError("hbar must be positive")
    return h


def compute_H(phi: KahlerPotential, hbar, D: int) -> HMatrix:
    """Exact H_{m,n} for |m|, |n| <= D."""
    h = _check_hbar(hbar)
    s = phi.series
    if not phi.is_normalized():
        raise DomainError("compute_H needs a normalized potential")
    if s.dz < D or s.dzb < D:
        raise PrecisionError(f"potential known only to {s.cutoffs}, H requested to {D}")
    e = series_exp(s.truncate(D, D).scale(1 / qq(h)))
    entries = {(m, k): v for m, k, v in e.raw_items()}
    diag = all(sum(m) == sum(k) for (m, k) in entries)
    return HMatrix(h, s.N, D, entries, diag)


@dataclass
class HInverse:
    hbar: Fraction
    N: int
    D: int
    entries: Dict[Tuple[MultiIndex, MultiIndex], object]
    exact: bool  # True when truncation does not affect the stored entries

    def get(self, m, n):
        return self.entries.get((tuple(m), tuple(n)), Q(0))

    def __post_init__(self):
        rows: dict = {}
        cols: dict = {}
        for (m, n), v in self.entries.items():
            rows.setdefault(m, []).append((n, v))
            cols.setdefault(n, []).append((m, v))
        self._rows = rows
        self._cols = cols

    def row(self, m):
        return self._rows.get(tuple(m), ())

    def col(self, n):
        return self._cols.get(tuple(n), ())


def invert_H(H: HMatrix) -> HInverse:
    """Inverse of the truncated H-matrix.

    Degree-diagonal H is inverted block by block, which equals the inverse of
    the infinite matrix.  Otherwise the whole truncated matrix is inverted;
    that inverse depends on the truncation and is marked ``exact=False``.
    """
    idx = H.indices
    out = {}
    if H.degree_diagonal:
        for d in range(H.D + 1):
            block = multi_indices(H.N, d, d)
            rows = [[H.get(m, n) for n in block] for m in block]
            try:
                inv = exact_inverse(rows, [d] * len(block))
            except RepresentationError as exc:
                raise RepresentationError(f"H is singular in the degree-{d} block", d) from exc
            for i, m in enumerate(block):
                for j, n in enumerate(block):
                    if inv[i][j]:
                        out[(m, n)] = inv[i][j]
        return HInverse(H.hbar, H.N, H.D, out, True)
    rows = [[H.get(m, n) for n in idx] for m in idx]
    try:
        inv = exact_inverse(rows, [sum(m) for m in idx])
    except RepresentationError as exc:
        raise RepresentationError(f"truncated H is singular (degree block {exc.degree})", exc.degree) from exc
    for i, m in enumerate(idx):
        for j, n in enumerate(idx):
            if inv[i][j]:
                out[(m, n)] = inv[i][j]
    return HInverse(H.hbar, H.N, H.D, out, False)


def h_residual(H: HMatrix, Hinv: HInverse) -> int:
    """Number of stored (m, n) with sum_k H_{m,k} Hinv_{k,n} != delta."""
    bad = 0
    for m in H.indices:
        acc: dict = {}
        for k, a in H.row(m):
            for n, b in Hinv.row(k):
                acc[n] = acc.get(n, 0) + a * b
        for n in H.indices:
            if acc.get(n, 0) != (1 if n == m else 0):
                bad += 1
    return bad


def radial_C(phi: KahlerPotential, hbar, D: int) -> Dict[MultiIndex, Fraction]:
    """C(n) = n! H_{n,n} for a potential depending only on the moduli."""
    if not phi.is_radial():
        raise DomainError("radial_C needs a potential depending only on |z^i|")
    H = compute_H(phi, hbar, D)
    return {n: to_fraction(mfact(n) * H.get(n, n)) for n in H.indices}


def radial_C_literal(phi: KahlerPotential, hbar, n: int) -> Fraction:
    """N = 1 literal reading: (d/dr)^n exp(Phi(r)/hbar) at r = 0, with |z| = r.

    Kept only to document the disagreement with :func:`radial_C`.
    """
    if phi.N != 1 or not phi.is_radial():
        raise DomainError("literal reading implemented for one-dimensional radial potentials")
    H = compute_H(phi, hbar, n)
    # exp(Phi/hbar) = sum_j H_{j,j} r^{2j}; the n-th r-derivative at 0
    if n % 2:
        return Fraction(0)
    return to_fraction(H.get((n // 2,), (n // 2,)) * math.factorial(n))


def cpn_H_closed(L: int, m: MultiIndex) -> Fraction:
    """Gamma(1/hbar + 1) / (m! Gamma(1/hbar - |m| + 1)) at 1/hbar = L."""
    k = sum(m)
    if k > L:
        return Fraction(0)
    return Fraction(math.factorial(L), math.factorial(L - k) * mfact(m))


def chn_H_closed(s, n: MultiIndex) -> Fraction:
    """Gamma(s + |n|) / (Gamma(s) n!) for 1/hbar = s (rising factorial)."""
    s = to_fraction(s)
    out = Fraction(1)
    for j in range(sum(n)):
        out *= s + j
    return out / mfact(n)


class KahlerData:
    """A normalized potential with cached metric, inverse metric and H data."""

    def __init__(self, phi: KahlerPotential, hbar=None, D: int | None = None, precision=None):
        if precision is not None and precision != EXACT:
            phi = KahlerPotential(phi.series.truncate(precision, precision), phi.normalized, phi.model, dict(phi.meta))
        if not phi.normalized:
            phi = normalize_potential(phi)
        if not phi.is_normalized():
            raise DomainError("potential does not satisfy the normalization condition")
        self.phi = phi
        self.hbar = None if hbar is None else _check_hbar(hbar)
        self.D = D

    @property
    def N(self):
        return self.phi.N

    @property
    def model(self):
        return self.phi.model

    @cached_property
    def G(self) -> SeriesMatrix:
        return metric(self.phi)

    @cached_property
    def Ginv(self) -> SeriesMatrix:
        return matrix_inverse(self.G)

    @cached_property
    def H(self) -> HMatrix:
        if self.hbar is None or self.D is None:
            raise DomainError("H needs a numeric hbar and a cutoff")
        return compute_H(self.phi, self.hbar, self.D)

    @cached_property
    def Hinv(self) -> HInverse:
        return invert_H(self.H)

    @classmethod
    def builtin(cls, model: str, N: int = 1, hbar=None, D: int | None = None, precision=None, **kw) -> "KahlerData":
        """Convenience constructor; precision defaults to the H cutoff."""
        p = precision if precision is not None else (D if D is not None else EXACT)
        phi = builtin_potential(model, N, (p, p), **kw)
        return cls(phi, hbar, D, p)


def model_hbar(model: str, hbar=None, L=None) -> Fraction:
    """Resolve --hbar / --L into a rational hbar."""
    if L is not None:
        if int(L) < 1:
            raise DomainError("L must be a positive integer")
        return Fraction(1, int(L))
    if hbar is None:
        raise DomainError("a numeric hbar (or L) is required")
    return _check_hbar(hbar)
