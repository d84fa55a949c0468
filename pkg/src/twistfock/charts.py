"""Chart transitions, the finite CP^N algebra and its shifted operators.

A transition goes from a source chart b (coordinates w) to a target chart a
(coordinates z) with w = w(z) and Phi_b = Phi_a + phi(z) + conj(phi(z)).
Writing w(z)^alpha exp(-phi/hbar) = sum_beta C^alpha_beta z^beta, the source
basis element E^b_{m,n} expands in the target basis as

    E^b_{m,n} = sum_{i,j} T_{(m,n),(i,j)} E^a_{i,j},
    T_{(m,n),(i,j)} = (n!/j!) sum_k H^b_{n,k} C^m_i sum_beta C^k_beta Hinv^a_{beta,j}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .core import (
    EXACT,
    ChartError,
    DomainError,
    MultiIndex,
    PrecisionError,
    Q,
    RepresentationError,
    fraction_str,
    mbinom,
    mdeg,
    mfact,
    multi_indices,
    qq,
    to_fraction,
    unit_index,
    zero_index,
)
from .fock import FockMatrix, WeightedElement, fock_mul, from_fock, identity, to_fock
from .kahler import KahlerData
from .series import TruncatedSeries, series_exp, series_power

Pair = Tuple[MultiIndex, MultiIndex]


# --- square-root bookkeeping ---------------------------------------------------------


def _square_part(n: int) -> Tuple[int, int]:
    """n = s^2 * r with r squarefree; returns (s, r)."""
    s, r, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            r *= p
        p += 1 if p == 2 else 2
    return s, r * n


def sqrt_normal(c, radicand) -> Tuple[Fraction, Fraction]:
    """Rewrite c * sqrt(radicand) with a squarefree integer radicand."""
    c, q = to_fraction(c), to_fraction(radicand)
    if q < 0:
        raise DomainError("negative radicand")
    if c == 0 or q == 0:
        return Fraction(0), Fraction(1)
    s, r = _square_part(q.numerator * q.denominator)
    return c * Fraction(s, q.denominator), Fraction(r)


def sqrt_product(a: Tuple[Fraction, Fraction], b: Tuple[Fraction, Fraction]) -> Fraction:
    """(a0 sqrt a1)(b0 sqrt b1) when a1 b1 is a perfect square."""
    c, r = sqrt_normal(a[0] * b[0], a[1] * b[1])
    if r != 1 and c != 0:
        raise RepresentationError("radicands do not combine to a perfect square", None)
    return c


# --- transitions ---------------------------------------------------------------------


@dataclass
class AnalyticTransition:
    """Holomorphic change of chart, expanded about ``base`` in the target chart.

    ``factor(alpha, D)`` returns w(z)^alpha exp(-phi/hbar) as a holomorphic
    series in the local variable z - base.
    """

    N: int
    factor: Callable[[MultiIndex, int], TruncatedSeries]
    base: Tuple = ()
    hbar: Optional[Fraction] = None
    description: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.base:
            self.base = (Fraction(0),) * self.N

    @property
    def at_origin(self) -> bool:
        return all(b == 0 for b in self.base)

    @classmethod
    def from_series(cls, w_of_z: Sequence[TruncatedSeries], phi_hol: Optional[TruncatedSeries], hbar, base=None):
        """General form: w(z) and phi(z) given as holomorphic series about base."""
        N = len(w_of_z)
        for w in w_of_z:
            if not w.is_holomorphic():
                raise ChartError("w(z) must be holomorphic")
        jac = [[w.coeff(unit_index(N, j), zero_index(N)) if w.dz >= 1 else 0 for j in range(N)] for w in w_of_z]
        if _det(jac) == 0:
            raise ChartError("Jacobian of the transition is singular at the base point")
        h = to_fraction(hbar)
        if phi_hol is not None:
            if not phi_hol.is_holomorphic():
                raise ChartError("phi must be holomorphic")
            if phi_hol.constant_term() != 0:
                raise ChartError("phi must vanish at the base point (shift it into the potential)")
        ws = list(w_of_z)

        def factor(alpha, D):
            out = TruncatedSeries.constant(N, 1, D, 0)
            for i, a in enumerate(alpha):
                for _ in range(a):
                    out = (out * ws[i].truncate(D, 0)).truncate(D, 0)
            if phi_hol is not None:
                out = (out * series_exp(phi_hol.truncate(D, 0).scale(-1 / qq(h)))).truncate(D, 0)
            return out

        b = tuple(Fraction(0) for _ in range(N)) if base is None else tuple(to_fraction(x) for x in base)
        return cls(N, factor, b, h, "series transition")

    @classmethod
    def identity(cls, N: int):
        def factor(alpha, D):
            return TruncatedSeries.monomial(tuple(alpha), zero_index(N))

        return cls(N, factor, (), None, "identity")

    @classmethod
    def dilation(cls, N: int, scale):
        """w = scale * z with phi = 0."""
        c = to_fraction(scale)
        if c == 0:
            raise ChartError("Jacobian of the transition is singular at the base point")

        def factor(alpha, D):
            return TruncatedSeries.monomial(tuple(alpha), zero_index(N), c ** sum(alpha))

        return cls(N, factor, (), None, f"w = {c} z", {"scale": c})

    @classmethod
    def cpn_swap(cls, N: int, L: int, target: int = 0, source: int = 1, base=None):
        """CP^N: target chart coordinates zeta^j/zeta^target, source zeta^j/zeta^source.

        With Phi = ln(1 + |z|^2) and 1/hbar = L, exp(-phi/hbar) = (z^source)^L,
        so w^alpha exp(-phi/hbar) = (z^source)^(L - |alpha|) prod_j (z^j)^alpha_j.
        """
        if target == source or not (0 <= target <= N and 0 <= source <= N):
            raise ChartError("chart labels must be distinct integers in 0..N")
        L = int(L)
        if L < 0:
            raise DomainError("L must be non-negative")
        tslots = chart_slots(N, target)
        sslots = chart_slots(N, source)
        b = tuple(Fraction(0) for _ in range(N)) if base is None else tuple(to_fraction(x) for x in base)
        pos_src = tslots.index(source)

        def factor(alpha, D):
            exps = [0] * N
            exps[pos_src] = L - sum(alpha)
            for a, j in zip(alpha, sslots):
                if j != target:
                    exps[tslots.index(j)] += a
            out = TruncatedSeries.constant(N, 1)
            for slot, e in enumerate(exps):
                out = out * _shifted_power(N, slot, b[slot], e, D)
            return out if out.dz == EXACT else out.truncate(D, 0)

        return cls(N, factor, b, Fraction(1, L) if L else None, f"CP^{N} chart {source} -> {target}",
                   {"L": L, "target": target, "source": source})


def _shifted_power(N, slot, c, e, D) -> TruncatedSeries:
    """(c + u)^e as a series in u = z^slot - c."""
    if e >= 0:
        terms = {}
        for j in range(e + 1):
            m = tuple(j if s == slot else 0 for s in range(N))
            terms[(m, zero_index(N))] = Fraction(math.comb(e, j)) * c ** (e - j)
        return TruncatedSeries(N, terms)
    if c == 0:
        raise ChartError("the transition has a pole at the base point")
    lin = TruncatedSeries.constant(N, c, D, 0) + TruncatedSeries.z(N, slot, D, 0)
    return series_power(lin, e).truncate(D, 0)


def _det(M) -> Fraction:
    n = len(M)
    A = [[to_fraction(x) for x in r] for r in M]
    d = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            d = -d
        d *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return d


def chart_slots(N: int, chart: int) -> List[int]:
    """Homogeneous labels of the inhomogeneous coordinates of a CP^N chart."""
    return [j for j in range(N + 1) if j != chart]


def transition_coefficients(t: AnalyticTransition, hbar, alpha_max: int, D: int):
    """{alpha: (TruncatedSeries, {beta: C^alpha_beta})} for |alpha| <= alpha_max."""
    if t.hbar is not None and hbar is not None and to_fraction(hbar) != t.hbar:
        raise DomainError("hbar does not match the transition")
    out = {}
    for alpha in multi_indices(t.N, alpha_max):
        s = t.factor(alpha, D)
        out[alpha] = (s, {m: to_fraction(c) for (m, _), c in s.terms().items()})
    return out


class TransitionMatrix:
    """Images of source basis elements in the target E-basis."""

    def __init__(self, kd_target, kd_source, rows, block, certified, lost=False):
        self.kd_target = kd_target
        self.kd_source = kd_source
        self.rows: Dict[Pair, Dict[Pair, object]] = rows
        self.block = block
        self.certified = certified
        self.lost = lost

    def image(self, m, n) -> Dict[Pair, object]:
        key = (tuple(m), tuple(n))
        if mdeg(key[0]) > self.block or mdeg(key[1]) > self.block:
            raise PrecisionError(f"basis element {key} lies outside the computed block {self.block}")
        return self.rows.get(key, {})

    def apply(self, A: FockMatrix) -> FockMatrix:
        """Re-expand a source-chart matrix in the target chart."""
        if A.certified != (EXACT, EXACT) and (A.certified[0] < self.block or A.certified[1] < self.block):
            raise PrecisionError("the input matrix is not certified on the transition block")
        out: dict = {}
        for (m, n), v in A.entries.items():
            for key, c in self.image(m, n).items():
                out[key] = out.get(key, 0) + v * c
        lost = self.lost or A.certified != (EXACT, EXACT)
        return FockMatrix(self.kd_target, out, self.certified, None, lost)

    def normalized(self) -> Dict[Pair, Dict[Pair, Tuple[Fraction, Fraction]]]:
        """Coefficients between |m><n| elements as (rational, radicand)."""
        res = {}
        for (m, n), row in self.rows.items():
            res[(m, n)] = {
                (i, j): sqrt_normal(c, Fraction(mfact(i) * mfact(j), mfact(m) * mfact(n)))
                for (i, j), c in row.items()
            }
        return res

    def to_json_obj(self) -> dict:
        norm = self.normalized()
        return {
            "hbar": fraction_str(self.kd_target.hbar),
            "block": self.block,
            "certified": [None if c == EXACT else c for c in self.certified],
            "rows": [
                {
                    "m": list(m),
                    "n": list(n),
                    "image": [
                        {"i": list(i), "j": list(j), "cE": fraction_str(c), "c": fraction_str(norm[(m, n)][(i, j)][0]),
                         "radicand": fraction_str(norm[(m, n)][(i, j)][1])}
                        for (i, j), c in sorted(row.items())
                    ],
                }
                for (m, n), row in sorted(self.rows.items())
            ],
        }


def transition_matrix(t: AnalyticTransition, kd_target: KahlerData, kd_source: KahlerData, block: int | None = None) -> TransitionMatrix:
    if not t.at_origin:
        raise ChartError("transition_matrix needs expansions about the chart origin")
    Ha, Hainv, Hb = kd_target.H, kd_target.Hinv, kd_source.H
    Da, Db = kd_target.D, kd_source.D
    d = Db if block is None else block
    if d > Db:
        raise PrecisionError("block exceeds the source H cutoff")
    coeffs = transition_coefficients(t, kd_target.hbar, d, Da)
    rows = {}
    cz = czb = EXACT
    lost = not Ha.degree_diagonal
    for (m, n) in ((m, n) for m in multi_indices(t.N, d) for n in multi_indices(t.N, d)):
        sm, Cm = coeffs[m]
        if sm.dz != EXACT:
            cz = min(cz, sm.dz)
        inner: dict = {}
        for k, hb in Hb.row(n):
            sk, Ck = coeffs[k] if k in coeffs else (None, None)
            if sk is None:
                sk, Ck = t.factor(k, Da), None
                Ck = {mm: to_fraction(c) for (mm, _), c in sk.terms().items()}
            if sk.dz != EXACT or (Ck and max(mdeg(b) for b in Ck) > Da):
                czb = min(czb, Da if sk.dz == EXACT else min(sk.dz, Da))
            for beta, c in Ck.items():
                if mdeg(beta) > Da:
                    continue
                for j, hi in Hainv.row(beta):
                    inner[j] = inner.get(j, 0) + hb * c * hi
        row = {}
        nf = mfact(n)
        for i, ci in Cm.items():
            for j, v in inner.items():
                val = qq(nf) * qq(ci) * v / mfact(j)
                if val:
                    row[(i, j)] = row.get((i, j), 0) + val
        rows[(m, n)] = {k: v for k, v in row.items() if v}
    return TransitionMatrix(kd_target, kd_source, rows, d, (cz, czb), lost)


def compose_transitions(T_ab: TransitionMatrix, T_ba: TransitionMatrix) -> Dict[Pair, Dict[Pair, object]]:
    """Rows of T_ab after T_ba (source of T_ba back to itself)."""
    out = {}
    for key, row in T_ba.rows.items():
        acc: dict = {}
        for mid, c in row.items():
            for k2, c2 in T_ab.image(*mid).items():
                acc[k2] = acc.get(k2, 0) + c * c2
        out[key] = {k: v for k, v in acc.items() if v}
    return out


def compose_normalized(T_ab: TransitionMatrix, T_ba: TransitionMatrix) -> Dict[Pair, Dict[Pair, Fraction]]:
    """Same composition through the normalized (rational, radicand) entries."""
    n1, n2 = T_ba.normalized(), T_ab.normalized()
    out = {}
    for key, row in n1.items():
        acc: dict = {}
        for mid, a in row.items():
            for k2, b in n2.get(mid, {}).items():
                acc[k2] = acc.get(k2, 0) + sqrt_product(a, b)
        out[key] = {k: v for k, v in acc.items() if v}
    return out


def roundtrip_defect(T_ab: TransitionMatrix, T_ba: TransitionMatrix) -> int:
    """Number of rows where T_ab o T_ba differs from the identity."""
    bad = 0
    for (m, n), row in compose_transitions(T_ab, T_ba).items():
        if row != {(m, n): 1}:
            bad += 1
    return bad


def reexpansion_oracle(t: AnalyticTransition, kd_target: KahlerData, kd_source: KahlerData, m, n) -> FockMatrix:
    """Independent check: build E^b_{m,n} as a weighted function in the target
    chart by substituting w(z) monomial by monomial, then convert."""
    N = t.N
    D = kd_target.D
    P = TruncatedSeries.zero(N)
    for k, h in kd_source.H.row(tuple(n)):
        hol = t.factor(tuple(m), D)
        anti = t.factor(k, D).conj()
        P = P + (hol * anti).scale(h * mfact(tuple(n)))
    return to_fock(WeightedElement(P, kd_target))


# --- finite CP^N algebra -------------------------------------------------------------


def cpn_transition_finite(a: int, b: int, L: int, m, n, N: int | None = None):
    """Index map of the finite algebra between CP^N charts a and b.

    Multi-indices are ordered by the homogeneous labels of each chart.  Returns
    (m', n', factor) with E^b_{m',n'} = factor * E^a_{m,n}, factor = (L-|n|)!/n_b!.
    """
    m, n = tuple(m), tuple(n)
    N = len(m) if N is None else N
    if a == b:
        return m, n, Fraction(1)
    if mdeg(m) > L or mdeg(n) > L:
        raise RepresentationError("index pair lies outside the finite algebra", max(mdeg(m), mdeg(n)))
    sa, sb = chart_slots(N, a), chart_slots(N, b)

    def move(x):
        full = dict(zip(sa, x))
        full[a] = L - mdeg(x)
        return tuple(full[j] for j in sb), full[b]

    m2, _ = move(m)
    n2, nb = move(n)
    return m2, n2, Fraction(math.factorial(L - mdeg(n)), math.factorial(nb))


def cpn_finite_map(A: FockMatrix, a: int, b: int, L: int, kd_b: KahlerData) -> FockMatrix:
    """Re-express a chart-a element of the finite algebra in chart b."""
    out = {}
    for (m, n), v in A.entries.items():
        m2, n2, f = cpn_transition_finite(a, b, L, m, n)
        out[(m2, n2)] = out.get((m2, n2), 0) + qq(v) / qq(f)
    return FockMatrix(kd_b, out, (EXACT, EXACT), None, A.lost)


def f_l_project(A: FockMatrix, L: int) -> FockMatrix:
    ent = {k: v for k, v in A.entries.items() if mdeg(k[0]) <= L and mdeg(k[1]) <= L}
    return FockMatrix._raw(A.kd, ent, A.certified, A.band, A.lost)


def finite_block_size(N: int, L: int) -> int:
    return len(multi_indices(N, L)) ** 2


def cpn_finite_kd(N: int, L: int) -> KahlerData:
    """CP^N chart data at 1/hbar = L with the H cutoff at the top of F^L."""
    if L < 1:
        raise DomainError("L must be at least 1")
    return KahlerData.builtin("cpn", N, Fraction(1, L), L)


def shifted_operators(kd: KahlerData, L: int, i: int) -> Tuple[FockMatrix, FockMatrix]:
    """(a^L dagger_i, a_underline^L_i) supported in F^L.

    a^L dagger = sum_{|n| <= L-1} E_{n+e_i,n}/n!, a_underline^L = sum E_{n,n+e_i}/n!.
    """
    if L < 1:
        raise DomainError("L = 0: the shifted operators vanish")
    N = kd.N
    e = unit_index(N, i)
    up, down = {}, {}
    for n in multi_indices(N, L - 1):
        up[(tuple(x + y for x, y in zip(n, e)), n)] = Q(1, mfact(n))
        down[(n, tuple(x + y for x, y in zip(n, e)))] = Q(1, mfact(n))
    return FockMatrix(kd, up, (EXACT, EXACT), (-1, -1)), FockMatrix(kd, down, (EXACT, EXACT), (1, 1))


def shifted_commutator(kd: KahlerData, L: int, i: int, j: int | None = None) -> FockMatrix:
    """[a_underline^L_i, a^L dagger_j] by matrix multiplication."""
    j = i if j is None else j
    _, down = shifted_operators(kd, L, i)
    up, _ = shifted_operators(kd, L, j)
    return fock_mul(down, up) - fock_mul(up, down)


def shifted_commutator_basis_form(kd: KahlerData, L: int, i: int) -> FockMatrix:
    """sum_{|n|<=L} E_{n,n}/n! - sum_{|n|=L} (n_i+1) E_{n,n}/n!."""
    out = {}
    for n in multi_indices(kd.N, L):
        c = Q(1, mfact(n))
        if mdeg(n) == L:
            c -= Q(n[i] + 1, mfact(n))
        if c:
            out[(n, n)] = c
    return FockMatrix(kd, out, (EXACT, EXACT), (0, 0))


def shifted_commutator_function(kd: KahlerData, L: int, i: int) -> TruncatedSeries:
    """Weight P of the closed form 1 - (t/(1+t))^L (1 + L |z^i|^2 / t), t = |z|^2:
    P = (1+t)^L - t^(L-1) (t + L |z^i|^2)."""
    N = kd.N
    t = TruncatedSeries.zero(N)
    for k in range(N):
        e = unit_index(N, k)
        t = t + TruncatedSeries.monomial(e, e)
    one = TruncatedSeries.constant(N, 1)
    ei = unit_index(N, i)
    zi2 = TruncatedSeries.monomial(ei, ei)
    return (one + t) ** L - (t ** (L - 1)) * (t + zi2.scale(L))


def shifted_commutator_closed(kd: KahlerData, L: int, i: int) -> FockMatrix:
    """The closed-form commutator converted to the basis."""
    return to_fock(WeightedElement(shifted_commutator_function(kd, L, i), kd))


# --- cylinder ------------------------------------------------------------------------------


def basis_function_value(kd: KahlerData, m, n, z: Sequence[complex]) -> complex:
    """Value of E_{m,n} = P exp(-Phi/hbar) at a point (P must be a polynomial)."""
    from .fock import basis

    P = from_fock(basis(kd, m, n)).P
    if P.dz != EXACT or P.dzb != EXACT:
        raise PrecisionError("basis function is not a finite polynomial for this potential")
    phi = kd.phi.series
    if phi.dz != EXACT or phi.dzb != EXACT:
        raise PrecisionError("potential must be exact for pointwise evaluation")
    zb = [complex(x).conjugate() for x in z]
    return P.evaluate(z, zb) * cmath.exp(-phi.evaluate(z, zb) / float(kd.hbar))


def cylinder_translation_residual(hbar=1, m=(1,), n=(1,), z=(0.5 + 0.25j,), period=2 * math.pi) -> float:
    """|E_{m,n}(z + 2 pi) - E_{m,n}(z)| on the cylinder chart; nonzero means the
    chart basis is not translation invariant."""
    from .kahler import builtin_potential

    kd = KahlerData(builtin_potential("cylinder", 1), hbar, max(mdeg(m), mdeg(n)) + 1)
    z0 = complex(z[0])
    return abs(basis_function_value(kd, m, n, [z0 + period]) - basis_function_value(kd, m, n, [z0]))
