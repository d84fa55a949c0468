"""Star products with separation of variables, built order by order in hbar.

The left multiplication operator L_f = sum_n hbar^n A^(n) is stored in the
commuting basis D^i = g^{ibar j} d_j, so that A^(n) = sum_alpha a_alpha D^alpha.
Its defining property [L_f, d_lbar Phi + hbar d_lbar] = 0 splits by powers of
hbar into

    sum_alpha a^(n)_alpha alpha_l D^(alpha - e_l)
        = sum_alpha (d_lbar a^(n-1)_alpha) D^alpha - a^(n-1)_alpha [D^alpha, d_lbar],

because [D^i, d_jbar Phi] = delta_ij.  Matching coefficients gives every
a^(n)_alpha from order n-1.  The right operator R_f is the mirror image with
z and zbar exchanged.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Dict, List, Sequence, Tuple, Union

from .core import (
    EXACT,
    DomainError,
    HbarPoly,
    InvariantViolation,
    MultiIndex,
    PoleError,
    Q,
    StructureError,
    madd,
    mbinom,
    mdeg,
    mfact,
    msub,
    multi_indices,
    qq,
    sub_indices,
    to_fraction,
    unit_index,
    zero_index,
)
from .kahler import KahlerData, canonical_model
from .series import HbarSeries, SeriesMatrix, TruncatedSeries

Operator = Dict[MultiIndex, TruncatedSeries]


def _op_add(a: Operator, b: Operator, sign=1) -> Operator:
    out = dict(a)
    for k, v in b.items():
        w = v if sign == 1 else -v
        out[k] = out[k] + w if k in out else w
    return out


class _Calculus:
    """D-basis calculus on one side.

    left:  D^i = sum_j Ginv[i][j] d_j     (z-derivatives), commutator with d_cbar
    right: D^i = sum_j Ginv[j][i] d_jbar  (zbar-derivatives), commutator with d_c
    """

    def __init__(self, kd: KahlerData, side: str):
        if side not in ("left", "right"):
            raise DomainError("side must be 'left' or 'right'")
        self.kd = kd
        self.side = side
        self.N = kd.N
        G, Ginv = kd.G, kd.Ginv
        if side == "left":
            self.dmat, self.M = Ginv, G
            self.dvar, self.cvar = "z", "zb"
        else:
            self.dmat, self.M = Ginv.transpose(), G.transpose()
            self.dvar, self.cvar = "zb", "z"
        self._comm: dict = {}
        self._dmat_c: dict = {}

    # D acting on functions

    def D(self, i: int, s: TruncatedSeries) -> TruncatedSeries:
        out = None
        for j in range(self.N):
            d = s.diff(self.dvar, j)
            if d.is_zero() and out is not None:
                out = out.truncate(d.dz, d.dzb)
                continue
            term = self.dmat[i, j] * d
            out = term if out is None else out + term
        return out

    def derivatives(self, s: TruncatedSeries, max_deg: int) -> Dict[MultiIndex, TruncatedSeries]:
        """D^gamma s for every |gamma| <= max_deg."""
        out = {zero_index(self.N): s}
        for g in multi_indices(self.N, max_deg, 1):
            i = next(j for j, x in enumerate(g) if x)
            out[g] = self.D(i, out[msub(g, unit_index(self.N, i))])
        return out

    def plain_to_D(self, j: int) -> Operator:
        """d_j (resp. d_jbar) = sum_m M[j][m] D^m."""
        return {unit_index(self.N, m): self.M[j, m] for m in range(self.N) if not self.M[j, m].is_zero()}

    # commutators [D^beta, d_c]

    def _base_comm(self, i: int, c: int) -> Operator:
        """[D^i, d_c] = -sum_j (d_c dmat[i][j]) d_j."""
        out: Operator = {}
        for j in range(self.N):
            dc = self.dmat[i, j].diff(self.cvar, c)
            if dc.is_zero():
                continue
            for m in range(self.N):
                t = (dc * self.M[j, m]).scale(-1)
                key = unit_index(self.N, m)
                out[key] = out[key] + t if key in out else t
        return out

    def compose_D_after(self, beta: MultiIndex, op: Operator) -> Operator:
        """D^beta o (sum_alpha s_alpha D^alpha)."""
        out: Operator = {}
        nb = mdeg(beta)
        for alpha, s in op.items():
            ders = self.derivatives(s, nb) if nb else {beta: s}
            for gam in sub_indices(beta):
                gam = tuple(gam)
                coef = mbinom(beta, gam)
                t = ders[gam] if coef == 1 else ders[gam].scale(coef)
                key = madd(msub(beta, gam), alpha)
                out[key] = out[key] + t if key in out else t
        return out

    def comm(self, beta: MultiIndex, c: int) -> Operator:
        key = (beta, c)
        if key in self._comm:
            return self._comm[key]
        if mdeg(beta) == 0:
            res: Operator = {}
        else:
            i = next(j for j, x in enumerate(beta) if x)
            rest = msub(beta, unit_index(self.N, i))
            first = self.compose_D_after(rest, self._base_comm(i, c))
            second = {madd(a, unit_index(self.N, i)): s for a, s in self.comm(rest, c).items()}
            res = _op_add(first, second)
        self._comm[key] = res
        return res


_CALC_CACHE: dict = {}


def calculus(kd: KahlerData, side: str) -> _Calculus:
    key = (id(kd), side)
    cal = _CALC_CACHE.get(key)
    if cal is None or cal.kd is not kd:
        cal = _Calculus(kd, side)
        _CALC_CACHE[key] = cal
    return cal


class DiffOperator:
    """sum_n hbar^n sum_alpha coeff[n][alpha] D^alpha on one side."""

    def __init__(self, parts: List[Operator], cal: _Calculus, basis: str):
        self.parts = parts
        self.cal = cal
        self.basis = basis

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    def coefficient(self, n: int, alpha) -> TruncatedSeries:
        s = self.parts[n].get(tuple(alpha))
        if s is None:
            any_s = next(iter(self.parts[0].values()))
            return TruncatedSeries.zero(self.cal.N, any_s.dz, any_s.dzb)
        return s

    def max_degree(self) -> int:
        return max((mdeg(a) for p in self.parts for a in p), default=0)

    def apply(self, g: Union[TruncatedSeries, HbarSeries]) -> HbarSeries:
        K = self.order
        if isinstance(g, HbarSeries):
            out = None
            for j, gj in enumerate(g.parts[: K + 1]):
                if gj.is_zero() and j:
                    continue
                t = DiffOperator(self.parts[: K + 1 - j], self.cal, self.basis).apply(gj).shift_pad(j, K)
                out = t if out is None else out + t
            return out
        ders = self.cal.derivatives(g, self.max_degree())
        parts = []
        for n, op in enumerate(self.parts):
            acc = None
            for alpha, s in op.items():
                t = s * ders[alpha]
                acc = t if acc is None else acc + t
            if acc is None:
                acc = TruncatedSeries.zero(g.N, g.dz, g.dzb)
            parts.append(acc)
        return HbarSeries(parts, K)


def _build(f: TruncatedSeries, kd: KahlerData, K: int, side: str, check: bool = True) -> DiffOperator:
    if K < 0:
        raise DomainError("hbar order must be non-negative")
    if f.N != kd.N:
        raise StructureError("function and potential differ in dimension")
    cal = calculus(kd, side)
    N = kd.N
    parts: List[Operator] = [{zero_index(N): f}]
    for n in range(1, K + 1):
        prev = parts[-1]
        new: Operator = {}
        for c in range(N):
            rhs: Operator = {}
            for alpha, a in prev.items():
                da = a.diff(cal.cvar, c)
                if not da.is_zero():
                    rhs[alpha] = rhs[alpha] + da if alpha in rhs else da
                else:
                    rhs.setdefault(alpha, da)
                for gam, r in cal.comm(alpha, c).items():
                    t = -(a * r)
                    rhs[gam] = rhs[gam] + t if gam in rhs else t
            for beta, r in rhs.items():
                target = madd(beta, unit_index(N, c))
                val = r.scale(Fraction(1, target[c]))
                if target in new:
                    if check:
                        old = new[target]
                        if not (old - val).is_zero():
                            raise InvariantViolation(f"coefficient {target} at order {n} disagrees between commutator indices")
                        new[target] = old.truncate(*val.cutoffs)
                else:
                    new[target] = val
        # exact zeros carry no information; truncated zeros keep their cutoffs
        new = {a: s for a, s in new.items() if not (s.is_zero() and s.dz == EXACT and s.dzb == EXACT)}
        parts.append(new)
    return DiffOperator(parts, cal, "Dbar" if side == "left" else "D")


def build_left_operator(f: TruncatedSeries, kd: KahlerData, K: int, check: bool = True) -> DiffOperator:
    """L_f with L_f g = f * g, through hbar^K."""
    return _build(f, kd, K, "left", check)


def build_right_operator(f: TruncatedSeries, kd: KahlerData, K: int, check: bool = True) -> DiffOperator:
    """R_f with R_f g = g * f, through hbar^K."""
    return _build(f, kd, K, "right", check)


def _as_hbar(x, K) -> HbarSeries:
    if isinstance(x, HbarSeries):
        return x
    return HbarSeries.of(x, K)


def star_formal(f, g, kd: KahlerData, K: int) -> HbarSeries:
    """f * g through hbar^K; f and g may already carry hbar-gradings."""
    f = _as_hbar(f, K)
    out = None
    for a, fa in enumerate(f.parts[: K + 1]):
        if fa.is_zero():
            continue
        op = build_left_operator(fa, kd, K - a)
        t = op.apply(g).shift_pad(a, K) if a else op.apply(g)
        t = HbarSeries(t.parts, K)
        out = t if out is None else out + t
    if out is None:
        gz = _as_hbar(g, K)
        return HbarSeries([TruncatedSeries.zero(kd.N, *gz.cutoffs())] * (K + 1), K)
    return out


def star_formal_right(f, g, kd: KahlerData, K: int) -> HbarSeries:
    """f * g computed as R_g f (independent of the left construction)."""
    g = _as_hbar(g, K)
    out = None
    for a, ga in enumerate(g.parts[: K + 1]):
        if ga.is_zero():
            continue
        op = build_right_operator(ga, kd, K - a)
        t = op.apply(f)
        t = HbarSeries(t.shift_pad(a, K).parts if a else t.parts, K)
        out = t if out is None else out + t
    if out is None:
        fz = _as_hbar(f, K)
        return HbarSeries([TruncatedSeries.zero(kd.N, *fz.cutoffs())] * (K + 1), K)
    return out


def star_commutator(f, g, kd: KahlerData, K: int) -> HbarSeries:
    return star_formal(f, g, kd, K) - star_formal(g, f, kd, K)


def star_conjugate(f, g, kd: KahlerData, K: int) -> HbarSeries:
    """Residual conj(f*g) - conj(g)*conj(f); vanishes for a real potential."""
    f, g = _as_hbar(f, K), _as_hbar(g, K)
    return star_formal(f, g, kd, K).conj() - star_formal(g.conj(), f.conj(), kd, K)


# --- closed forms -------------------------------------------------------------


def star_closed_Cn(f: TruncatedSeries, g: TruncatedSeries, hbar=None, order: int | None = None):
    """sum_alpha hbar^|alpha| / alpha! (dbar^alpha f)(d^alpha g).

    With ``hbar`` None the result is an HbarSeries (all orders unless
    ``order`` caps it); with a rational hbar it is a TruncatedSeries.
    """
    N = f.N
    if g.N != N:
        raise StructureError("dimension mismatch")
    dmax = min(max(f.degrees()[1], 0), max(g.degrees()[0], 0))
    K = dmax if order is None else order
    terms: List[TruncatedSeries] = []
    for n in range(0, K + 1):
        acc = TruncatedSeries.zero(N, min(f.dz, g.dz), min(f.dzb, g.dzb))
        if n <= dmax:
            for alpha in multi_indices(N, n, n):
                t = f.diff_multi("zb", alpha) * g.diff_multi("z", alpha)
                acc = acc + t.scale(Fraction(1, mfact(alpha)))
        terms.append(acc)
    res = HbarSeries(terms, K)
    if hbar is None:
        return res
    return res.evaluate_hbar(hbar)


def c_n_poly(model: str, n: int, order: int) -> HbarPoly:
    """Coefficient c_n as a truncated power series in hbar.

    CPn: hbar^n / (n! prod_{j<n} (1 - j hbar));  CHn: same with 1 + j hbar.
    """
    model = canonical_model(model)
    sign = {"CPn_chart": -1, "CHn": 1}.get(model)
    if sign is None:
        raise DomainError("closed-form c_n exists for CPn_chart and CHn only")
    den = HbarPoly([1], order)
    for j in range(n):
        den = den * HbarPoly([1, sign * j], order)
    num = HbarPoly([0] * n + [1], order) if n <= order else HbarPoly([0], order)
    return num * den.inverse() / math.factorial(n)


def c_n_value(model: str, n: int, hbar) -> Fraction:
    """c_n at a numeric hbar, from the Gamma functional equation."""
    model = canonical_model(model)
    s = 1 / to_fraction(hbar)
    den = Fraction(math.factorial(n))
    for j in range(n):
        fac = s - j if model == "CPn_chart" else s + j
        if model not in ("CPn_chart", "CHn"):
            raise DomainError("closed-form c_n exists for CPn_chart and CHn only")
        if fac == 0:
            raise PoleError(f"c_{n} has a Gamma pole at 1/hbar = {s}")
        den *= fac
    return 1 / den


def star_closed_CPn_CHn(f: TruncatedSeries, g: TruncatedSeries, kd: KahlerData, n_max: int, hbar=None):
    """sum_n c_n g_{j1 k1bar}...(D^{j1}..D^{jn} f)(D^{k1bar}..D^{knbar} g)."""
    model = canonical_model(kd.model or "")
    if model not in ("CPn_chart", "CHn"):
        raise DomainError("closed form needs a CPn_chart or CHn potential")
    N = kd.N
    right = calculus(kd, "right")  # D^j = g^{j kbar} d_kbar
    left = calculus(kd, "left")  # D^kbar = g^{kbar j} d_j
    fd = right.derivatives(f, n_max)
    gd = left.derivatives(g, n_max)
    parts = []
    for n in range(n_max + 1):
        acc = None
        for js in product(range(N), repeat=n):
            a = _multiset(js, N)
            for ks in product(range(N), repeat=n):
                t = fd[a] * gd[_multiset(ks, N)]
                for j, k in zip(js, ks):
                    t = t * kd.G[j, k]
                acc = t if acc is None else acc + t
        parts.append(acc)
    if hbar is None:
        out = None
        for n, p in enumerate(parts):
            cn = c_n_poly(model, n, n_max)
            t = HbarSeries.of(p, n_max).mul_poly(cn)
            out = t if out is None else out + t
        return out
    out = None
    for n, p in enumerate(parts):
        t = p.scale(c_n_value(model, n, hbar))
        out = t if out is None else out + t
    return out


def _multiset(seq, N) -> MultiIndex:
    out = [0] * N
    for j in seq:
        out[j] += 1
    return tuple(out)


def left_via_zbar_powers(f: TruncatedSeries, g: TruncatedSeries, kd: KahlerData, K: int) -> HbarSeries:
    """L_f g assembled as sum f_{a,b} z^a (L_zbar)^b g for polynomial f."""
    N = kd.N
    Lz = [build_left_operator(TruncatedSeries.zb(N, i), kd, K) for i in range(N)]
    cache: Dict[MultiIndex, HbarSeries] = {zero_index(N): HbarSeries.of(g, K)}

    def power(b):
        if b in cache:
            return cache[b]
        i = next(j for j, x in enumerate(b) if x)
        val = Lz[i].apply(power(msub(b, unit_index(N, i))))
        cache[b] = val
        return val

    out = None
    for (a, b), c in f.terms().items():
        pb = power(b)
        t = HbarSeries([p.mul_monomial(a, zero_index(N), c) for p in pb.parts], K)
        out = t if out is None else out + t
    return out if out is not None else HbarSeries.of(TruncatedSeries.zero(N), K)


# --- invariants -----------------------------------------------------------------


def check_D_operators(kd: KahlerData, degree: int = 2) -> bool:
    """[D^i, d_jbar Phi] = delta_ij on a battery of monomials (both sides)."""
    N = kd.N
    phi = kd.phi.series
    for side in ("left", "right"):
        cal = calculus(kd, side)
        psi = [phi.diff(cal.cvar, j) for j in range(N)]
        for m in multi_indices(N, degree):
            for k in multi_indices(N, degree):
                s = TruncatedSeries.monomial(m, k)
                for i in range(N):
                    for j in range(N):
                        lhs = cal.D(i, psi[j] * s) - psi[j] * cal.D(i, s)
                        rhs = s if i == j else TruncatedSeries.zero(N)
                        if not lhs == rhs:
                            return False
    return True


def commutation_residuals(kd: KahlerData, K: int, cutoffs=None) -> Dict[str, HbarSeries]:
    """Residuals of the six canonical relations, each must vanish.

    [d_i Phi, z^j] = hbar delta_ij, [z^i, z^j] = 0, [d_i Phi, d_j Phi] = 0,
    [zbar^i, d_jbar Phi] = hbar delta_ij, [zbar^i, zbar^j] = 0,
    [d_ibar Phi, d_jbar Phi] = 0.
    """
    N = kd.N
    phi = kd.phi.series
    dphi = [phi.diff("z", i) for i in range(N)]
    dbphi = [phi.diff("zb", i) for i in range(N)]
    z = [TruncatedSeries.z(N, i) for i in range(N)]
    zb = [TruncatedSeries.zb(N, i) for i in range(N)]
    one = TruncatedSeries.constant(N, 1)
    hb = HbarSeries([TruncatedSeries.zero(N), one], K) if K >= 1 else HbarSeries([TruncatedSeries.zero(N)], K)
    zero = HbarSeries([TruncatedSeries.zero(N)], K)
    res: Dict[str, HbarSeries] = {}

    def put(name, r):
        if cutoffs is not None:
            r = r.truncate(*cutoffs)
        res[name] = r

    for i in range(N):
        for j in range(N):
            d = hb if i == j else zero
            put(f"[dPhi_{i},z_{j}]-hbar*delta", star_commutator(dphi[i], z[j], kd, K) - d)
            put(f"[zb_{i},dbPhi_{j}]-hbar*delta", star_commutator(zb[i], dbphi[j], kd, K) - d)
            if i < j:
                put(f"[z_{i},z_{j}]", star_commutator(z[i], z[j], kd, K))
                put(f"[zb_{i},zb_{j}]", star_commutator(zb[i], zb[j], kd, K))
            if i <= j:
                put(f"[dPhi_{i},dPhi_{j}]", star_commutator(dphi[i], dphi[j], kd, K))
                put(f"[dbPhi_{i},dbPhi_{j}]", star_commutator(dbphi[i], dbphi[j], kd, K))
    if N == 1:
        put("[z_0,z_0]", star_commutator(z[0], z[0], kd, K))
        put("[zb_0,zb_0]", star_commutator(zb[0], zb[0], kd, K))
    return res


def associativity_residual(f, g, h, kd: KahlerData, K: int) -> HbarSeries:
    return star_formal(star_formal(f, g, kd, K), h, kd, K) - star_formal(f, star_formal(g, h, kd, K), kd, K)
