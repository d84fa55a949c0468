"""Algebraic Sp trace and quadrature traces on C^N and CH^N."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_genlaguerre, roots_jacobi

from .core import DomainError, MultiIndex, PrecisionError, Q, fraction_str, mdeg, mfact, multi_indices, to_fraction, zero_index
from .fock import FockMatrix, basis, fock_mul, from_fock
from .kahler import KahlerData, canonical_model


class DivergentTraceError(DomainError):
    """The integral trace does not converge for this hbar."""


@dataclass(frozen=True)
class TraceSpec:
    """Sp normalization c_p = rational * pi^pi_power."""

    c_p: Fraction = Fraction(1)
    pi_power: int = 0
    model: str = ""

    @property
    def value(self) -> float:
        return float(self.c_p) * math.pi ** self.pi_power

    def label(self) -> str:
        r = fraction_str(self.c_p)
        return r if not self.pi_power else f"{r}*pi^{self.pi_power}"


def chn_c0(hbar, N: int) -> TraceSpec:
    """pi^N Gamma(s-N)/Gamma(s) with s = 1/hbar, which is pi^N / prod_{j=1..N}(s-j)."""
    s = 1 / to_fraction(hbar)
    if s <= N:
        raise DivergentTraceError(f"the CH^{N} trace diverges for 1/hbar = {s} <= {N}")
    d = Fraction(1)
    for j in range(1, N + 1):
        d *= s - j
    return TraceSpec(1 / d, N, "CHn")


def chn_c0_gamma(hbar, N: int) -> float:
    """Same constant through log-Gamma, as an independent float check."""
    s = float(1 / to_fraction(hbar))
    return math.pi ** N * math.exp(gammaln(s - N) - gammaln(s))


def sp_trace(A: FockMatrix, spec: TraceSpec | None = None) -> Fraction:
    """c_p * sum_n A_{n,n} n!, returned as a rational in units of pi^pi_power."""
    spec = spec or TraceSpec()
    tot = Q(0)
    for (m, n), v in A.entries.items():
        if m == n:
            tot += v * mfact(n)
    return to_fraction(tot) * spec.c_p


def cyclicity_check(A: FockMatrix, B: FockMatrix, spec: TraceSpec | None = None) -> Fraction:
    return sp_trace(fock_mul(A, B), spec) - sp_trace(fock_mul(B, A), spec)


def number_operator(kd: KahlerData, i: int, d: int | None = None) -> FockMatrix:
    """N_i = sum_n n_i E_{n,n}/n! on |n| <= d."""
    d = kd.D if d is None else d
    ent = {(n, n): Q(n[i], mfact(n)) for n in multi_indices(kd.N, d) if n[i]}
    return FockMatrix(kd, ent, (d, d), (0, 0))


def number_operator_residual(kd: KahlerData, i: int, m, n) -> Tuple[Fraction, FockMatrix]:
    """(Sp [N_i, E_{m,n}], [N_i, E_{m,n}] - (m_i - n_i) E_{m,n})."""
    d = max(mdeg(m), mdeg(n))
    Ni = number_operator(kd, i, d)
    E = basis(kd, m, n)
    c = fock_mul(Ni, E) - fock_mul(E, Ni)
    return sp_trace(c), c - E.scale(m[i] - n[i])


# --- quadrature ----------------------------------------------------------------------


@dataclass
class QuadratureRule:
    """Gauss rule for int_0^inf f(u) e^{-u} du (laguerre) or
    int_0^1 f(v) (1-v)^alpha dv (jacobi); exact for polynomial f of degree <= degree."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    alpha: float
    degree: int

    @classmethod
    def laguerre(cls, n: int) -> "QuadratureRule":
        x, w = roots_genlaguerre(n, 0.0)
        return cls(np.asarray(x), np.asarray(w), "laguerre", 0.0, 2 * n - 1)

    @classmethod
    def jacobi(cls, n: int, alpha: float) -> "QuadratureRule":
        if alpha <= -1:
            raise DivergentTraceError("weight (1-v)^alpha is not integrable")
        x, w = roots_jacobi(n, alpha, 0.0)
        return cls((np.asarray(x) + 1) / 2, np.asarray(w) / 2 ** (alpha + 1), "jacobi", alpha, 2 * n - 1)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def verify(self, tol: float = 1e-12) -> bool:
        """Compare monomial moments against Gamma / Beta values."""
        for k in range(self.degree + 1):
            got = self.integrate(lambda u: u ** k)
            if self.kind == "laguerre":
                exact = math.exp(gammaln(k + 1))
            else:
                exact = math.exp(gammaln(k + 1) + gammaln(self.alpha + 1) - gammaln(k + self.alpha + 2))
            if abs(got - exact) > tol * max(1.0, abs(exact)):
                return False
        return True


def _nodes_needed(degree: int) -> int:
    return degree // 2 + 2


def _diag_terms(P) -> Dict[MultiIndex, float]:
    """Diagonal coefficients P_{a,a}; off-diagonal monomials integrate to zero
    over the torus angles."""
    out = {}
    for (a, b), c in P.terms().items():
        if a == b:
            out[a] = out.get(a, 0.0) + float(c)
    return out


def _basis_weight(kd: KahlerData, m, n):
    """Polynomial part of the normalized basis function |m><n| = E_{m,n}/sqrt(m! n!)."""
    w = from_fock(basis(kd, m, n))
    if w.P.dz != math.inf or w.P.dzb != math.inf:
        raise PrecisionError("basis function is not a finite polynomial at this cutoff")
    return w.P, 1 / math.sqrt(mfact(m) * mfact(n))


def _check_nodes(nodes, needed):
    if nodes is None:
        return needed
    if nodes < needed:
        warnings.warn(f"quadrature with {nodes} nodes is below the {needed} needed for exactness", RuntimeWarning)
    return nodes


def quad_trace_Cn(m, n, hbar, N: int | None = None, nodes: int | None = None) -> float:
    """(1/(pi hbar)^N) int_{C^N} |m><n| d^{2N}x, which is delta_{m,n}."""
    m, n = tuple(m), tuple(n)
    N = len(m) if N is None else N
    h = to_fraction(hbar)
    kd = KahlerData.builtin("cn", N, h, max(mdeg(m), mdeg(n)))
    P, norm = _basis_weight(kd, m, n)
    deg = max((max(a) for a in _diag_terms(P)), default=0)
    rule = QuadratureRule.laguerre(_check_nodes(nodes, _nodes_needed(deg)))
    hf = float(h)
    total = 0.0
    for a, c in _diag_terms(P).items():
        # int |z^a|^2 e^{-|z|^2/hbar} = prod_i pi hbar^{a_i+1} int u^{a_i} e^{-u} du
        val = c
        for ai in a:
            val *= math.pi * hf ** (ai + 1) * rule.integrate(lambda u, ai=ai: u ** ai)
        total += val
    return norm * total / (math.pi * hf) ** N


def quad_trace_CHn(m, n, hbar, N: int | None = None, normalized: bool = False, nodes: int | None = None) -> float:
    """int_{ball} mu_g |m><n| with mu_g = (1-|z|^2)^{-(N+1)} d^{2N}x.

    Equals c_0 delta_{m,n}; ``normalized`` divides by c_0.
    """
    m, n = tuple(m), tuple(n)
    N = len(m) if N is None else N
    h = to_fraction(hbar)
    s = 1 / h
    if s <= N:
        raise DivergentTraceError(f"the CH^{N} trace diverges for 1/hbar = {s} <= {N}")
    d = max(mdeg(m), mdeg(n))
    kd = KahlerData.builtin("chn", N, h, max(d, 1))
    P, norm = _basis_weight(kd, m, n)
    alpha = float(s) - N - 1
    terms = _diag_terms(P)
    deg = max((sum(a) for a in terms), default=0) + N
    rule = QuadratureRule.jacobi(_check_nodes(nodes, _nodes_needed(deg)), alpha)
    total = 0.0
    for a, c in terms.items():
        total += c * math.pi ** N * _simplex_moment(a, rule)
    val = norm * total
    if normalized:
        val /= chn_c0(h, N).value
    return val


def _simplex_moment(a: Sequence[int], rule: QuadratureRule) -> float:
    """int_{u_i >= 0, sum u <= 1} prod u_i^{a_i} (1 - sum u)^alpha du by stick-breaking:
    u_i = v_i prod_{j<i}(1 - v_j)."""
    N = len(a)
    out = 1.0
    for i in range(N):
        # exponent of (1 - v_i) from later u's and the Jacobian
        later = sum(a[i + 1:]) + (N - 1 - i)
        out *= rule.integrate(lambda v, i=i, later=later: v ** a[i] * (1 - v) ** later)
    return out


def quad_trace_fock(A: FockMatrix, model: str) -> float:
    """Quadrature trace of a whole matrix: the hbar-normalized integral on C^N,
    the raw mu_g integral on CH^N.  Equals c_0 * Sp with c_p = 1."""
    model = canonical_model(model)
    total = 0.0
    kd = A.kd
    for (m, n), v in A.entries.items():
        scale = float(v) * math.sqrt(mfact(m) * mfact(n))
        if model == "Cn":
            total += scale * quad_trace_Cn(m, n, kd.hbar, kd.N)
        elif model == "CHn":
            total += scale * quad_trace_CHn(m, n, kd.hbar, kd.N)
        else:
            raise DomainError("integral traces are available for C^N and CH^N only")
    return total


def default_spec(model: str, hbar, N: int) -> TraceSpec:
    """c_p matching the integral trace where one exists, else 1."""
    model = canonical_model(model)
    if model == "CHn":
        return chn_c0(hbar, N)
    return TraceSpec(Fraction(1), 0, model)
