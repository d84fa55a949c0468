"""Invariant battery shared by the CLI ``verify`` command and the tests."""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .core import EXACT, TwistFockError, mdeg, multi_indices, to_fraction, unit_index, zero_index
from .fock import (
    FockMatrix,
    Generator,
    apply_generator,
    basis,
    canonical_commutators,
    completeness_defect,
    conjugate_fock,
    conjugate_fock_oracle,
    fock_mul,
    from_fock,
    identity,
    mixed_commutator,
    to_fock,
    vac_dphi_residual,
    vacuum,
    vacuum_lemma_residuals,
)
from .kahler import KahlerData, builtin_potential, canonical_model
from .series import HbarSeries, TruncatedSeries

SUITES = ("starprod", "fock", "charts", "trace")


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: str
    detail: str = ""

    def to_json_obj(self) -> dict:
        return {"name": self.name, "pass": self.passed, "residual": self.residual, "detail": self.detail}


def summarize(x) -> str:
    """'0' for an exactly vanishing residual, else a short description."""
    if isinstance(x, HbarSeries):
        nz = sum(len(p) for p in x.parts)
        return "0" if nz == 0 else f"{nz} nonzero coefficients"
    if isinstance(x, TruncatedSeries):
        return "0" if x.is_zero() else f"{len(x)} nonzero coefficients"
    if isinstance(x, FockMatrix):
        return "0" if x.is_zero() else f"{len(x.entries)} nonzero entries"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (int, Fraction)):
        return str(x)
    return str(x)


def _is_zero(x) -> bool:
    if isinstance(x, (HbarSeries, TruncatedSeries, FockMatrix)):
        return x.is_zero()
    return x == 0


# --- random inputs ---------------------------------------------------------------


def random_polynomial(rng: random.Random, N: int, max_deg: int = 2, nterms: int = 4) -> TruncatedSeries:
    mons = [(m, k) for m in multi_indices(N, max_deg) for k in multi_indices(N, max_deg)]
    terms = {}
    for mk in rng.sample(mons, min(nterms, len(mons))):
        terms[mk] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return TruncatedSeries(N, terms)


def random_fock(rng: random.Random, kd: KahlerData, d: int, nterms: int = 5) -> FockMatrix:
    idx = multi_indices(kd.N, d)
    ent = {}
    for _ in range(nterms):
        ent[(rng.choice(idx), rng.choice(idx))] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return FockMatrix(kd, ent)


# --- configuration ---------------------------------------------------------------


@dataclass
class VerifyConfig:
    model: str = "cn"
    N: int = 1
    hbar: Optional[Fraction] = None
    cutoff: int = 4
    order: int = 3
    seed: int = 0
    samples: int = 5
    potential: Optional[object] = None  # KahlerPotential overriding the model

    def kd_numeric(self) -> KahlerData:
        if self.potential is not None:
            return KahlerData(self.potential, self.hbar, self.cutoff)
        return KahlerData.builtin(self.model, self.N, self.hbar, self.cutoff)

    def kd_formal(self) -> KahlerData:
        p = self.cutoff + self.order + 1
        if self.potential is not None:
            return KahlerData(self.potential, None, None, p)
        return KahlerData.builtin(self.model, self.N, precision=p)


def _run(name: str, fn: Callable[[], tuple]) -> CheckResult:
    try:
        ok, residual, detail = fn()
        return CheckResult(name, bool(ok), residual, detail)
    except TwistFockError as exc:
        return CheckResult(name, False, "error", f"{type(exc).__name__}: {exc}")


def _zero_check(x, detail=""):
    return _is_zero(x), summarize(x), detail


# --- suites ----------------------------------------------------------------------


def starprod_checks(cfg: VerifyConfig) -> List[tuple]:
    from .starprod import (
        associativity_residual,
        check_D_operators,
        commutation_residuals,
        star_closed_CPn_CHn,
        star_closed_Cn,
        star_conjugate,
        star_formal,
        star_formal_right,
    )

    kd = cfg.kd_formal()
    K = cfg.order
    N = kd.N
    box = (cfg.cutoff, cfg.cutoff)
    rng = random.Random(cfg.seed)
    model = canonical_model(kd.model) if kd.model else ""
    checks = []

    def comm():
        res = commutation_residuals(kd, K, box)
        bad = [k for k, v in res.items() if not v.is_zero()]
        cert = min(min(v.cutoffs()) for v in res.values())
        ok = not bad and cert >= cfg.cutoff
        return ok, "0" if not bad else f"{len(bad)} relations nonzero", f"{len(res)} relations, certified to {cert}"

    checks.append(("commutation relations", comm))
    checks.append(("D-operator relation", lambda: (check_D_operators(kd, 2), "0", "")))

    triples = [tuple(random_polynomial(rng, N, 2, 3) for _ in range(3)) for _ in range(cfg.samples)]

    def assoc():
        bad = 0
        for f, g, h in triples:
            r = associativity_residual(f, g, h, kd, K).truncate(*box)
            bad += not r.is_zero()
        return bad == 0, "0" if not bad else f"{bad} triples nonzero", f"{len(triples)} seeded triples"

    checks.append(("associativity", assoc))

    pairs = [(random_polynomial(rng, N, 2, 3), random_polynomial(rng, N, 2, 3)) for _ in range(cfg.samples)]

    def left_right():
        bad = sum(
            not (star_formal(f, g, kd, K) - star_formal_right(f, g, kd, K)).truncate(*box).is_zero() for f, g in pairs
        )
        return bad == 0, "0" if not bad else f"{bad} pairs differ", "left and right operator constructions"

    checks.append(("left/right agreement", left_right))

    def conj():
        bad = sum(not star_conjugate(f, g, kd, K).truncate(*box).is_zero() for f, g in pairs)
        return bad == 0, "0" if not bad else f"{bad} pairs nonzero", ""

    checks.append(("conjugation", conj))

    def separation():
        bad = 0
        for f, g in pairs:
            hol, anti = f.holomorphic_part(), g.antiholomorphic_part()
            bad += not (star_formal(hol, g, kd, K) - HbarSeries.of(hol * g, K)).truncate(*box).is_zero()
            bad += not (star_formal(f, anti, kd, K) - HbarSeries.of(f * anti, K)).truncate(*box).is_zero()
        return bad == 0, "0" if not bad else f"{bad} nonzero", "holomorphic left / antiholomorphic right"

    checks.append(("separation of variables", separation))

    if model == "Cn":

        def closed():
            bad = 0
            for f, g in pairs:
                a = star_formal(f, g, kd, K)
                b = star_closed_Cn(f, g, order=K)
                bad += not (a - b).is_zero()
            return bad == 0, "0" if not bad else f"{bad} pairs differ", "closed C^N formula"

        checks.append(("closed form", closed))
    elif model in ("CPn_chart", "CHn"):

        def closed():
            n = min(K, 3)
            bad = 0
            for f, g in pairs:
                a = star_formal(f, g, kd, n)
                b = star_closed_CPn_CHn(f, g, kd, n)
                bad += not (a - b).truncate(*box).is_zero()
            return bad == 0, "0" if not bad else f"{bad} pairs differ", f"closed formula through hbar^{n}"

        checks.append(("closed form", closed))
    return checks


def fock_checks(cfg: VerifyConfig) -> List[tuple]:
    kd = cfg.kd_numeric()
    N, D = kd.N, kd.D
    rng = random.Random(cfg.seed)
    d = max(D - 1, 0)
    checks = []
    vac = vacuum(kd)
    checks.append(("vacuum idempotent", lambda: _zero_check(fock_mul(vac, vac) - vac)))

    def delta_rule():
        bad = 0
        idx = multi_indices(N, min(D, 2))
        for m in idx:
            for n in idx:
                for k in idx:
                    for l in idx:
                        p = fock_mul(basis(kd, m, n), basis(kd, k, l))
                        exp = basis(kd, m, l, math.prod(math.factorial(x) for x in n)) if n == k else vac.scale(0)
                        bad += not (p - exp).is_zero()
        return bad == 0, "0" if not bad else f"{bad} products wrong", ""

    checks.append(("basis delta rule", delta_rule))

    def assoc():
        bad = 0
        for _ in range(cfg.samples):
            A, B, C = (random_fock(rng, kd, min(D, 3)) for _ in range(3))
            bad += not (fock_mul(fock_mul(A, B), C) - fock_mul(A, fock_mul(B, C))).is_zero()
        return bad == 0, "0" if not bad else f"{bad} triples nonzero", ""

    checks.append(("fock_mul associativity", assoc))

    def vacdphi():
        bad = sum(not vac_dphi_residual(kd, n).is_zero() for n in multi_indices(N, d))
        return bad == 0, "0" if not bad else f"{bad} indices nonzero", f"|n| <= {d}"

    checks.append(("vacuum and dPhi powers", vacdphi))

    def lemmas():
        bad = 0
        for _ in range(cfg.samples):
            f = random_polynomial(rng, N, min(2, d), 3)
            r1, r2 = vacuum_lemma_residuals(f, kd)
            bad += (not r1.is_zero()) + (not r2.is_zero())
        return bad == 0, "0" if not bad else f"{bad} nonzero", ""

    checks.append(("vacuum lemmas", lemmas))
    checks.append(("completeness", lambda: _zero_check(completeness_defect(kd, D), f"through bidegree ({D},{D})")))

    def commutators():
        res = canonical_commutators(kd)
        bad = [k for k, v in res.items() if not v.is_zero()]
        return not bad, "0" if not bad else ", ".join(bad), f"{len(res)} relations"

    checks.append(("generator commutators", commutators))

    if kd.model and canonical_model(kd.model) == "Cn":

        def mixed():
            bad = 0
            for i in range(N):
                for j in range(N):
                    c = mixed_commutator(kd, i, j)
                    exp = identity(kd).scale(kd.hbar if i == j else 0)
                    bad += not (c - exp).is_zero()
            return bad == 0, "0" if not bad else f"{bad} nonzero", "[a, a^dagger] = hbar"

        checks.append(("mixed commutator on C^N", mixed))

    def two_path():
        bad = 0
        blk = min(3, max(D - 2, 0))
        for i in range(N):
            for side, kind in (("left", "create"), ("left", "annihilate_underline"), ("right", "a_bar"), ("right", "a_underline_dagger")):
                g = Generator(kind, i, side)
                x = random_fock(rng, kd, blk)
                a = apply_generator(x, g, "matrix")
                b = apply_generator(x, g, "weighted")
                bad += not (a - b).is_zero()
        return bad == 0, "0" if not bad else f"{bad} disagreements", ""

    checks.append(("two-path generators", two_path))

    def conj():
        bad = 0
        for _ in range(cfg.samples):
            A = random_fock(rng, kd, min(D, 3))
            c = conjugate_fock(A)
            bad += not (c - conjugate_fock_oracle(A)).is_zero()
            bad += not (conjugate_fock(c) - A).is_zero()
        return bad == 0, "0" if not bad else f"{bad} nonzero", "oracle and involution"

    checks.append(("conjugation", conj))

    def roundtrip():
        bad = 0
        for _ in range(cfg.samples):
            A = random_fock(rng, kd, min(D, 3))
            bad += not (to_fock(from_fock(A)) - A).is_zero()
        return bad == 0, "0" if not bad else f"{bad} nonzero", ""

    checks.append(("to/from round trip", roundtrip))
    return checks


def charts_checks(cfg: VerifyConfig) -> List[tuple]:
    from .charts import (
        AnalyticTransition,
        cpn_finite_map,
        cpn_transition_finite,
        cylinder_translation_residual,
        reexpansion_oracle,
        roundtrip_defect,
        shifted_commutator,
        shifted_commutator_basis_form,
        shifted_commutator_closed,
        transition_matrix,
    )
    from .kahler import KahlerPotential

    model = canonical_model(cfg.model)
    checks = []
    if model == "CPn_chart":
        s = 1 / cfg.hbar
        if s.denominator != 1:
            return [("finite algebra", lambda: (False, "error", "1/hbar must be an integer for F^L"))]
        L = int(s)
        N = cfg.N
        kd = KahlerData.builtin("cpn", N, cfg.hbar, L)

        def involution():
            bad = 0
            for m in multi_indices(N, L):
                for n in multi_indices(N, L):
                    m2, n2, f = cpn_transition_finite(0, 1, L, m, n)
                    m3, n3, g = cpn_transition_finite(1, 0, L, m2, n2)
                    bad += (m3, n3) != (m, n) or f * g != 1
            return bad == 0, "0" if not bad else f"{bad} pairs", f"L = {L}"

        checks.append(("finite transition involution", involution))
        T_ba = transition_matrix(AnalyticTransition.cpn_swap(N, L, 0, 1), kd, kd)
        T_ab = transition_matrix(AnalyticTransition.cpn_swap(N, L, 1, 0), kd, kd)
        checks.append(("transition round trip", lambda: (roundtrip_defect(T_ab, T_ba) == 0, str(roundtrip_defect(T_ab, T_ba)), "")))

        def homomorphism():
            rng = random.Random(cfg.seed)
            bad = 0
            for _ in range(cfg.samples):
                A, B = random_fock(rng, kd, L), random_fock(rng, kd, L)
                lhs = cpn_finite_map(fock_mul(A, B), 0, 1, L, kd)
                rhs = fock_mul(cpn_finite_map(A, 0, 1, L, kd), cpn_finite_map(B, 0, 1, L, kd))
                bad += not (lhs - rhs).is_zero()
                bad += not (T_ab.apply(A) - cpn_finite_map(A, 0, 1, L, kd)).is_zero()
            return bad == 0, "0" if not bad else f"{bad} nonzero", ""

        checks.append(("transition homomorphism", homomorphism))

        def shifted():
            bad = 0
            for i in range(N):
                c = shifted_commutator(kd, L, i)
                bad += not (c - shifted_commutator_basis_form(kd, L, i)).is_zero()
                bad += not (c - shifted_commutator_closed(kd, L, i)).is_zero()
            return bad == 0, "0" if not bad else f"{bad} nonzero", ""

        checks.append(("shifted operator commutator", shifted))
    elif model == "Cn" and cfg.N == 1:
        h = cfg.hbar
        kda = KahlerData.builtin("cn", 1, h, cfg.cutoff)
        pb = KahlerPotential(TruncatedSeries(1, {((1,), (1,)): Fraction(1, 4)}), True, "Cn_scaled")
        kdb = KahlerData(pb, h, cfg.cutoff)
        t_ba = AnalyticTransition.dilation(1, 2)
        t_ab = AnalyticTransition.dilation(1, Fraction(1, 2))
        T_ba = transition_matrix(t_ba, kda, kdb)
        T_ab = transition_matrix(t_ab, kdb, kda)
        checks.append(("dilation round trip", lambda: (roundtrip_defect(T_ab, T_ba) == 0, str(roundtrip_defect(T_ab, T_ba)), "")))

        def oracle():
            bad = 0
            for m in multi_indices(1, cfg.cutoff):
                for n in multi_indices(1, cfg.cutoff):
                    img = FockMatrix(kda, T_ba.image(m, n))
                    bad += not (img - reexpansion_oracle(t_ba, kda, kdb, m, n)).is_zero()
            return bad == 0, "0" if not bad else f"{bad} nonzero", ""

        checks.append(("dilation re-expansion", oracle))
    elif model == "cylinder_chart":

        def cyl():
            r = cylinder_translation_residual(cfg.hbar)
            return r > 1e-6, repr(r), "nonzero residual expected: chart basis is not 2 pi periodic"

        checks.append(("cylinder translation", cyl))
    return checks


def trace_checks(cfg: VerifyConfig) -> List[tuple]:
    from .trace import (
        chn_c0,
        cyclicity_check,
        default_spec,
        number_operator_residual,
        quad_trace_Cn,
        quad_trace_CHn,
        quad_trace_fock,
        sp_trace,
    )

    kd = cfg.kd_numeric()
    N, D = kd.N, kd.D
    rng = random.Random(cfg.seed)
    model = canonical_model(kd.model) if kd.model else ""
    checks = []

    def cyc():
        bad = 0
        for _ in range(cfg.samples * 2):
            A, B = random_fock(rng, kd, min(D, 3)), random_fock(rng, kd, min(D, 3))
            bad += cyclicity_check(A, B) != 0
        return bad == 0, "0" if not bad else f"{bad} pairs", ""

    checks.append(("Sp cyclicity", cyc))

    def numop():
        bad = 0
        for i in range(N):
            for m in multi_indices(N, min(D, 3)):
                for n in multi_indices(N, min(D, 3)):
                    t, r = number_operator_residual(kd, i, m, n)
                    bad += t != 0 or not r.is_zero()
        return bad == 0, "0" if not bad else f"{bad} nonzero", ""

    checks.append(("number operator", numop))
    checks.append(("Sp vacuum", lambda: (sp_trace(vacuum(kd)) == 1, str(sp_trace(vacuum(kd)) - 1), "c_p = 1")))
    if model in ("Cn", "CHn"):
        blk = min(D, 3)

        def quad():
            worst = 0.0
            for m in multi_indices(N, blk):
                for n in multi_indices(N, blk):
                    if model == "Cn":
                        v = quad_trace_Cn(m, n, kd.hbar, N)
                    else:
                        v = quad_trace_CHn(m, n, kd.hbar, N, normalized=True)
                    worst = max(worst, abs(v - (1.0 if m == n else 0.0)))
            return worst < 1e-8, repr(worst), f"delta block |m|,|n| <= {blk}"

        checks.append(("quadrature delta", quad))

        def prop():
            spec = default_spec(model, kd.hbar, N)
            worst = 0.0
            for _ in range(cfg.samples):
                A = random_fock(rng, kd, blk)
                q = quad_trace_fock(A, model)
                worst = max(worst, abs(q - spec.value * float(sp_trace(A))))
            return worst < 1e-8, repr(worst), "quadrature = c_0 Sp"

        checks.append(("quadrature proportional to Sp", prop))
    return checks


_SUITE_FNS = {"starprod": starprod_checks, "fock": fock_checks, "charts": charts_checks, "trace": trace_checks}


def run_suites(suites, cfg: VerifyConfig, threads: int | None = None) -> Dict[str, List[CheckResult]]:
    threads = threads or int(os.environ.get("TWISTFOCK_THREADS", "1"))
    plan = []
    for s in suites:
        try:
            plan.extend((s, name, fn) for name, fn in _SUITE_FNS[s](cfg))
        except TwistFockError as exc:
            plan.append((s, "setup", lambda exc=exc: (False, "error", f"{type(exc).__name__}: {exc}")))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda p: _run(p[1], p[2]), plan))
    else:
        results = [_run(name, fn) for _, name, fn in plan]
    out: Dict[str, List[CheckResult]] = {s: [] for s in suites}
    for (s, _, _), r in zip(plan, results):
        out[s].append(r)
    return out
