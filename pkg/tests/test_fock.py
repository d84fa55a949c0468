import json
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistfock.core import DomainError, PrecisionError, StructureError
from twistfock.fock import (
    FockMatrix,
    Generator,
    WeightedElement,
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
    word_to_fock,
)
from twistfock.kahler import KahlerData
from twistfock.series import TruncatedSeries
from twistfock.verify import random_fock, random_polynomial

C1 = KahlerData.builtin("cn", 1, 1, 5)
CP1 = KahlerData.builtin("cpn", 1, F(1, 3), 3)
one = TruncatedSeries.constant(1, 1)
z, zb = TruncatedSeries.z(1, 0), TruncatedSeries.zb(1, 0)


def W(P, kd=C1):
    return WeightedElement(P, kd)


def test_vacuum_basics():
    assert from_fock(vacuum(C1)).P == one
    assert fock_mul(vacuum(C1), vacuum(C1)) == vacuum(C1)
    assert apply_generator(vacuum(C1), Generator("annihilate_underline", 0, "left")).is_zero()
    assert apply_generator(vacuum(C1), Generator("create", 0, "right")).is_zero()


def test_to_fock_examples():
    assert to_fock(W(one)) == vacuum(C1)
    for m in range(4):
        assert to_fock(W(TruncatedSeries.monomial((m,), (0,)))) == basis(C1, (m,), (0,))
    assert to_fock(W(zb)) == basis(C1, (0,), (1,))


def test_from_fock_examples():
    assert from_fock(basis(C1, (0,), (0,))).P == one
    assert from_fock(basis(CP1, (1,), (1,))).P == TruncatedSeries.monomial((1,), (1,), 3)


def test_to_fock_against_brute_force_solve():
    # E_{m,n} = n! sum_k H_{n,k} z^m zbar^k: expanding to_fock's output must give P back
    kd = KahlerData.builtin("chn", 1, F(1, 4), 4)
    P = TruncatedSeries(1, {((1,), (2,)): F(2, 3), ((0,), (1,)): -1})
    A = to_fock(W(P, kd))
    acc = TruncatedSeries.zero(1)
    for (m, n), v in A.entries.items():
        for k, h in kd.H.row(n):
            acc = acc + TruncatedSeries.monomial(m, k, v * h * math.factorial(n[0]))
    assert acc.truncate(4, 4) == P


def test_from_fock_requires_certified_block():
    A = FockMatrix(C1, {}, (0, 0))
    A.certified = (-1, -1)
    with pytest.raises(PrecisionError):
        from_fock(A)


def test_product_examples():
    assert fock_mul(basis(C1, (1,), (2,)), basis(C1, (1,), (0,))).is_zero()
    assert fock_mul(basis(C1, (0,), (1,)), basis(C1, (1,), (0,))) == vacuum(C1)
    assert fock_mul(basis(C1, (1,), (2,)), basis(C1, (2,), (0,))) == basis(C1, (1,), (0,), 2)


def test_product_through_functions():
    # zbar e^{-|z|^2} * z e^{-|z|^2} = e^{-|z|^2} on C^1 at hbar = 1
    a, b = basis(C1, (0,), (1,)), basis(C1, (1,), (0,))
    assert from_fock(a).P == zb and from_fock(b).P == z
    assert from_fock(fock_mul(a, b)).P == one


def test_generator_examples():
    e1 = Generator("create", 0, "left")
    assert apply_generator(vacuum(C1), e1) == basis(C1, (1,), (0,))
    ua = Generator("annihilate_underline", 0, "left")
    for m in range(1, 4):
        assert apply_generator(basis(C1, (m,), (2,)), ua) == basis(C1, (m - 1,), (2,), m)
    # vac * zbar = zbar e^{-Phi}; zbar * vac = 0 by the vacuum lemma
    r = apply_generator(vacuum(C1), Generator("a_bar", 0, "right"))
    assert from_fock(r).P == zb
    assert apply_generator(vacuum(C1), Generator("a_bar", 0, "left")).is_zero()


def test_generator_parse_and_errors():
    assert Generator.parse("right:a_bar:1") == Generator("a_bar", 1, "right")
    with pytest.raises(DomainError):
        Generator.parse("left:create")
    with pytest.raises(DomainError):
        Generator("nope", 0)
    with pytest.raises(DomainError):
        apply_generator(vacuum(C1), Generator("a_bar", 0, "left"), "weighted")


def test_word_examples():
    w = word_to_fock([Generator("create", 0, "left"), Generator("annihilate_underline", 0, "right")], C1)
    assert w == basis(C1, (1,), (1,))
    d = 3
    ab = word_to_fock([Generator("create", 0, "left"), Generator("annihilate_underline", 0, "left")], C1, "identity", d)
    ba = word_to_fock([Generator("annihilate_underline", 0, "left"), Generator("create", 0, "left")], C1, "identity", d)
    c = ab - ba
    assert (c - identity(C1, d)).truncate(*c.certified).is_zero() and min(c.certified) >= d - 1
    ab = word_to_fock([Generator("a_underline_dagger", 0, "left"), Generator("a_bar", 0, "left")], C1, "identity", d)
    ba = word_to_fock([Generator("a_bar", 0, "left"), Generator("a_underline_dagger", 0, "left")], C1, "identity", d)
    c = ab - ba
    assert (c - identity(C1, d)).truncate(*c.certified).is_zero() and min(c.certified) >= d - 1
    with pytest.raises(DomainError):
        word_to_fock([], C1)


def test_shift_past_cutoff_is_flagged():
    x = basis(C1, (5,), (0,))
    y = apply_generator(x, Generator("create", 0, "left"))
    assert y.lost and y.is_zero()


def test_completeness_examples():
    assert completeness_defect(C1, 3).is_zero()
    assert completeness_defect(CP1, 3).is_zero()
    assert completeness_defect(KahlerData.builtin("cpn", 1, F(1, 3), 4), 4).is_zero()
    with pytest.raises(PrecisionError):
        completeness_defect(C1, 6)


def test_conjugation_examples():
    assert conjugate_fock(vacuum(C1)) == vacuum(C1)
    assert conjugate_fock(basis(C1, (1,), (0,))) == basis(C1, (0,), (1,))


def test_commutators_and_vacuum_identities():
    for kd in (C1, CP1, KahlerData.builtin("chn", 2, F(1, 5), 3), KahlerData.builtin("perturbed", 2, F(1, 2), 3)):
        assert all(r.is_zero() for r in canonical_commutators(kd).values())
        for n in ((0,) * kd.N, (1,) + (0,) * (kd.N - 1)):
            assert vac_dphi_residual(kd, n).is_zero()
        f = random_polynomial(random.Random(0), kd.N, 2, 4)
        r1, r2 = vacuum_lemma_residuals(f, kd)
        assert r1.is_zero() and r2.is_zero()


def test_mixed_commutator_on_cn():
    kd = KahlerData.builtin("cn", 2, F(1, 3), 4)
    for i in range(2):
        for j in range(2):
            c = mixed_commutator(kd, i, j)
            assert (c - identity(kd).scale(kd.hbar if i == j else 0)).is_zero()


def test_formal_hbar_rejected():
    with pytest.raises(DomainError):
        vacuum(KahlerData.builtin("cn", 1))


def test_mixed_kahler_data_rejected():
    with pytest.raises(StructureError):
        vacuum(C1) + vacuum(KahlerData.builtin("cn", 1, F(1, 2), 5))


def test_json_round_trip():
    A = random_fock(random.Random(1), CP1, 3)
    obj = json.loads(json.dumps(A.to_json_obj()))
    assert FockMatrix.from_json_obj(obj, CP1) == A


def test_normalized_entries():
    A = basis(C1, (2,), (1,), F(1, 2))
    assert A.normalized_entries() == {((2,), (1,)): (F(1, 2), F(2))}


def test_outer_product_through_functions():
    # z e^{-Phi} * zbar e^{-Phi} = E_{1,0} E_{0,1} = E_{1,1}, the function z zbar e^{-Phi}
    a, b = to_fock(W(z)), to_fock(W(zb))
    assert from_fock(fock_mul(a, b)).P == TruncatedSeries.monomial((1,), (1,))


# --- properties --------------------------------------------------------------------------------

MODELS = [
    C1,
    KahlerData.builtin("cn", 2, F(1, 2), 4),
    CP1,
    KahlerData.builtin("chn", 1, F(1, 5), 4),
    KahlerData.builtin("perturbed", 2, F(1, 2), 4),
]
seeds = st.integers(0, 10 ** 6)
models = st.sampled_from(MODELS)


@given(models, seeds)
def test_round_trip(kd, seed):
    A = random_fock(random.Random(seed), kd, min(kd.D, 3))
    assert to_fock(from_fock(A)) == A
    rng = random.Random(seed)
    P = random_polynomial(rng, kd.N, min(kd.D, 2), 4)
    assert from_fock(to_fock(W(P, kd))).P.truncate(kd.D, kd.D) == P.truncate(kd.D, kd.D)


@given(models, seeds)
def test_conjugation_involution(kd, seed):
    A = random_fock(random.Random(seed), kd, min(kd.D, 3))
    c = conjugate_fock(A)
    assert c == conjugate_fock_oracle(A)
    assert conjugate_fock(c) == A


@given(models, seeds)
def test_fock_mul_associative(kd, seed):
    rng = random.Random(seed)
    A, B, C = (random_fock(rng, kd, min(kd.D, 3)) for _ in range(3))
    assert fock_mul(fock_mul(A, B), C) == fock_mul(A, fock_mul(B, C))


@given(models, seeds, st.sampled_from([("left", "create"), ("left", "annihilate_underline"), ("right", "a_bar"), ("right", "a_underline_dagger")]))
def test_two_path(kd, seed, combo):
    rng = random.Random(seed)
    x = random_fock(rng, kd, 2)
    g = Generator(combo[1], rng.randrange(kd.N), combo[0])
    a = apply_generator(x, g, "matrix").truncate(2, 2)
    b = apply_generator(x, g, "weighted").truncate(2, 2)
    assert a == b
