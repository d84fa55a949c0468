import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistfock.charts import (
    AnalyticTransition,
    compose_normalized,
    cpn_finite_kd,
    cpn_finite_map,
    cpn_transition_finite,
    cylinder_translation_residual,
    f_l_project,
    finite_block_size,
    reexpansion_oracle,
    roundtrip_defect,
    shifted_commutator,
    shifted_commutator_basis_form,
    shifted_commutator_closed,
    shifted_operators,
    sqrt_normal,
    sqrt_product,
    transition_coefficients,
    transition_matrix,
)
from twistfock.core import ChartError, DomainError, RepresentationError, multi_indices
from twistfock.fock import FockMatrix, basis, fock_mul
from twistfock.kahler import KahlerData, KahlerPotential
from twistfock.series import HbarSeries, TruncatedSeries
from twistfock.starprod import star_formal
from twistfock.verify import random_fock, random_polynomial


def scaled_chart(c, hbar=None, D=None, precision=None):
    """Chart b of the dilation w = c z on C^1: Phi_b = |w|^2 / c^2."""
    pb = KahlerPotential(TruncatedSeries(1, {((1,), (1,)): 1 / F(c) ** 2}), True, "Cn_scaled")
    return KahlerData(pb, hbar, D, precision)


def test_coefficients_identity_and_dilation():
    for t, f in ((AnalyticTransition.identity(1), lambda a: 1), (AnalyticTransition.dilation(1, 2), lambda a: 2 ** a)):
        co = transition_coefficients(t, 1, 4, 6)
        for (a,), (_, C) in co.items():
            assert C == ({(a,): f(a)} if f(a) else {})


def test_coefficients_cpn_swap_about_one():
    L = 3
    t = AnalyticTransition.cpn_swap(1, L, 0, 1, base=(1,))
    co = transition_coefficients(t, F(1, L), L, 6)
    for (a,), (_, C) in co.items():
        assert C == {(j,): math.comb(L - a, j) for j in range(L - a + 1)}


def test_cpn_swap_pole_at_origin():
    t = AnalyticTransition.cpn_swap(1, 2, 0, 1)
    with pytest.raises(ChartError):
        t.factor((3,), 4)


def test_chart_errors():
    with pytest.raises(ChartError):
        AnalyticTransition.dilation(1, 0)
    with pytest.raises(ChartError):
        AnalyticTransition.from_series([TruncatedSeries.zb(1, 0)], None, 1)
    with pytest.raises(ChartError):
        AnalyticTransition.from_series([TruncatedSeries.z(1, 0).scale(0)], None, 1)
    with pytest.raises(ChartError):
        AnalyticTransition.cpn_swap(1, 2, 1, 1)


def test_identity_transition_matrix():
    kd = KahlerData.builtin("cn", 1, F(1, 2), 4)
    T = transition_matrix(AnalyticTransition.identity(1), kd, kd)
    assert all(row == {k: 1} for k, row in T.rows.items())


def test_dilation_reexpansion():
    h = F(1)
    kda, kdb = KahlerData.builtin("cn", 1, h, 5), scaled_chart(2, h, 5)
    t = AnalyticTransition.dilation(1, 2)
    T = transition_matrix(t, kda, kdb)
    for m in multi_indices(1, 5):
        for n in multi_indices(1, 5):
            assert FockMatrix(kda, T.image(m, n)) == reexpansion_oracle(t, kda, kdb, m, n)
    # H^b_nn = 4^-n / n!, so E^b_{m,n} = 2^{|m|-|n|} E^a_{m,n}
    assert T.image((1,), (3,)) == {((1,), (3,)): F(1, 4)}


def test_from_series_matches_dilation():
    h = F(1, 2)
    kda, kdb = KahlerData.builtin("cn", 1, h, 4), scaled_chart(3, h, 4)
    t1 = AnalyticTransition.dilation(1, 3)
    t2 = AnalyticTransition.from_series([TruncatedSeries.z(1, 0).scale(3)], None, h)
    assert transition_matrix(t1, kda, kdb).rows == transition_matrix(t2, kda, kdb).rows


@given(st.sampled_from([F(2), F(1, 3), F(-5, 2), F(7, 4)]), st.sampled_from([F(1), F(1, 2), F(1, 3)]))
def test_dilation_cocycle(c, h):
    kda, kdb = KahlerData.builtin("cn", 1, h, 4), scaled_chart(c, h, 4)
    T_ba = transition_matrix(AnalyticTransition.dilation(1, c), kda, kdb)
    T_ab = transition_matrix(AnalyticTransition.dilation(1, 1 / c), kdb, kda)
    assert roundtrip_defect(T_ab, T_ba) == 0
    comp = compose_normalized(T_ab, T_ba)
    assert all(row == {k: 1} for k, row in comp.items())


def test_sqrt_bookkeeping():
    assert sqrt_normal(F(3), F(8)) == (F(6), F(2))
    assert sqrt_product((F(1), F(2)), (F(3), F(8))) == 12
    with pytest.raises(RepresentationError):
        sqrt_product((F(1), F(2)), (F(1), F(3)))


def test_star_product_compatible_across_dilation():
    c, K = F(2), 3
    kda = KahlerData.builtin("cn", 1, precision=8)
    kdb = scaled_chart(c, precision=8)

    def pull(f):
        return TruncatedSeries(1, {(m, k): v * c ** (m[0] + k[0]) for (m, k), v in f.terms().items()})

    rng = random.Random(11)
    for _ in range(5):
        f, g = random_polynomial(rng, 1, 3, 4), random_polynomial(rng, 1, 3, 4)
        b = star_formal(f, g, kdb, K)
        a = star_formal(pull(f), pull(g), kda, K)
        assert HbarSeries([pull(p) for p in b.parts], K) == a


# --- finite CP^N algebra -----------------------------------------------------------------------


def test_finite_map_examples():
    assert cpn_transition_finite(0, 1, 1, (0,), (0,))[:2] == ((1,), (1,))
    for L in range(1, 5):
        assert cpn_transition_finite(0, 1, L, (L,), (L,))[:2] == ((0,), (0,))
    with pytest.raises(RepresentationError):
        cpn_transition_finite(0, 1, 2, (3,), (0,))


@pytest.mark.parametrize("N,L", [(1, 1), (1, 3), (2, 2)])
def test_finite_map_agrees_with_general_formula(N, L):
    kd = cpn_finite_kd(N, L)
    T = transition_matrix(AnalyticTransition.cpn_swap(N, L, 1, 0), kd, kd)
    for m in multi_indices(N, L):
        for n in multi_indices(N, L):
            A = basis(kd, m, n)
            assert T.apply(A) == cpn_finite_map(A, 0, 1, L, kd)


@pytest.mark.parametrize("N,L", [(1, 2), (2, 2)])
def test_finite_map_is_a_bijection(N, L):
    idx = [(m, n) for m in multi_indices(N, L) for n in multi_indices(N, L)]
    images = {cpn_transition_finite(0, 1, L, m, n)[:2] for m, n in idx}
    assert images == set(idx)


def test_f_l_project():
    L = 2
    kd = KahlerData.builtin("cpn", 1, F(1, L), L)
    A = random_fock(random.Random(2), kd, L)
    assert f_l_project(A, L) == A
    assert f_l_project(f_l_project(A, L), L) == f_l_project(A, L)
    B = random_fock(random.Random(3), kd, L)
    P = fock_mul(f_l_project(A, L), f_l_project(B, L))
    assert f_l_project(P, L) == P
    assert finite_block_size(1, L) == (L + 1) ** 2


def test_shifted_operator_examples():
    kd = cpn_finite_kd(1, 1)
    up, down = shifted_operators(kd, 1, 0)
    assert up == basis(kd, (1,), (0,))
    c = shifted_commutator(kd, 1, 0)
    normalized = {m: v * math.factorial(m[0]) for m, v in c.diagonal().items()}
    assert normalized == {(0,): 1, (1,): -1}
    with pytest.raises(DomainError):
        shifted_operators(kd, 0, 0)


@pytest.mark.parametrize("L", [1, 2, 3])
@pytest.mark.parametrize("N", [1, 2])
def test_shifted_commutator_closed(L, N):
    kd = cpn_finite_kd(N, L)
    for i in range(N):
        c = shifted_commutator(kd, L, i)
        assert c == shifted_commutator_closed(kd, L, i)
        assert c == shifted_commutator_basis_form(kd, L, i)


def test_cylinder_not_periodic():
    assert cylinder_translation_residual(1, (1,), (1,)) > 1e-3
    assert cylinder_translation_residual(1, (0,), (0,)) > 1e-3
