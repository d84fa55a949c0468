from fractions import Fraction as F

import pytest

from twistfock.core import DomainError, RepresentationError, multi_indices
from twistfock.kahler import (
    KahlerData,
    KahlerPotential,
    builtin_potential,
    compute_H,
    cpn_H_closed,
    h_residual,
    invert_H,
    metric,
    normalize_potential,
    radial_C,
)
from twistfock.linalg import exact_inverse
from twistfock.series import TruncatedSeries


def S(terms, N=1, cut=None):
    cut = cut if cut is not None else float("inf")
    return TruncatedSeries(N, {((m,), (k,)) if isinstance(m, int) else (m, k): c for (m, k), c in terms.items()}, cut, cut)


def test_normalize_drops_pure_parts():
    phi = KahlerPotential(S({(1, 1): 1, (1, 0): 1, (0, 1): 1, (0, 0): 3}))
    assert normalize_potential(phi).series == S({(1, 1): 1})


def test_normalize_ch_unchanged():
    phi = builtin_potential("chn", 1, (5, 5))
    assert normalize_potential(phi).series == phi.series


def test_normalize_mixed_only_unchanged():
    s = S({(1, 1): 1, (2, 1): 1, (1, 2): 1})
    assert normalize_potential(KahlerPotential(s)).series == s


def test_non_real_potential_rejected():
    with pytest.raises(DomainError):
        KahlerPotential(S({(2, 1): 1}))


def test_metric_flat():
    G = metric(builtin_potential("cn", 3))
    assert G.is_identity()


def test_metric_cp1():
    D = 5
    g = metric(builtin_potential("cpn", 1, (D, D)))[0, 0]
    oracle = S({(j, j): (-1) ** j * (j + 1) for j in range(D)}, cut=D - 1)
    assert g == oracle


def test_metric_perturbed():
    g = metric(builtin_potential("perturbed", 1))[0, 0]
    assert g == S({(0, 0): 1, (1, 1): F(4, 10)})


def test_H_c1_half():
    H = compute_H(builtin_potential("cn", 1), F(1, 2), 4)
    assert H.get((2,), (2,)) == 2
    assert all(H.get(m, n) == 0 for m in multi_indices(1, 4) for n in multi_indices(1, 4) if m != n)


def test_H_cp1_binomials():
    H = compute_H(builtin_potential("cpn", 1, (3, 3)), F(1, 3), 3)
    assert [H.get((m,), (m,)) for m in range(4)] == [1, 3, 3, 1]


def test_H_rejects_bad_hbar():
    with pytest.raises(DomainError):
        compute_H(builtin_potential("cn", 1), 0, 2)
    with pytest.raises(DomainError):
        compute_H(builtin_potential("cn", 1), -1, 2)


def test_Hinv_cp1():
    kd = KahlerData.builtin("cpn", 1, F(1, 3), 3)
    assert [kd.Hinv.get((m,), (m,)) for m in range(4)] == [1, F(1, 3), F(1, 3), 1]


def test_Hinv_cp1_singular_past_L():
    kd = KahlerData.builtin("cpn", 1, F(1, 3), 4)
    with pytest.raises(RepresentationError) as ei:
        kd.Hinv
    assert ei.value.degree == 4


def test_Hinv_off_diagonal_against_dense_inverse():
    # mixed cubic terms make H non-diagonal
    s = S({(1, 1): 1, (2, 1): F(1, 10), (1, 2): F(1, 10)})
    H = compute_H(KahlerPotential(s, True), F(1, 2), 3)
    assert any(m != n for (m, n) in H.entries)
    Hinv = invert_H(H)
    assert h_residual(H, Hinv) == 0
    idx = multi_indices(1, 3)
    dense = exact_inverse([[H.get(m, n) for n in idx] for m in idx])
    # H is triangular in the degree grading, so the truncated dense inverse is exact
    assert all(dense[i][j] == Hinv.get(idx[i], idx[j]) for i in range(4) for j in range(4))


def test_radial_C_examples():
    assert all(v == 1 for v in radial_C(builtin_potential("cn", 1), 1, 4).values())
    assert radial_C(builtin_potential("cn", 1), F(1, 2), 4)[(2,)] == 4
    assert radial_C(builtin_potential("cpn", 1, (3, 3)), F(1, 3), 3)[(1,)] == 3


def test_radial_C_non_radial():
    s = S({(1, 1): 1, (2, 1): 1, (1, 2): 1})
    with pytest.raises(DomainError):
        radial_C(KahlerPotential(s, True), 1, 2)


def test_builtin_expansions():
    assert builtin_potential("cpn", 1, (3, 3)).series == S({(1, 1): 1, (2, 2): F(-1, 2), (3, 3): F(1, 3)}, cut=3)
    ch = builtin_potential("chn", 1, (2, 2)).series
    assert ch == S({(1, 1): 1, (2, 2): F(1, 2)}, cut=2)
    assert builtin_potential("cn", 2).series == TruncatedSeries(2, {((1, 0), (1, 0)): 1, ((0, 1), (0, 1)): 1})


def test_builtin_needs_cutoffs():
    with pytest.raises(DomainError):
        builtin_potential("cpn", 1)


@pytest.mark.parametrize("L", [1, 2, 3, 5])
@pytest.mark.parametrize("N", [1, 2])
def test_cpn_H_closed(L, N):
    H = compute_H(builtin_potential("cpn", N, (L, L)), F(1, L), L)
    for m in multi_indices(N, L):
        assert H.get(m, m) == cpn_H_closed(L, m)
