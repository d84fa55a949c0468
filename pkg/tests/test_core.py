from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistfock.core import EXACT, DegenerateMetricError, DomainError, HbarPoly, StructureError, multi_indices
from twistfock.linalg import exact_inverse, matmul
from twistfock.series import (
    SeriesMatrix,
    TruncatedSeries,
    log1p_coeffs,
    matrix_inverse,
    series_arith,
    series_compose,
    series_diff,
    series_exp,
    series_log,
    series_reciprocal,
)


def mono(m, k, c=1, N=1, **kw):
    return TruncatedSeries.monomial(m if isinstance(m, tuple) else (m,), k if isinstance(k, tuple) else (k,), c, **kw)


def t1(dz=EXACT, dzb=EXACT):
    return mono(1, 1, 1, dz=dz, dzb=dzb)


# --- worked examples ---------------------------------------------------------------------


def test_polynomial_product():
    one = TruncatedSeries.constant(1, 1)
    f = (one + mono(1, 0)) * (one + mono(0, 1))
    expected = one + mono(1, 0) + mono(0, 1) + mono(1, 1)
    assert f == expected


def test_times_zero():
    f = mono(2, 1, F(3, 2)) + mono(0, 0, 7)
    assert (f * TruncatedSeries.zero(1)).is_zero()


def test_truncation_semantics():
    z = mono(1, 0, dz=1)
    p = z * z
    assert p.is_zero() and p.cutoffs == (1, EXACT)


def test_exp_direct():
    e = series_exp(t1(2, 2))
    assert e == TruncatedSeries.constant(1, 1, 2, 2) + t1(2, 2) + mono(2, 2, F(1, 2), dz=2, dzb=2)


def test_exp_zero():
    assert series_exp(TruncatedSeries.zero(1)) == TruncatedSeries.constant(1, 1)


def test_exp_of_minus_log_is_geometric():
    D = 5
    f = series_compose(log1p_coeffs(D, -1), t1(D, D)).scale(-1)
    g = series_exp(f)
    oracle = TruncatedSeries(1, {((j,), (j,)): 1 for j in range(D + 1)}, D, D)
    assert g == oracle


def test_exp_rejects_constant():
    with pytest.raises(DomainError):
        series_exp(TruncatedSeries.constant(1, 1))


def test_diff_examples():
    assert series_diff(mono(2, 1), "z", 0) == mono(1, 1, 2)
    assert series_diff(mono(2, 0), "zb", 0).is_zero()


def test_mixed_derivative_of_ch_potential():
    D = 5
    phi = series_compose(log1p_coeffs(D, -1), t1(D, D)).scale(-1)
    g = phi.diff("z", 0).diff("zb", 0)
    # 1/(1-t)^2 = sum (j+1) t^j
    oracle = TruncatedSeries(1, {((j,), (j,)): j + 1 for j in range(D)}, D - 1, D - 1)
    assert g == oracle


def test_matrix_inverse_identity():
    I = SeriesMatrix.identity(2, 2)
    assert matrix_inverse(I).is_identity()


def test_matrix_inverse_geometric():
    D = 4
    M = SeriesMatrix([[TruncatedSeries.constant(1, 1, D, D) + t1(D, D)]])
    inv = matrix_inverse(M)[0, 0]
    oracle = TruncatedSeries(1, {((j,), (j,)): (-1) ** j for j in range(D + 1)}, D, D)
    assert inv == oracle


def test_matrix_inverse_cp2_metric_residual():
    from twistfock.kahler import builtin_potential, metric

    G = metric(builtin_potential("cpn", 2, (4, 4)))
    R = G @ matrix_inverse(G)
    for i in range(2):
        for j in range(2):
            d = R[i, j] - (1 if i == j else 0)
            assert d.is_zero()
            assert min(d.cutoffs) >= 3


def test_matrix_inverse_singular():
    M = SeriesMatrix([[t1()]])
    with pytest.raises(DegenerateMetricError):
        matrix_inverse(M)


def test_dimension_mismatch():
    with pytest.raises(StructureError):
        TruncatedSeries.z(1, 0) + TruncatedSeries.z(2, 0)
    with pytest.raises(StructureError):
        TruncatedSeries(2, {((1,), (0,)): 1})


def test_series_arith_ops():
    f, g = mono(1, 0), mono(0, 1)
    assert series_arith(f, g, "add") == f + g
    assert series_arith(f, g, "sub") == f - g
    assert series_arith(f, g, "mul") == mono(1, 1)
    assert series_arith(f, 3, "scale") == mono(1, 0, 3)


def test_reciprocal():
    g = TruncatedSeries.constant(1, 1, 4, 4) + t1(4, 4)
    assert (g * series_reciprocal(g) - 1).is_zero()


# --- exact linear algebra -------------------------------------------------------------------


def test_exact_inverse_against_float():
    rng = np.random.default_rng(3)
    A = [[F(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(5)] for _ in range(5)]
    for i in range(5):
        A[i][i] += 10
    inv = exact_inverse(A)
    I = matmul(A, inv)
    assert all(I[i][j] == (1 if i == j else 0) for i in range(5) for j in range(5))
    ref = np.linalg.inv(np.array(A, dtype=float))
    assert np.allclose(np.array(inv, dtype=float), ref)


def test_hbar_poly_inverse():
    p = HbarPoly([1, -1], 5)
    q = p * p.inverse()
    assert q.coeffs[0] == 1 and all(c == 0 for c in q.coeffs[1:])


# --- properties ------------------------------------------------------------------------------

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def series(draw, N=2, deg=2, cut=4):
    idx = multi_indices(N, deg)
    terms = draw(st.dictionaries(st.tuples(st.sampled_from(idx), st.sampled_from(idx)), coef, max_size=5))
    return TruncatedSeries(N, terms, cut, cut)


@given(series(), series(), series())
def test_ring_axioms(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert (f - f).is_zero()


@given(series(), series(), st.integers(0, 1), st.sampled_from(["z", "zb"]))
def test_leibniz(f, g, i, var):
    lhs = (f * g).diff(var, i)
    rhs = f.diff(var, i) * g + f * g.diff(var, i)
    assert (lhs - rhs).is_zero()


@given(series(N=1, deg=2, cut=4))
def test_exp_log_round_trip(f):
    f = f - TruncatedSeries.constant(1, f.constant_term())
    assert (series_log(series_exp(f)) - f).is_zero()


@given(series())
def test_conj_involution_and_json(f):
    assert f.conj().conj() == f
    assert TruncatedSeries.from_json(f.to_json()) == f
