import math
import random
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from twistfock.core import multi_indices
from twistfock.fock import basis, vacuum
from twistfock.kahler import KahlerData
from twistfock.trace import (
    DivergentTraceError,
    QuadratureRule,
    TraceSpec,
    chn_c0,
    chn_c0_gamma,
    cyclicity_check,
    default_spec,
    number_operator_residual,
    quad_trace_CHn,
    quad_trace_Cn,
    quad_trace_fock,
    sp_trace,
)
from twistfock.verify import random_fock

C1 = KahlerData.builtin("cn", 1, 1, 4)


def test_sp_examples():
    spec = TraceSpec(F(3, 2))
    assert sp_trace(vacuum(C1), spec) == F(3, 2)
    assert sp_trace(basis(C1, (1,), (2,)), spec) == 0
    for n in range(4):
        assert sp_trace(basis(C1, (n,), (n,)), spec) == math.factorial(n) * F(3, 2)


def test_cyclicity_examples():
    up = basis(C1, (1,), (0,))
    down = basis(C1, (0,), (1,))
    assert cyclicity_check(up, down) == 0
    A = random_fock(random.Random(0), C1, 3)
    assert cyclicity_check(A, A) == 0


@given(st.integers(0, 10 ** 6), st.sampled_from(["cn", "cpn", "chn"]))
def test_cyclicity_property(seed, model):
    kd = KahlerData.builtin(model, 2, {"cn": F(1), "cpn": F(1, 3), "chn": F(1, 5)}[model], 3)
    rng = random.Random(seed)
    assert cyclicity_check(random_fock(rng, kd, 3), random_fock(rng, kd, 3)) == 0


def test_number_operator():
    kd = KahlerData.builtin("cn", 2, F(1, 2), 3)
    for m in multi_indices(2, 2):
        for n in multi_indices(2, 2):
            t, r = number_operator_residual(kd, 0, m, n)
            assert t == 0 and r.is_zero()


def test_quad_cn_examples():
    assert abs(quad_trace_Cn((0,), (0,), 1) - 1) < 1e-12
    assert abs(quad_trace_Cn((1,), (0,), 1)) < 1e-12
    assert abs(quad_trace_Cn((2,), (2,), F(1, 2)) - 1) < 1e-10


def test_quad_cn_gaussian_moment_oracle():
    # |2><2| at hbar = 1/2 is 2 |z|^4 e^{-2|z|^2}; raw radial integral by scipy
    h = 0.5
    raw = integrate.quad(lambda r: 2 * math.pi * r * (r ** 4) * 4 / 2 * math.exp(-r * r / h), 0, 20)[0]
    assert abs(raw / (math.pi * h) - quad_trace_Cn((2,), (2,), F(1, 2))) < 1e-10


def test_quad_chn_examples():
    v = quad_trace_CHn((0,), (0,), F(1, 5), 1)
    oracle = integrate.quad(lambda r: 2 * math.pi * (1 - r * r) ** 3 * r, 0, 1)[0]
    assert abs(v - math.pi / 4) < 1e-9 and abs(v - oracle) < 1e-12
    assert abs(quad_trace_CHn((1,), (1,), F(1, 5), 1, normalized=True) - 1) < 1e-8
    assert abs(quad_trace_CHn((1,), (0,), F(1, 5), 1)) < 1e-10


def test_quad_delta_blocks():
    for N in (1, 2):
        for m in multi_indices(N, 4):
            for n in multi_indices(N, 4):
                d = 1.0 if m == n else 0.0
                assert abs(quad_trace_Cn(m, n, F(1, 3), N) - d) < 1e-10
                assert abs(quad_trace_CHn(m, n, F(1, 6), N, normalized=True) - d) < 1e-9


def test_divergent_trace():
    with pytest.raises(DivergentTraceError):
        quad_trace_CHn((0,), (0,), 1, 1)
    with pytest.raises(DivergentTraceError):
        chn_c0(F(1, 2), 2)


def test_insufficient_nodes_warn():
    with pytest.warns(RuntimeWarning):
        quad_trace_Cn((4,), (4,), 1, 1, nodes=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        quad_trace_Cn((4,), (4,), 1, 1)


def test_quadrature_rules_verify():
    assert QuadratureRule.laguerre(8).verify()
    assert QuadratureRule.jacobi(8, 3.0).verify()
    assert QuadratureRule.jacobi(8, 0.5).verify()


def test_c0_exact_vs_gamma():
    for s in (5, 7, F(11, 2)):
        for N in (1, 2, 3):
            if s > N:
                assert abs(chn_c0(1 / F(s), N).value - chn_c0_gamma(1 / F(s), N)) < 1e-12
    assert chn_c0(F(1, 5), 1).label() == "1/4*pi^1"


def test_quad_proportional_to_sp():
    for model, h in (("cn", F(1, 2)), ("chn", F(1, 5))):
        kd = KahlerData.builtin(model, 2, h, 3)
        spec = default_spec(model, h, 2)
        rng = random.Random(4)
        for _ in range(5):
            A = random_fock(rng, kd, 3)
            assert abs(quad_trace_fock(A, model) - spec.value * float(sp_trace(A))) < 1e-9
