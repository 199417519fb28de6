import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lacunary import periodic as P
from lacunary.errors import InvalidParameter

COS1 = P.TrigPolynomial.cosine(1.0)
COS12 = P.TrigPolynomial.cosine(1.0, 1.0)
SIN1 = P.TrigPolynomial((), (1.0,))


def pt(u, v):
    return P.RationalPoint(u, v)


def test_eval_examples():
    assert P.eval(COS1, pt(0, 1)) == 1.0
    assert abs(P.eval(COS1, pt(1, 4))) < 1e-15
    assert P.eval(COS12, pt(1, 3)) == pytest.approx(-1.0, abs=1e-15)


def test_scaled_eval_examples():
    assert P.scaled_eval(COS1, 4, pt(1, 8)) == pytest.approx(-1.0, abs=1e-15)
    assert P.scaled_eval(COS1, 2 ** 60, pt(1, 3)) == pytest.approx(-0.5, abs=1e-15)
    assert P.scaled_eval(COS12, 2 ** 4000 + 1, pt(0, 1)) == P.eval(COS12, pt(0, 1))


@given(st.integers(1, 2 ** 3000), st.integers(1, 10 ** 6), st.integers(0, 10 ** 6))
@settings(max_examples=50)
def test_scaled_eval_bit_identical(n, v, u):
    x = pt(u % v, v)
    assert P.scaled_eval(COS12, n, x) == P.eval(COS12, pt((n * x.u) % v, v))


def test_partial_sum_examples():
    assert abs(P.partial_sum(COS1, [1], 1, pt(1, 4))) < 1e-15
    assert P.partial_sum(COS1, [1, 2, 4], 3, pt(1, 2)) == pytest.approx(1.0)
    assert P.partial_sum(COS1, [1, 2, 4], 0, pt(1, 2)) == 0.0
    with pytest.raises(InvalidParameter):
        P.partial_sum(COS1, [1], 2, pt(0, 1))


def test_norms():
    assert P.l2_norm(COS1) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert P.l2_norm(COS12) == pytest.approx(1.0, rel=1e-15)
    assert P.l2_norm(SIN1) == pytest.approx(math.sqrt(0.5), rel=1e-15)


def test_kac_variance_examples():
    assert P.kac_variance(COS1, 2) == 0.5
    assert P.kac_variance(COS12, 2) == 2.0
    assert P.kac_variance(SIN1, 3) == 0.5
    # harmonics 1, 2, 4 all chain: 1.5 + (1 + 1) + 1
    f = P.TrigPolynomial.cosine(1.0, 0.5, 0.0, 0.25)
    assert P.kac_variance(f, 2) == pytest.approx(0.5 * (1 + 0.25 + 0.0625) + 0.5 + 0.125 + 0.25)


def test_validation():
    with pytest.raises(InvalidParameter):
        P.TrigPolynomial(())
    with pytest.raises(InvalidParameter):
        P.TrigPolynomial((0.0, 0.0))
    with pytest.raises(InvalidParameter):
        P.TrigPolynomial((1.0, 0.9), variation_budget=1.0)
    assert P.TrigPolynomial((1.0, 0.5), variation_budget=1.0).degree == 2
    with pytest.raises(InvalidParameter):
        P.RationalPoint(3, 3)


def test_periodicity():
    for u, v in [(1, 7), (3, 10), (5, 12)]:
        a = P.eval(COS12, pt(u, v))
        b = COS12(Fraction(u + v, v))
        assert a == pytest.approx(b, abs=2e-16)


@pytest.mark.parametrize("f", [COS1, COS12, P.TrigPolynomial((0.3, -0.2, 0.1), (0.0, 0.4, 0.0))])
def test_grid_orthogonality(f):
    D = f.degree
    for M in (D + 1, 2 * D + 1, 17):
        vals = [P.eval(f, pt(j, M)) for j in range(M)]
        assert abs(math.fsum(vals) / M) < 1e-12
        if M > 2 * D:
            assert math.fsum(v * v for v in vals) / M == pytest.approx(P.norm_sq(f), abs=1e-12)


def test_parsing_roundtrip():
    f = P.parse_function("cos:1:1.0,cos:2:1.0")
    assert f.cos_coeffs == (1.0, 1.0)
    g = P.parse_function_text("# demo\ncos 1 0.5\nsin 3 0.25\n")
    assert g.sin_coeffs == (0.0, 0.0, 0.25)
    assert P.parse_function_text(P.format_function(g)) == g
    assert P.parse_function(P.function_shorthand(g)) == g
    for bad in ("cos:1", "tan:1:1", "cos:0:1", "cos:a:1"):
        with pytest.raises(InvalidParameter):
            P.parse_function(bad)
