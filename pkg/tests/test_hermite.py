import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e
from scipy.special import roots_hermitenorm

from hermgen.errors import ActivationError, ParameterError
from hermgen.hermite import (
    HermiteSeries,
    expand_activation,
    gauss_hermite,
    he_eval,
    he_table,
    series_eval,
)

# c1, c3, c5 of tanh from scipy.integrate.quad of tanh(z) He_i(z) phi(z) / i!
# (epsabs 1e-15), computed before the implementation existed
TANH_C1 = 0.605706
TANH_C3 = -0.0605992
TANH_C5 = 0.00570978


@pytest.mark.parametrize("n,z,expected", [(0, 7.3, 1.0), (3, 2.0, 2.0), (2, 3.0, 8.0), (1, -4.5, -4.5)])
def test_he_eval_examples(n, z, expected):
    assert he_eval(n, z) == expected


def test_he_eval_negative_degree():
    with pytest.raises(ParameterError):
        he_eval(-1, 0.0)


def test_recurrence_matches_monomial_form(rng):
    z = rng.uniform(-5, 5, 100)
    for n in range(13):
        coef = hermite_e.herme2poly([0] * n + [1])
        direct = np.polyval(coef[::-1], z)
        got = he_eval(n, z)
        np.testing.assert_allclose(got, direct, rtol=1e-8, atol=1e-8)


def test_he_table_rows_match_he_eval(rng):
    z = rng.normal(size=7)
    tab = he_table(6, z)
    for n in range(7):
        np.testing.assert_allclose(tab[n], he_eval(n, z), rtol=1e-14)


@pytest.mark.parametrize(
    "coeffs,z,expected",
    [((0.4, 0.5), 1.0, 0.9), ((0.4, 0.5, 0.2, 0.2), 0.0, 0.2)],
)
def test_series_eval_examples(coeffs, z, expected):
    assert series_eval(HermiteSeries(coeffs), z) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-50, 50))
def test_identity_series(z0):
    assert series_eval(HermiteSeries((0.0, 1.0)), z0) == z0


def test_series_vectorised():
    s = HermiteSeries((0.4, 0.5, 0.2, 0.2))
    z = np.linspace(-2, 2, 9).reshape(3, 3)
    out = series_eval(s, z)
    assert out.shape == (3, 3)
    np.testing.assert_allclose(out.ravel(), [series_eval(s, v) for v in z.ravel()])


def test_series_rejects_non_finite():
    with pytest.raises(ParameterError):
        HermiteSeries((0.0, float("nan")))


def test_series_roundtrip_dict():
    s = HermiteSeries((0.1, -0.2, 0.3))
    assert HermiteSeries.from_dict(s.to_dict()) == s
    assert s.to_dict() == {"degree": 2, "coeffs": [0.1, -0.2, 0.3]}
    with pytest.raises(ParameterError):
        HermiteSeries.from_dict({"degree": 4, "coeffs": [1.0]})


def test_gauss_hermite_small_rules():
    r1 = gauss_hermite(1)
    assert list(r1.nodes) == [0.0] and list(r1.weights) == [1.0]
    r2 = gauss_hermite(2)
    np.testing.assert_allclose(r2.nodes, [-1, 1], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [0.5, 0.5], atol=1e-15)
    r3 = gauss_hermite(3)
    np.testing.assert_allclose(r3.nodes, [-math.sqrt(3), 0, math.sqrt(3)], atol=1e-15)
    np.testing.assert_allclose(r3.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)


@pytest.mark.parametrize("n", [4, 9, 20, 64, 150])
def test_gauss_hermite_matches_scipy(n):
    rule = gauss_hermite(n)
    x, w = roots_hermitenorm(n)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-12 * max(1, n ** 0.5))
    np.testing.assert_allclose(rule.weights, w / w.sum(), rtol=1e-9, atol=1e-300)


@pytest.mark.parametrize("n", [1, 2, 5, 12, 33, 200, 400])
def test_rule_invariants(n):
    rule = gauss_hermite(n)
    assert abs(rule.weights.sum() - 1) < 1e-12
    assert np.all(np.diff(rule.nodes) > 0)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    np.testing.assert_array_equal(rule.weights, rule.weights[::-1])
    assert np.all(rule.weights >= 0)


def test_rule_is_read_only():
    rule = gauss_hermite(7)
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


@pytest.mark.parametrize("n", [9, 12, 30])
def test_quadrature_orthogonality(n):
    rule = gauss_hermite(n)
    tab = he_table(8, rule.nodes)
    gram = (tab * rule.weights) @ tab.T
    fact = np.array([math.factorial(i) for i in range(9)], dtype=float)
    np.testing.assert_allclose(gram / fact[:, None], np.eye(9), atol=1e-9)


@pytest.mark.parametrize("n", [3, 6, 10])
def test_rule_exact_to_degree_2n_minus_1(n):
    rule = gauss_hermite(n)
    for deg in range(2 * n):
        expected = 0.0 if deg % 2 else float(math.prod(range(deg - 1, 0, -2)))
        scale = rule.expect(np.abs(rule.nodes) ** deg)
        assert rule.expect(rule.nodes ** deg) == pytest.approx(expected, rel=1e-12, abs=1e-14 * scale)


def test_expand_identity_and_basis():
    c = expand_activation(lambda z: z, 3, 4).coeffs
    np.testing.assert_allclose(c, [0, 1, 0, 0], atol=1e-14)
    c = expand_activation(lambda z: he_eval(2, z), 3, 6).coeffs
    np.testing.assert_allclose(c, [0, 0, 1, 0], atol=1e-14)


def test_expand_tanh_pinned():
    c = expand_activation(np.tanh, 5, 200).coeffs
    assert max(abs(c[0]), abs(c[2]), abs(c[4])) < 1e-12
    assert c[1] == pytest.approx(TANH_C1, abs=5e-7)
    assert c[3] == pytest.approx(TANH_C3, abs=5e-8)
    assert c[5] == pytest.approx(TANH_C5, abs=5e-9)


def test_expand_errors():
    with pytest.raises(ParameterError):
        expand_activation(np.tanh, 5, 5)
    with pytest.raises(ActivationError) as exc, np.errstate(divide="ignore"):
        expand_activation(lambda z: 1.0 / z, 2, 3)
    assert exc.value.node == 0.0


coeff_lists = st.lists(st.floats(-2, 2), min_size=1, max_size=7)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, st.integers(0, 5))
def test_expand_round_trip(coeffs, extra):
    s = HermiteSeries(tuple(coeffs))
    back = expand_activation(s, s.degree, s.degree + 1 + extra)
    np.testing.assert_allclose(back.coeffs, s.coeffs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(coeff_lists)
def test_parity_of_odd_activation(coeffs):
    odd = HermiteSeries(tuple(c if i % 2 else 0.0 for i, c in enumerate(coeffs)))
    got = expand_activation(lambda z: np.sin(z) + series_eval(odd, z), 6, 50).coeffs
    assert all(abs(got[i]) < 1e-12 for i in range(0, 7, 2))
