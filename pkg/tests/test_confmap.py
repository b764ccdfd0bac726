import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confspec import confmap
from confspec.confmap import (
    boundary_area, disc_to_square, ds_distance, identity, l2_derivative_distance,
    linf_seminorm_distance, lp_seminorm, make_builtin, measure_variation,
    polynomial_perturbation, scale, weight,
)
from confspec.errors import InvalidParameter, UnivalenceViolation
from confspec.quadrature import build_grid

from conftest import square_side


# ------------------------------------------------------------ construction


def test_builtin_coefficients():
    np.testing.assert_array_equal(make_builtin("identity").coeffs, [0, 1])
    np.testing.assert_array_equal(make_builtin("scale", r=0.5).coeffs, [0, 0.5])
    c = make_builtin("disc_to_square", terms=3).coeffs
    assert c[1] == 1 and c[5] == pytest.approx(1 / 10, abs=0) and c[9] == 1 / 24
    assert np.count_nonzero(c) == 3


def test_square_series_matches_binomial_expansion():
    """Oracle: expand (1 - w)^(-1/2) term by term with generalised binomials."""
    from fractions import Fraction

    exact = confmap.square_series_rational(12)
    for n, c in enumerate(exact):
        binom = Fraction(1)
        for j in range(n):  # (-1/2 choose n) * (-1)^n
            binom *= Fraction(2 * j + 1, 2 * (j + 1))
        assert c == binom / (4 * n + 1)


def test_invalid_builtins():
    with pytest.raises(UnivalenceViolation):
        polynomial_perturbation(0.5, 2)
    with pytest.raises(UnivalenceViolation):
        polynomial_perturbation(0.2, 5)
    with pytest.raises(InvalidParameter):
        scale(0.0)
    with pytest.raises(InvalidParameter):
        scale(-1)
    with pytest.raises(InvalidParameter):
        disc_to_square(0)
    with pytest.raises(InvalidParameter):
        make_builtin("ellipse")


def test_rejects_vanishing_derivative():
    with pytest.raises(UnivalenceViolation):
        confmap.PowerSeriesMap([0, 0, 1])
    # phi'(z) = 1 + z vanishes at z = -1 on the boundary
    with pytest.raises(UnivalenceViolation):
        confmap.PowerSeriesMap([0, 1, 0.5])


# ------------------------------------------------------------ evaluation


def test_eval_examples():
    assert confmap.eval(identity(), 0.3 + 0.4j) == 0.3 + 0.4j
    assert confmap.eval(scale(0.5), 1) == 0.5
    assert confmap.eval(polynomial_perturbation(0.1, 2), 1) == pytest.approx(1.1, abs=1e-15)


def test_derivative_examples():
    assert confmap.eval_derivative(identity(), 0.7 - 0.1j) == 1
    assert confmap.eval_derivative(polynomial_perturbation(0.1, 2), 0) == 1
    # term-by-term: 1 + (1/10)*5 z^4 = 1 + z^4/2
    assert confmap.eval_derivative(disc_to_square(2), 0.5) == pytest.approx(1.03125, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.complex_numbers(max_magnitude=0.99))
def test_derivative_matches_finite_difference(z):
    m = disc_to_square(16)
    h = 1e-6
    fd = (m(z + h) - m(z - h)) / (2 * h)
    assert abs(m.derivative(z) - fd) <= 1e-7 * max(1.0, abs(fd))


def test_ring_evaluation_matches_horner():
    g = build_grid(16, 64)
    for m in (disc_to_square(40), polynomial_perturbation(0.05, 3)):
        np.testing.assert_allclose(m.derivative_on_grid(g), m.derivative(g.z), atol=1e-12)


def test_weight_examples(grid):
    z = grid.z
    np.testing.assert_array_equal(weight(identity())(z), 1.0)
    np.testing.assert_allclose(weight(scale(0.7))(z), 0.49, rtol=1e-15)
    eps, k = 0.05, 3
    np.testing.assert_allclose(weight(polynomial_perturbation(eps, k))(z),
                               np.abs(1 + eps * k * z ** (k - 1)) ** 2, rtol=1e-14)


# ------------------------------------------------------------ norms and distances


def test_lp_seminorm_examples(grid):
    r = 0.6
    assert lp_seminorm(scale(r), 2, grid) == pytest.approx(r * math.sqrt(math.pi), rel=1e-13)
    assert lp_seminorm(identity(), math.inf, grid) == 1.0
    assert lp_seminorm(identity(), 4, grid) == pytest.approx(math.pi ** 0.25, rel=1e-13)


def test_square_l2_seminorm_is_root_area():
    s = square_side()
    val = lp_seminorm(disc_to_square(64), 2, build_grid(256, 512))
    # truncation to 64 terms loses ~0.1% of the area
    assert val == pytest.approx(s, rel=1e-3)


def test_l2_derivative_distance_examples(grid):
    assert l2_derivative_distance(identity(), identity(), grid) == (0.0, 0.0)
    r = 0.8
    a, b = l2_derivative_distance(identity(), scale(r), grid)
    assert a == pytest.approx((1 - r) * math.sqrt(math.pi), rel=1e-13)
    assert b == pytest.approx((1 - r) * math.sqrt(math.pi), rel=1e-13)
    eps = 0.07
    _, b = l2_derivative_distance(identity(), polynomial_perturbation(eps, 2), grid)
    # 2 eps (int |z|^2)^(1/2) = 2 eps sqrt(pi/2)
    assert b == pytest.approx(eps * math.sqrt(2 * math.pi), rel=1e-13)


def test_ds_distance_examples(grid):
    h = weight(polynomial_perturbation(0.1, 3))
    assert ds_distance(h, h, 1.5, grid) == 0.0
    r = 0.9
    for s in (1.2, 2.0, 3.5):
        val = ds_distance(weight(identity()), weight(scale(r)), s, grid)
        assert val == pytest.approx((1 - r * r) * math.pi ** (1 / s), rel=1e-13)
    with pytest.raises(InvalidParameter):
        ds_distance(h, h, 1.0, grid)


def test_measure_variation_examples(grid):
    assert measure_variation(scale(0.5), scale(0.5), grid) == confmap.MeasureVariation(0, 0, 0)
    r = 0.7
    mv = measure_variation(identity(), scale(r), grid)
    assert mv.plus == pytest.approx(math.pi * (1 - r * r), rel=1e-13)
    assert mv.minus == 0.0
    assert mv.total == pytest.approx(math.pi * (1 - r * r), rel=1e-13)


def _midpoint_abs_jacobian_difference(m1, m2, n):
    """Independent oracle: polar midpoint rule for int |J1 - J2|."""
    r = (np.arange(n) + 0.5) / n
    t = 2 * np.pi * (np.arange(4 * n) + 0.5) / (4 * n)
    z = np.outer(r, np.exp(1j * t))
    diff = np.abs(np.abs(m1.derivative(z)) ** 2 - np.abs(m2.derivative(z)) ** 2)
    return float(np.sum(diff * r[:, None]) * (1 / n) * (2 * np.pi / (4 * n)))


def test_measure_variation_against_midpoint_oracle(grid):
    m1, m2 = scale(0.9), polynomial_perturbation(0.05, 2)
    mv = measure_variation(m1, m2, build_grid(128, 512))
    oracle = _midpoint_abs_jacobian_difference(m1, m2, 800)
    assert mv.total == pytest.approx(oracle, rel=1e-4)
    assert mv.plus + mv.minus == pytest.approx(mv.total, rel=1e-13)
    # J2 = |1 + 0.1 z|^2 >= 0.81 = J1
    assert mv.plus == 0.0


def test_measure_variation_split_for_crossing_jacobians(grid):
    m1, m2 = identity(), polynomial_perturbation(0.05, 2)
    mv = measure_variation(m1, m2, grid)
    oracle = _midpoint_abs_jacobian_difference(m1, m2, 800)
    assert mv.total == pytest.approx(oracle, rel=1e-4)
    # J2 - 1 = 0.2 x + 0.01 |z|^2 changes sign; the parts are nearly equal
    assert mv.plus > 0 and mv.minus > 0
    assert mv.plus + mv.minus == pytest.approx(mv.total, rel=1e-13)


def test_measure_variation_tie_goes_to_plus(grid):
    mv = measure_variation(identity(), identity(), grid)
    assert (mv.plus, mv.minus) == (0.0, 0.0)
    m = polynomial_perturbation(0.1, 2)
    mv = measure_variation(m, m, grid)
    assert mv.total == 0.0


def test_area_examples(grid):
    assert confmap.area(identity(), grid) == pytest.approx(math.pi, rel=1e-14)
    assert confmap.area(scale(0.3), grid) == pytest.approx(math.pi * 0.09, rel=1e-14)
    s = square_side()
    sq = disc_to_square(64)
    assert confmap.area(sq, build_grid(256, 512)) == pytest.approx(s * s, rel=2e-3)
    assert boundary_area(sq) == pytest.approx(s * s, rel=2e-3)


@pytest.mark.parametrize("m", [
    identity(), scale(2.5), polynomial_perturbation(0.1, 2), polynomial_perturbation(0.03j, 5),
    disc_to_square(8), disc_to_square(64),
    confmap.PowerSeriesMap([1, 1, 0.2 + 0.1j, 0.05]),
])
def test_area_identity_against_green_formula(m):
    g = build_grid(256, 512)
    exact = math.pi * float(np.sum(np.arange(m.coeffs.size) * np.abs(m.coeffs) ** 2))
    assert confmap.area(m, g) == pytest.approx(boundary_area(m), rel=1e-12)
    assert boundary_area(m) == pytest.approx(exact, rel=1e-12)


def test_linf_distance_examples(grid):
    m = polynomial_perturbation(0.05, 3)
    assert linf_seminorm_distance(m, m, grid) == 0.0
    assert linf_seminorm_distance(identity(), scale(0.4), grid) == pytest.approx(0.6, abs=1e-15)
    assert linf_seminorm_distance(identity(), m, grid) == pytest.approx(0.15, rel=1e-14)


# ------------------------------------------------------------ inequalities


def _pairs():
    from conftest import lattice_maps
    maps = list(lattice_maps().values()) + [disc_to_square(16)]
    return [(a, b) for i, a in enumerate(maps) for b in maps[i + 1:]]


@pytest.mark.parametrize("m1, m2", _pairs()[::3])
def test_triangle_and_measure_inequalities(m1, m2, grid):
    mod, full = l2_derivative_distance(m1, m2, grid)
    assert mod <= full * (1 + 1e-12)
    assert mod * mod <= measure_variation(m1, m2, grid).total * (1 + 1e-12)


@pytest.mark.parametrize("p", [3.0, 4.0, 6.0, math.inf])
@pytest.mark.parametrize("m1, m2", _pairs()[::4])
def test_derivative_bound_on_weight_distance(m1, m2, p, grid):
    s = 2.0 if math.isinf(p) else 2 * p / (p + 2)
    lhs = ds_distance(weight(m1), weight(m2), s, grid)
    mod, _ = l2_derivative_distance(m1, m2, grid)
    rhs = (lp_seminorm(m1, p, grid) + lp_seminorm(m2, p, grid)) * mod
    assert lhs <= rhs * (1 + 1e-12)


@pytest.mark.parametrize("p", [3.0, 4.0, 6.0, 10.0])
def test_derivative_bound_equality_for_dilations(p, grid):
    s = 2 * p / (p + 2)
    for r1, r2 in [(1.0, 0.9), (0.5, 2.0), (1.3, 1.1)]:
        m1, m2 = scale(r1), scale(r2)
        lhs = ds_distance(weight(m1), weight(m2), s, grid)
        mod, _ = l2_derivative_distance(m1, m2, grid)
        rhs = (lp_seminorm(m1, p, grid) + lp_seminorm(m2, p, grid)) * mod
        assert lhs == pytest.approx(rhs, rel=1e-10)
        # closed form: |r1^2 - r2^2| pi^(1/s)
        assert lhs == pytest.approx(abs(r1 * r1 - r2 * r2) * math.pi ** (1 / s), rel=1e-12)


def test_exponent_identities():
    import sympy

    p = sympy.symbols("p", positive=True)
    s = 2 * p / (p + 2)
    assert sympy.simplify(1 / s - (1 / p + sympy.Rational(1, 2))) == 0
    assert sympy.simplify(2 * s / (s - 1) - 4 * p / (p - 2)) == 0


# ------------------------------------------------------------ JSON specs


@pytest.mark.parametrize("spec, coeffs", [
    ({"type": "identity"}, [0, 1]),
    ({"type": "scale", "r": 0.8}, [0, 0.8]),
    ({"type": "perturbation", "eps": 0.1, "k": 3}, [0, 1, 0, 0.1]),
    ({"type": "polynomial", "coeffs": [[0, 0], [1, 0], [0, 0.1]]}, [0, 1, 0.1j]),
])
def test_from_spec(spec, coeffs):
    np.testing.assert_array_equal(confmap.from_spec(spec).coeffs, coeffs)


def test_from_spec_square_and_text():
    m = confmap.from_spec('{"type": "disc_to_square", "terms": 64}')
    np.testing.assert_array_equal(m.coeffs, disc_to_square(64).coeffs)


@pytest.mark.parametrize("spec, field", [
    ({"type": "scale"}, "'r'"),
    ({"type": "scale", "r": "big"}, "'r'"),
    ({"type": "perturbation", "eps": 0.1, "k": 2.5}, "'k'"),
    ({"type": "polynomial", "coeffs": [[0, 1], [1]]}, "coeffs[1]"),
    ({"type": "blob"}, "'type'"),
    ({"r": 1}, "'type'"),
])
def test_from_spec_errors_name_field(spec, field):
    with pytest.raises(InvalidParameter, match=field.replace("[", r"\[").replace("]", r"\]")):
        confmap.from_spec(spec)


def test_to_spec_round_trip():
    m = confmap.PowerSeriesMap([0.1, 1, 0.2 - 0.05j])
    again = confmap.from_spec(m.to_spec())
    np.testing.assert_array_equal(again.coeffs, m.coeffs)
