import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confspec.errors import InvalidParameter, LengthMismatch
from confspec.quadrature import build_grid, integrate, with_error


def test_weights_sum_to_pi_small_grid():
    g = build_grid(4, 8)
    assert abs(g.weights.sum() - math.pi) <= 1e-12
    assert integrate(g, 1.0) == pytest.approx(math.pi, abs=1e-12)


def test_second_moment_and_symmetry():
    g = build_grid(16, 32)
    # 2 pi int_0^1 r^3 dr
    assert integrate(g, g.rr**2) == pytest.approx(math.pi / 2, abs=1e-13)
    assert abs(integrate(g, g.z.real)) <= 1e-14


def test_node_layout():
    g = build_grid(8, 16)
    assert np.all((g.r > 0) & (g.r < 1))
    np.testing.assert_allclose(g.theta, 2 * np.pi * np.arange(16) / 16)
    assert g.size == 128 and g.z.shape == (128,)
    np.testing.assert_allclose(np.abs(g.z[:16]), g.r[0])


@pytest.mark.parametrize("nr, nt", [(3, 8), (4, 6), (4, 9), (0, 0)])
def test_invalid_sizes(nr, nt):
    with pytest.raises(InvalidParameter):
        build_grid(nr, nt)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        integrate(build_grid(4, 8), np.ones(5))


@settings(max_examples=40, deadline=None)
@given(m=st.integers(0, 15), k=st.integers(-15, 15))
def test_exact_on_polar_monomials(m, k):
    """int r^{2m} cos(k t) = 2 pi/(2m+2) if k = 0 else 0 (Gauss order 2*16-1)."""
    g = build_grid(16, 32)
    exact = 2 * math.pi / (2 * m + 2) if k == 0 else 0.0
    assert integrate(g, g.rr ** (2 * m) * np.cos(k * g.tt)) == pytest.approx(exact, abs=1e-13)


def test_doubling_error_estimate_is_consistent():
    g = build_grid(8, 16)
    f = lambda grid: integrate(grid, np.exp(grid.z.real) * np.cos(3 * grid.z.imag))  # noqa: E731
    val, err = with_error(f, g)
    ref = f(build_grid(64, 128))
    # the estimate bounds the actual error of the coarse value up to a factor
    assert abs(val - ref) <= 2 * err + 1e-15
    fine, err_fine = with_error(f, g.doubled())
    assert err_fine <= err + 1e-15


def test_deterministic_sum():
    g = build_grid(32, 64)
    vals = np.sin(7 * g.z.real) * np.exp(g.z.imag)
    assert integrate(g, vals) == integrate(g, vals.copy())
