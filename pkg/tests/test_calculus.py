import numpy as np
import pytest
from hypothesis import given, strategies as st

from paradiff.acceptance import composition_pair, random_structured_symbol
from paradiff.calculus import (
    comparability_constant,
    compose_with_remainder,
    paraproduct,
    sharp_rho,
    single_mode_slope,
)
from paradiff.errors import DimensionError
from paradiff.quantization import compose, extended_size, operator_band_norm, quantize_bw
from paradiff.spectral_core import GridFunction, frequencies, project_product, random_grid_function
from paradiff.symbols import Coefficient, Symbol, Term, build_symbol, japanese, poisson_bracket, power_i_xi


def trig_symbol(J, func, n):
    return Symbol([Term(Coefficient.from_function(func, 2 * J), power_i_xi(n))], J, float(n))


# --------------------------------------------------------------------------- sharp_rho


def test_sharp_of_i_xi_with_itself():
    a = build_symbol([(1.0, power_i_xi(1))], 1, J=4)
    c = sharp_rho(a, a, 3)
    for xi in (0.5, 2.0, -3.0):
        assert c.eval(0.2, xi) == pytest.approx((1j * xi) ** 2)


@pytest.mark.parametrize("rho", [1.5, 2.0])
def test_sharp_antisymmetric_part_is_bracket(rng, rho):
    a, b = random_structured_symbol(6, rng), random_structured_symbol(6, rng)
    diff = sharp_rho(a, b, rho) - sharp_rho(b, a, rho)
    pb = poisson_bracket(a, b)
    for x, xi in [(0.4, 1.5), (3.0, -6.0)]:
        assert diff.eval(x, xi) == pytest.approx(pb.eval(x, xi) / 1j, rel=1e-12, abs=1e-12)


def test_sharp_hand_expansion_at_origin():
    J = 6
    a, b = trig_symbol(J, np.cos, 3), trig_symbol(J, np.sin, 1)
    # at x = 0: ab = 0, {a,b} = 3 i (i xi)^3 cos^2 = 24 at xi = 2, s(a,b) = a_xixi b_xx = 0
    assert sharp_rho(a, b, 1).eval(0.0, 2.0) == pytest.approx(0, abs=1e-13)
    assert sharp_rho(a, b, 2).eval(0.0, 2.0) == pytest.approx(24 / 2j, abs=1e-12)
    assert sharp_rho(a, b, 3).eval(0.0, 2.0) == pytest.approx(-12j, abs=1e-12)


def test_sharp_rejects_bad_rho():
    a = build_symbol([(1.0, power_i_xi(1))], 1, J=4)
    for rho in (0, 3.5):
        with pytest.raises(ValueError):
            sharp_rho(a, a, rho)


# --------------------------------------------------------------------------- composition


def test_residual_vanishes_for_identity_factor(rng):
    J = 16
    a = random_structured_symbol(J, rng)
    one = build_symbol([(1.0, power_i_xi(0))], 0, J=J)
    res = compose_with_remainder(a, one, 3, J)
    assert np.max(np.abs(res.residual.matrix)) < 1e-12 * max(1.0, np.max(np.abs(res.product.matrix)))


def test_residual_vanishes_for_fourier_multipliers():
    J = 16
    a = build_symbol([(1.0, power_i_xi(3)), (2.0, power_i_xi(1))], 3, J=J)
    b = build_symbol([(0.5, power_i_xi(2))], 2, J=J)
    for rho in (1, 2, 3):
        assert np.max(np.abs(compose_with_remainder(a, b, rho, J).residual.matrix)) < 1e-9


def test_residual_band_norm_bounded_across_resolutions():
    norms = []
    for J in (32, 64, 128):
        a, b = composition_pair(J)
        res = compose_with_remainder(a, b, 3, J)
        norms.append(operator_band_norm(res.residual, 2.0, 2.0 - 4 + 3))
    assert max(norms) / min(norms) < 2


@pytest.mark.parametrize("rho", [1, 2, 3])
def test_residual_single_mode_slope(rho):
    a, b = composition_pair(64)
    slope = single_mode_slope(compose_with_remainder(a, b, rho, 64).residual)
    assert slope <= 4 - rho + 0.5


def test_associativity_deviation_bounded():
    norms = []
    for J in (32, 64):
        a, b = composition_pair(J)
        c = trig_symbol(J, lambda x: 1 + 0.3 * np.sin(2 * x), 1)
        Jx = extended_size(J, 0.1, 12)
        direct = compose([quantize_bw(s, Jx) for s in (a, b, c)], J)
        nested = quantize_bw(sharp_rho(sharp_rho(a, b, 3), c, 3), J)
        R = direct - nested
        norms.append(operator_band_norm(R, 2.0, 2.0 - 5 + 3))
    assert max(norms) / min(norms) < 2


# --------------------------------------------------------------------------- paraproduct


def test_paraproduct_single_modes():
    J = 8
    f = GridFunction.from_modes({1: 1.0}, J, real=False)
    g = GridFunction.from_modes({2: 1.0}, J, real=False)
    split = paraproduct(f, g, 0.1)
    fr = list(frequencies(J))
    i, k = fr.index(3), fr.index(2)
    assert split.w_f[i, k] + split.w_g[i, k] + split.theta[i, k] == pytest.approx(1.0)
    total = split.total()
    assert total.coeff(3) == pytest.approx(1.0)
    assert np.count_nonzero(np.abs(total.coeffs) > 1e-15) == 1


@given(st.integers(2, 24), st.integers(0, 2 ** 31 - 1), st.floats(0.05, 0.45))
def test_paraproduct_reconstructs_product(J, seed, eps):
    rng = np.random.default_rng(seed)
    f, g = random_grid_function(J, rng), random_grid_function(J, rng)
    split = paraproduct(f, g, eps)
    np.testing.assert_allclose(split.total().coeffs, project_product(f, g).coeffs, atol=1e-12)


def test_paraproduct_symmetric_for_equal_factors(rng):
    f = random_grid_function(24, rng)
    split = paraproduct(f, f, 0.1)
    np.testing.assert_allclose(split.Tf_g.coeffs, split.Tg_f.coeffs, atol=1e-13)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_remainder_weights_nonnegative_and_comparable(eps):
    J = 48
    z = GridFunction.zeros(J)
    split = paraproduct(z, z, eps)
    assert np.min(split.theta) >= 0
    fr = frequencies(J)
    xi, eta = np.meshgrid(fr, fr, indexing="ij")
    live = split.theta > 0
    ratio = japanese(eta[live]) / japanese(xi[live] - eta[live])
    c = comparability_constant(eps)
    assert ratio.min() >= c and ratio.max() <= 1 / c


def test_overlapping_cutoffs_break_separation():
    z = GridFunction.zeros(48)
    assert np.min(paraproduct(z, z, 0.9).theta) < 0


def test_paraproduct_rejects_mismatch():
    with pytest.raises(DimensionError):
        paraproduct(GridFunction.zeros(4), GridFunction.zeros(6))
