import numpy as np
import pytest
from hypothesis import given, strategies as st

from paradiff.errors import EllipticityError
from paradiff.hamiltonian import build_density, ellipticity_margin, kdv_density, nonlinear_rhs, quasilinear_density
from paradiff.paralinearize import build_generator_symbol, density_coefficients, residual_remainder
from paradiff.quantization import apply_operator, quantize_bw
from paradiff.spectral_core import GridFunction, grid, random_grid_function, sobolev_norm
from paradiff.symbols import Coefficient, power_i_xi


def cos_state(amp, J):
    return GridFunction.from_modes({1: amp / 2, -1: amp / 2}, J)


def test_kdv_generator_has_constant_principal_part(rng):
    u = random_grid_function(16, rng, decay=3, amplitude=0.3)
    A = build_generator_symbol(kdv_density(), u)
    lead = A.leading.modes
    assert lead[A.leading.K] == pytest.approx(1.0)
    assert np.max(np.abs(np.delete(lead, A.leading.K))) < 1e-14
    assert A.subprincipal.terms == ()
    assert A.margin == pytest.approx(1.0)


def test_quasilinear_generator_coefficients():
    J = 16
    u = cos_state(0.1, J)
    A = build_generator_symbol(quasilinear_density(), u)
    x = np.linspace(0, 2 * np.pi, 13)
    np.testing.assert_allclose(A.leading.eval(x).real, 1 + 0.01 * np.cos(x) ** 2, atol=1e-14)
    # subprincipal = (1/2) d/dx (1 + 0.01 cos^2 x) (i xi)^2
    sub = A.subprincipal.coefficient_for(power_i_xi(2))
    np.testing.assert_allclose(sub.eval(x).real, -0.01 * np.sin(x) * np.cos(x), atol=1e-14)
    assert abs(sub.mean) < 1e-16


@given(st.integers(0, 2 ** 31 - 1))
def test_coefficients_are_real_and_subprincipal_zero_mean(seed):
    u = random_grid_function(12, np.random.default_rng(seed), decay=3, amplitude=0.3)
    A = build_generator_symbol(quasilinear_density(), u)
    for c in (A.leading, A.first_coefficient, A.subprincipal.coefficient_for(power_i_xi(2))):
        assert c.is_real(1e-12)
    assert abs(A.subprincipal.coefficient_for(power_i_xi(2)).mean) < 1e-15
    scan = grid(ellipticity_margin(quasilinear_density(), u).gridsize)
    assert np.min(A.leading.eval(scan).real) >= A.margin - 1e-12


@given(st.sampled_from(["kdv", "quasilinear"]), st.integers(0, 2 ** 31 - 1))
def test_paralinear_decomposition_is_exact(name, seed):
    F = kdv_density() if name == "kdv" else quasilinear_density()
    J = 24
    u = random_grid_function(J, np.random.default_rng(seed), decay=3, amplitude=0.2)
    A = build_generator_symbol(F, u)
    R0 = residual_remainder(F, u, A, J)
    total = nonlinear_rhs(F, u) + apply_operator(quantize_bw(A.assembled, J), u) + R0
    assert np.max(np.abs(total.coeffs)) < 1e-11


def test_remainder_of_zero_state():
    assert np.all(residual_remainder(kdv_density(), GridFunction.zeros(8)).coeffs == 0)


def test_remainder_is_quadratic_in_amplitude():
    J = 32
    deltas = np.array([1e-1, 1e-2, 1e-3])
    norms = [sobolev_norm(residual_remainder(kdv_density(), cos_state(d, J)), 2.0) for d in deltas]
    slope = np.polyfit(np.log(deltas), np.log(norms), 1)[0]
    assert slope >= 2 - 1e-6


def test_remainder_tameness_across_resolutions():
    F = quasilinear_density()
    U = random_grid_function(128, np.random.default_rng(7), decay=5, amplitude=0.3)
    ratios = []
    for J in (32, 64, 128):
        u = U.truncate(J)
        ratios.append(sobolev_norm(residual_remainder(F, u), 2.0) / sobolev_norm(u, 2.0))
    assert max(ratios) / min(ratios) < 2


def test_generator_lipschitz_constant_stable():
    F = quasilinear_density()
    rng = np.random.default_rng(3)
    U, W, V = (random_grid_function(64, rng, decay=5, amplitude=0.2) for _ in range(3))
    s0 = 1.6
    Ks = []
    for J in (32, 64):
        u, w, v = U.truncate(J), W.truncate(J), V.truncate(J)
        diff = build_generator_symbol(F, u).assembled - build_generator_symbol(F, w).assembled
        lhs = sobolev_norm(apply_operator(quantize_bw(diff, J), v), 2.0)
        Ks.append(lhs / (sobolev_norm(u - w, s0) * sobolev_norm(v, s0 + 3)))
    assert max(Ks) / min(Ks) < 2


def test_remainder_difference_bounded_in_ball():
    F = quasilinear_density()
    rng = np.random.default_rng(5)
    J = 32
    ratios = []
    for _ in range(8):
        u = random_grid_function(J, rng, decay=4, amplitude=0.2)
        v = random_grid_function(J, rng, decay=4, amplitude=0.2)
        num = sobolev_norm(residual_remainder(F, u) - residual_remainder(F, v), 1.6)
        ratios.append(num / sobolev_norm(u - v, 1.6))
    assert max(ratios) < 10 * np.median(ratios)


def test_density_coefficients_for_quasilinear():
    u = cos_state(0.5, 8)
    a, b, c = density_coefficients(quasilinear_density(), u)
    x = np.linspace(0, 2 * np.pi, 9)
    ux = -0.5 * np.sin(x)
    uu = 0.5 * np.cos(x)
    np.testing.assert_allclose(a.eval(x).real, 1 + uu ** 2, atol=1e-14)
    np.testing.assert_allclose(b.eval(x).real, 2 * uu * ux, atol=1e-14)
    np.testing.assert_allclose(c.eval(x).real, ux ** 2, atol=1e-14)


def test_non_elliptic_state_rejected():
    F = build_density([(1.0, 0, 2, 0, 0), (0.5, 1, 2, 0, 1)])
    with pytest.raises(EllipticityError):
        build_generator_symbol(F, cos_state(5.0, 8))
