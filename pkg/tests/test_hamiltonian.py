import numpy as np
import pytest
from hypothesis import given, strategies as st

from paradiff.errors import ConfigError, EllipticityError
from paradiff.hamiltonian import (
    build_density,
    conservative_rhs,
    ellipticity_margin,
    hamiltonian_value,
    kdv_density,
    load_density,
    nonlinear_rhs,
    quasilinear_density,
    save_density,
    state_grid,
)
from paradiff.spectral_core import GridFunction, random_grid_function, synthesize

J = 16


def cos_state(amp, k=1, J=J):
    return GridFunction.from_modes({k: amp / 2, -k: amp / 2}, J)


def tilted_density():
    # z1^2 + 0.5 sin(x) z0 z1^2, i.e. F_z1z1 = 2 + sin(x) z0
    return build_density([(1.0, 0, 2, 0, 0), (0.5, 1, 2, 0, 1)])


DENSITIES = {"kdv": kdv_density, "quasilinear": quasilinear_density, "tilted": tilted_density}


def test_builtin_densities_second_partial():
    x = np.linspace(0, 2 * np.pi, 7)
    z0, z1 = np.linspace(-1, 1, 7), np.linspace(0.5, -0.5, 7)
    np.testing.assert_allclose(kdv_density()(x, z0, z1, 0, 0, 2), 1.0)
    np.testing.assert_allclose(quasilinear_density()(x, z0, z1, 0, 0, 2), 1 + z0 ** 2)


@pytest.mark.parametrize("spec", [[(1.0, 1, 0, 0, 0)], [(1.0, 0, 1, 0, 0)], [(2.0, 0, 0, 0, 0)]])
def test_low_degree_monomials_rejected(spec):
    with pytest.raises(ConfigError):
        build_density(spec)


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_partials_match_finite_differences(name, rng):
    F = DENSITIES[name]()
    x = rng.uniform(0, 2 * np.pi, 20)
    z0, z1 = rng.uniform(-1, 1, 20), rng.uniform(-1, 1, 20)
    h = 1e-5
    for nx in (0, 1):
        for n0 in range(3):
            for n1 in range(3):
                exact0 = F(x, z0, z1, nx, n0 + 1, n1)
                fd0 = (F(x, z0 + h, z1, nx, n0, n1) - F(x, z0 - h, z1, nx, n0, n1)) / (2 * h)
                exact1 = F(x, z0, z1, nx, n0, n1 + 1)
                fd1 = (F(x, z0, z1 + h, nx, n0, n1) - F(x, z0, z1 - h, nx, n0, n1)) / (2 * h)
                for e, f in ((exact0, fd0), (exact1, fd1)):
                    np.testing.assert_allclose(e, f, rtol=1e-7, atol=1e-7 * max(1.0, np.max(np.abs(e))))
    exact = F(x, z0, z1, 1, 0, 0)
    fd = (F(x + h, z0, z1) - F(x - h, z0, z1)) / (2 * h)
    np.testing.assert_allclose(exact, fd, atol=1e-8)


def test_kdv_rhs_on_cosine():
    u = cos_state(1.0)
    # -u_xxx - u u_x = -sin x + sin(2x)/2
    expected = GridFunction.from_modes({1: 0.5j, -1: -0.5j, 2: -0.25j, -2: 0.25j}, J)
    np.testing.assert_allclose(nonlinear_rhs(kdv_density(), u).coeffs, expected.coeffs, atol=1e-14)


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_zero_state_gives_zero_rhs(name):
    assert np.all(nonlinear_rhs(DENSITIES[name](), GridFunction.zeros(J)).coeffs == 0)


@given(st.sampled_from(sorted(DENSITIES)), st.integers(0, 2 ** 31 - 1))
def test_expanded_and_conservative_rhs_agree(name, seed):
    F = DENSITIES[name]()
    u = random_grid_function(J, np.random.default_rng(seed), decay=3, amplitude=0.2)
    a = nonlinear_rhs(F, u)
    b = conservative_rhs(F, u)
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-12 * max(1.0, np.max(np.abs(b.coeffs))))
    assert abs(np.mean(synthesize(a, 8 * J))) < 1e-14


def test_hamiltonian_value_examples():
    F = build_density([(0.5, 0, 2, 0, 0)])
    # int_0^{2 pi} sin^2(x) / 2 dx = pi / 2
    assert hamiltonian_value(F, cos_state(1.0)) == pytest.approx(np.pi / 2, rel=1e-14)
    assert hamiltonian_value(kdv_density(), GridFunction.zeros(J)) == 0


def test_hamiltonian_translation_invariance(rng):
    u = random_grid_function(J, rng, decay=2, amplitude=0.3)
    shift = 0.731
    shifted = GridFunction(u.coeffs * np.exp(-1j * u.freqs * shift), J)
    for F in (kdv_density(), quasilinear_density()):
        assert hamiltonian_value(F, shifted) == pytest.approx(hamiltonian_value(F, u), rel=1e-12)


def test_ellipticity_margins():
    rng = np.random.default_rng(0)
    assert ellipticity_margin(kdv_density(), random_grid_function(J, rng)).margin == pytest.approx(1.0)
    rep = ellipticity_margin(quasilinear_density(), cos_state(1.0))
    assert rep.margin == pytest.approx(1.0, abs=1e-12)
    assert abs(np.cos(rep.x)) < 1e-12
    assert ellipticity_margin(tilted_density(), cos_state(3.0)).margin == pytest.approx(0.5, abs=1e-3)
    bad = ellipticity_margin(tilted_density(), cos_state(5.0))
    assert not bad.ok and bad.margin == pytest.approx(-0.5, abs=1e-3)


def test_rhs_rejects_non_elliptic_state():
    with pytest.raises(EllipticityError):
        nonlinear_rhs(tilted_density(), cos_state(5.0))


def test_state_grid_derivatives():
    x, u, ux, uxx, uxxx = state_grid(cos_state(1.0), 64)
    np.testing.assert_allclose(u, np.cos(x), atol=1e-14)
    np.testing.assert_allclose(ux, -np.sin(x), atol=1e-14)
    np.testing.assert_allclose(uxxx, np.sin(x), atol=1e-14)


def test_density_file_roundtrip(tmp_path):
    F = tilted_density()
    save_density(F, tmp_path / "f.txt")
    G = load_density(tmp_path / "f.txt")
    x, z0, z1 = np.linspace(0, 6, 9), np.linspace(-1, 1, 9), np.linspace(1, -1, 9)
    np.testing.assert_allclose(G(x, z0, z1), F(x, z0, z1), atol=1e-15)


def test_density_file_rejects_malformed(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0 0 2 0\n")
    with pytest.raises(ConfigError):
        load_density(p)
