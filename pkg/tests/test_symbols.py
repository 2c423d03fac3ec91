import numpy as np
import pytest
from hypothesis import given, strategies as st

from paradiff.acceptance import random_structured_symbol
from paradiff.cutoff import chi, chi_eps
from paradiff.errors import DimensionError, UnsupportedOrderError
from paradiff.spectral_core import GridFunction
from paradiff.symbols import (
    Coefficient,
    Multiplier,
    Symbol,
    Term,
    abs_power,
    bracket_power,
    build_symbol,
    eval_symbol,
    load_symbol,
    poisson_bracket,
    power_i_xi,
    regularize_symbol,
    s_form,
    save_symbol,
    seminorm,
)

J = 8


def cos_symbol(a0=1.0, a1=0.5, n=3):
    """(a0 + a1 cos x)(i xi)^n."""
    c = GridFunction.from_modes({1: a1 / 2, -1: a1 / 2}, J)
    coef = Coefficient.from_grid_function(c) + Coefficient.constant(a0, 2 * J)
    return build_symbol([(coef, power_i_xi(n))], n)


# --------------------------------------------------------------------------- cutoff


def test_cutoff_plateau_support_and_monotone():
    xs = np.linspace(-2.5, 2.5, 5001)
    v = chi(xs)
    assert np.all(v[np.abs(xs) <= 1.1] == 1)
    assert np.all(v[np.abs(xs) >= 1.9] == 0)
    mid = (xs >= 1.1) & (xs <= 1.9)
    assert np.all(np.diff(v[mid]) <= 0)
    d = chi(xs, 1)
    assert np.all(d[(np.abs(xs) < 1.1) | (np.abs(xs) > 1.9)] == 0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_cutoff_derivatives_match_finite_differences(k):
    xs = np.linspace(1.15, 1.85, 15)
    h = 1e-5
    fd = (chi(xs + h, k - 1) - chi(xs - h, k - 1)) / (2 * h)
    scale = np.max(np.abs(chi(xs, k)))
    np.testing.assert_allclose(chi(xs, k), fd, atol=1e-6 * scale)


def test_chi_eps_scaling():
    assert chi_eps(0.11, 0.1) == 1.0
    assert chi_eps(0.19, 0.1) == 0.0


# --------------------------------------------------------------------------- multipliers


@pytest.mark.parametrize("mult", [power_i_xi(3), abs_power(4.0), abs_power(2.5), bracket_power(1.0),
                                  bracket_power(-1.0 / 3.0), power_i_xi(2) * bracket_power(0.5)])
def test_multiplier_derivatives_match_finite_differences(mult):
    xi = np.array([-7.5, -2.25, 0.5, 1.5, 3.0, 11.5])
    h = 1e-5
    for k in range(1, 5):
        exact = mult.values(xi, k)
        fd = (mult.values(xi + h, k - 1) - mult.values(xi - h, k - 1)) / (2 * h)
        np.testing.assert_allclose(exact, fd, rtol=1e-6, atol=1e-6)


def test_multiplier_describe_parse_roundtrip():
    m = power_i_xi(2) * bracket_power(-0.5) * abs_power(3.0)
    assert Multiplier.parse(m.describe()) == m


# --------------------------------------------------------------------------- evaluation


def test_build_symbol_examples():
    a = build_symbol([(1.0, power_i_xi(1))], 1, J=J)
    assert eval_symbol(a, 0.3, 3.0) == pytest.approx(3j)
    z = build_symbol([], 0)
    assert eval_symbol(z, 1.0, 5.0) == 0
    b = build_symbol([(1.0, bracket_power(1.0))], 1, J=J)
    assert eval_symbol(b, 0.0, 0.0) == pytest.approx(1.0)


def test_eval_cosine_cubic_symbol():
    a = cos_symbol()
    # (1 + 0.5 cos 0) (2i)^3 and (1 + 0.5 cos pi) (i)^3
    assert eval_symbol(a, 0.0, 2.0) == pytest.approx(-12j, abs=1e-13)
    assert eval_symbol(a, np.pi, 1.0) == pytest.approx(-0.5j, abs=1e-13)


def test_build_symbol_rejects_mixed_truncations():
    with pytest.raises(DimensionError):
        build_symbol([(GridFunction.zeros(4), power_i_xi(1)), (GridFunction.zeros(5), power_i_xi(0))], 1)


def test_symbol_terms_evaluate_additively(rng):
    a = random_structured_symbol(J, rng)
    for x, xi in [(0.3, 1.5), (2.0, -4.25)]:
        total = sum(complex(t.coef.eval(x)) * complex(t.mult.values(np.array([xi]))[0]) for t in a.terms)
        assert a.eval(x, xi) == pytest.approx(total, rel=1e-13)


def test_symbol_serialization_roundtrip(tmp_path, rng):
    a = random_structured_symbol(J, rng)
    save_symbol(a, tmp_path / "a.txt")
    b = load_symbol(tmp_path / "a.txt")
    assert b.order == a.order and b.J == a.J
    for x, xi in [(0.1, 2.5), (4.0, -3.0)]:
        assert b.eval(x, xi) == pytest.approx(a.eval(x, xi), rel=1e-14)


# --------------------------------------------------------------------------- seminorms


def test_seminorm_examples():
    a = build_symbol([(1.0, power_i_xi(1))], 1, J=J)
    val = seminorm(a, 1, 0.0, 0)
    assert 0 < val < 1
    assert seminorm(build_symbol([], 0, J=J), 0, 0, 4) == 0
    with pytest.raises(UnsupportedOrderError):
        seminorm(a, 1, 0, 5)


def test_seminorm_dyadic_probe_close_to_dense_scan():
    a = cos_symbol() + build_symbol([(1.0, bracket_power(2.0))], 2, J=J)
    coarse = seminorm(a, 3, 1.0, 4)
    dense = seminorm(a, 3, 1.0, 4, probe=np.linspace(-64, 64, 4097))
    assert coarse == pytest.approx(dense, rel=0.05)


def test_order_bookkeeping_by_seminorm_finiteness(rng):
    a, b = random_structured_symbol(J, rng), random_structured_symbol(J, rng)
    for sym, m in [(a * b, a.order + b.order), (poisson_bracket(a, b), a.order + b.order - 1),
                   (s_form(a, b), a.order + b.order - 2)]:
        assert sym.order == m
        lo = seminorm(sym, m, 0.0, 2, probe=2.0 ** np.arange(0, 8))
        hi = seminorm(sym, m, 0.0, 2, probe=2.0 ** np.arange(0, 14))
        assert np.isfinite(hi) and hi <= 2 * lo


# --------------------------------------------------------------------------- bracket and s-form


def _fd_partials(a, x, xi, h=1e-4):
    ax = (a.eval(x + h, xi) - a.eval(x - h, xi)) / (2 * h)
    axi = (a.eval(x, xi + h) - a.eval(x, xi - h)) / (2 * h)
    axx = (a.eval(x + h, xi) - 2 * a.eval(x, xi) + a.eval(x - h, xi)) / h ** 2
    axixi = (a.eval(x, xi + h) - 2 * a.eval(x, xi) + a.eval(x, xi - h)) / h ** 2
    axxi = (a.eval(x + h, xi + h) - a.eval(x + h, xi - h) - a.eval(x - h, xi + h) + a.eval(x - h, xi - h)) / (4 * h * h)
    return ax, axi, axx, axixi, axxi


@given(st.integers(0, 2 ** 31 - 1), st.floats(0, 2 * np.pi), st.floats(0.5, 6.0))
def test_bracket_and_s_form_match_finite_differences(seed, x, xi):
    rng = np.random.default_rng(seed)
    a, b = random_structured_symbol(6, rng), random_structured_symbol(6, rng)
    ax, axi, axx, axixi, axxi = _fd_partials(a, x, xi)
    bx, bxi, bxx, bxixi, bxxi = _fd_partials(b, x, xi)
    pb = axi * bx - ax * bxi
    sf = axx * bxixi - 2 * axxi * bxxi + axixi * bxx
    scale_pb = max(1.0, abs(axi * bx) + abs(ax * bxi))
    scale_sf = max(1.0, abs(axx * bxixi) + abs(axxi * bxxi) + abs(axixi * bxx))
    assert abs(poisson_bracket(a, b).eval(x, xi) - pb) < 1e-5 * scale_pb
    assert abs(s_form(a, b).eval(x, xi) - sf) < 1e-3 * scale_sf


@given(st.integers(0, 2 ** 31 - 1))
def test_bracket_antisymmetric_s_form_symmetric(seed):
    rng = np.random.default_rng(seed)
    a, b = random_structured_symbol(6, rng), random_structured_symbol(6, rng)
    x, xi = rng.uniform(0, 2 * np.pi), rng.uniform(-10, 10)
    ab = poisson_bracket(a, b).eval(x, xi)
    assert abs(ab + poisson_bracket(b, a).eval(x, xi)) <= 1e-12 * max(1.0, abs(ab))
    sab = s_form(a, b).eval(x, xi)
    assert abs(sab - s_form(b, a).eval(x, xi)) <= 1e-12 * max(1.0, abs(sab))


def test_trivial_bracket_and_s_form(rng):
    ixi = build_symbol([(1.0, power_i_xi(1))], 1, J=6)
    b = random_structured_symbol(6, rng)
    assert poisson_bracket(ixi, ixi).terms == ()
    assert s_form(ixi, b).eval(0.7, 2.0) == pytest.approx(0, abs=1e-12)


# --------------------------------------------------------------------------- regularization


def test_regularize_x_independent_symbol_is_unchanged():
    a = build_symbol([(2.0, power_i_xi(3)), (1.0, bracket_power(1.0))], 3, J=J)
    r = regularize_symbol(a, 0.1)
    for xi in (0.0, 1.5, 7.0):
        assert r.eval(0.4, xi) == pytest.approx(a.eval(0.4, xi), rel=1e-14)


def test_regularize_kills_high_mode_at_zero_frequency():
    c = GridFunction.from_modes({10: 1.0}, 10, real=False)
    a = build_symbol([(c, power_i_xi(0))], 0)
    r = regularize_symbol(a, 0.5)
    assert r.eval(0.3, 0.0) == 0
    assert abs(a.eval(0.3, 0.0)) == pytest.approx(1.0)


def test_regularized_modes_vanish_outside_support(rng):
    a = random_structured_symbol(J, rng)
    eps = 0.3
    xi = np.linspace(-20, 20, 161)
    table = regularize_symbol(a, eps).fourier_table(xi)
    n = np.arange(-a.K, a.K + 1)
    # damping is evaluated at <2 xi> = <j + k> for the Weyl midpoint xi = (j + k)/2
    outside = np.abs(n)[None, :] >= 1.9 * eps * np.sqrt(1 + 4 * xi ** 2)[:, None]
    assert np.all(table[outside] == 0)
