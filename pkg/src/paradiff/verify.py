"""Property suites run by ``paradiff verify``; one suite per module, each a list of named checks."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import acceptance as acc
from .calculus import comparability_constant, paraproduct
from .cutoff import PLATEAU, SUPPORT, chi
from .hamiltonian import conservative_rhs, nonlinear_rhs, state_grid
from .paralinearize import build_generator_symbol, residual_remainder
from .quantization import apply_operator, operator_band_norm, quantize_bw
from .spectral_core import (
    analyze,
    antiderivative,
    differentiate,
    random_grid_function,
    sobolev_norm,
    synthesize,
)
from .symbols import Coefficient, Symbol, Term, japanese, poisson_bracket, power_i_xi, regularize_symbol, s_form

__all__ = ["CheckResult", "SUITES", "run_suite", "suite_names"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


def _from_criterion(res) -> CheckResult:
    return CheckResult(f"criterion {res.number}: {res.title}", res.passed, res.line())


# --------------------------------------------------------------------------- suites


def suite_spectral_core(cfg):
    rng = np.random.default_rng(cfg.seed)
    J = cfg.solver.J
    u = random_grid_function(J, rng, decay=1)
    back = analyze(synthesize(u, 4 * J), J)
    err = np.max(np.abs(back.coeffs - u.coeffs))
    yield _check("analyze inverts synthesize", err < 1e-13, f"max error {err:.2e}")
    err = np.max(np.abs(antiderivative(differentiate(u)).coeffs - u.coeffs))
    yield _check("antiderivative inverts differentiate", err < 1e-13, f"max error {err:.2e}")
    vals = synthesize(u, 4 * J)
    l2 = np.sqrt(np.mean(vals ** 2))
    err = abs(l2 - sobolev_norm(u, 0)) / l2
    yield _check("Parseval identity", err < 1e-13, f"relative error {err:.2e}")


def suite_symbol_algebra(cfg):
    rng = np.random.default_rng(cfg.seed)
    J = 12
    a = acc.random_structured_symbol(J, rng)
    b = acc.random_structured_symbol(J, rng)
    worst_anti, worst_sym = 0.0, 0.0
    for x, xi in rng.uniform([0, -20], [2 * np.pi, 20], size=(10, 2)):
        ab, ba = poisson_bracket(a, b).eval(x, xi), poisson_bracket(b, a).eval(x, xi)
        worst_anti = max(worst_anti, abs(ab + ba) / max(abs(ab), 1.0))
        sab, sba = s_form(a, b).eval(x, xi), s_form(b, a).eval(x, xi)
        worst_sym = max(worst_sym, abs(sab - sba) / max(abs(sab), 1.0))
    yield _check("bracket antisymmetry", worst_anti < 1e-12, f"max relative |{{a,b}}+{{b,a}}| = {worst_anti:.2e}")
    yield _check("s-form symmetry", worst_sym < 1e-12, f"max relative |s(a,b)-s(b,a)| = {worst_sym:.2e}")
    xs = np.linspace(-3, 3, 601)
    ok = np.all(chi(xs[np.abs(xs) <= PLATEAU]) == 1) and np.all(chi(xs[np.abs(xs) >= SUPPORT]) == 0)
    yield _check("cutoff plateau and support", ok, f"chi = 1 on |xi| <= {PLATEAU}, 0 on |xi| >= {SUPPORT}")
    eps = cfg.solver.eps_para
    reg = regularize_symbol(a, eps)
    xi = np.arange(-2 * J, 2 * J + 1) / 2.0
    table = reg.fourier_table(xi)
    n = np.arange(-a.K, a.K + 1)
    outside = np.abs(n)[None, :] >= SUPPORT * eps * japanese(2 * xi)[:, None]
    leak = np.max(np.abs(table[outside]), initial=0.0)
    yield _check("regularized symbol spectral localization", leak == 0, f"max mode outside support {leak:.1e}")


def suite_quantization(cfg):
    yield _from_criterion(acc.run_criterion(1, seed=cfg.seed, eps=cfg.solver.eps_para))
    eps = cfg.solver.eps_para
    norms = []
    for J in (16, 32, 64, 128):
        a = Symbol([Term(Coefficient.from_function(np.cos, 2 * J), power_i_xi(3))], J, 3.0)
        norms.append(operator_band_norm(quantize_bw(a, J, eps), 2.0, -1.0))
    spread = max(norms) / min(norms)
    yield _check("boundedness stable under refinement", spread < 2, f"norms {np.round(norms, 4)}")
    rng = np.random.default_rng(cfg.seed)
    J = 16
    a, b = acc.random_structured_symbol(J, rng), acc.random_structured_symbol(J, rng)
    lhs = quantize_bw(2.0 * a + (-3.0) * b, J, eps).matrix
    rhs = 2.0 * quantize_bw(a, J, eps).matrix - 3.0 * quantize_bw(b, J, eps).matrix
    err = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
    yield _check("linearity in the symbol", err < 1e-13, f"relative error {err:.2e}")


def suite_paradifferential_calculus(cfg):
    eps = cfg.solver.eps_para
    yield _from_criterion(acc.run_criterion(2, seed=cfg.seed, eps=eps))
    yield _from_criterion(acc.run_criterion(3, eps=eps))
    J = 64
    rng = np.random.default_rng(cfg.seed)
    split = paraproduct(random_grid_function(J, rng), random_grid_function(J, rng), eps)
    neg = float(np.min(split.theta))
    yield _check("paraproduct cutoffs separate (remainder weight >= 0)", neg >= -1e-15,
                 f"min remainder weight {neg:.3f} at eps={eps}")
    c = comparability_constant(eps)
    fr = split.Tf_g.freqs
    xi, eta = np.meshgrid(fr, fr, indexing="ij")
    live = np.abs(split.theta) > 0
    ratio = japanese(eta[live]) / japanese(xi[live] - eta[live])
    ok = ratio.size == 0 or (ratio.min() >= c and ratio.max() <= 1 / c)
    yield _check("remainder frequencies comparable", ok and c < 1,
                 f"<eta>/<xi-eta> in [{ratio.min() if ratio.size else 0:.3f}, "
                 f"{ratio.max() if ratio.size else 0:.3f}], bound c={c:.3f}")


def suite_hamiltonian_model(cfg):
    rng = np.random.default_rng(cfg.seed)
    J = 32
    F = cfg.density
    u = random_grid_function(J, rng, decay=3, amplitude=0.1)
    expanded = nonlinear_rhs(F, u)
    cons = conservative_rhs(F, u)
    err = np.max(np.abs(expanded.coeffs - cons.coeffs)) / max(np.max(np.abs(cons.coeffs)), 1e-300)
    yield _check("expanded and conservative forms agree", err < 1e-10, f"relative difference {err:.2e}")
    mean = abs(np.mean(synthesize(expanded, 8 * J)))
    yield _check("right-hand side has zero mean", mean < 1e-15, f"sampled mean {mean:.1e}")
    x, z0, z1, _, _ = state_grid(u, 128)
    worst = 0.0
    h = 1e-4
    for n0, n1 in ((1, 0), (0, 1), (0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1)):
        exact = F(x, z0, z1, 0, n0, n1)
        if n0:
            fd = (F(x, z0 + h, z1, 0, n0 - 1, n1) - F(x, z0 - h, z1, 0, n0 - 1, n1)) / (2 * h)
        else:
            fd = (F(x, z0, z1 + h, 0, n0, n1 - 1) - F(x, z0, z1 - h, 0, n0, n1 - 1)) / (2 * h)
        worst = max(worst, np.max(np.abs(exact - fd)) / max(1.0, np.max(np.abs(exact))))
    yield _check("partials match finite differences", worst < 1e-7, f"max relative error {worst:.2e}")


def suite_paralinearizer(cfg):
    F = cfg.density
    eps = cfg.solver.eps_para
    U = random_grid_function(128, np.random.default_rng(cfg.seed), decay=5, amplitude=0.2)
    ratios = []
    worst_id, worst_imag = 0.0, 0.0
    for J in (32, 64, 128):
        u = U.truncate(J)
        A = build_generator_symbol(F, u)
        R0 = residual_remainder(F, u, A, J, eps)
        total = nonlinear_rhs(F, u) + apply_operator(quantize_bw(A.assembled, J, eps), u) + R0
        worst_id = max(worst_id, np.max(np.abs(total.coeffs)))
        for c in (A.leading, A.first_coefficient):
            worst_imag = max(worst_imag, np.max(np.abs(c.modes - np.conj(c.modes[::-1]))))
        ratios.append(sobolev_norm(R0, 2.0) / sobolev_norm(u, 2.0))
    yield _check("exact paralinear decomposition", worst_id < 1e-11, f"max residual {worst_id:.2e}")
    yield _check("real coefficients", worst_imag < 1e-12, f"max conjugate-symmetry defect {worst_imag:.2e}")
    spread = max(ratios) / min(ratios)
    yield _check("remainder tameness under refinement", spread < 2, f"ratios {np.round(ratios, 4)}")


def suite_linear_flow(cfg):
    yield _from_criterion(acc.run_criterion(4, eps=cfg.solver.eps_para))
    yield _from_criterion(acc.run_criterion(5, seed=cfg.seed))
    yield _from_criterion(acc.run_criterion(6, seed=cfg.seed))


def suite_quasilinear_solver(cfg):
    yield _from_criterion(acc.run_criterion(8, J=cfg.solver.J, s0=cfg.solver.s0))
    yield _from_criterion(acc.run_criterion(9, J_hi=cfg.J_hi))
    yield _from_criterion(acc.run_criterion(7, J=cfg.solver.J))
    yield _from_criterion(acc.run_criterion(10, J=cfg.solver.J, seed=cfg.seed))


SUITES = {
    "spectral_core": suite_spectral_core,
    "symbol_algebra": suite_symbol_algebra,
    "quantization": suite_quantization,
    "paradifferential_calculus": suite_paradifferential_calculus,
    "hamiltonian_model": suite_hamiltonian_model,
    "paralinearizer": suite_paralinearizer,
    "linear_flow": suite_linear_flow,
    "quasilinear_solver": suite_quasilinear_solver,
}


def suite_names():
    return list(SUITES)


def run_suite(name: str, cfg):
    """Run one suite; returns ``(checks, seconds)``."""
    t = time.time()
    checks = list(SUITES[name](cfg))
    return checks, time.time() - t
