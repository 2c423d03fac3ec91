"""Mollified linear paradifferential flow, order-two conjugation and the modified energy.

The linear problem is ``v_t + Op(S_eps) v = f`` where ``S_eps`` is the generator
symbol multiplied by ``chi(eps * a(x) * xi^3)`` and ``a = F_z1z1``.  It is
integrated as ``v' = G v + f`` with ``G = -Op(S_eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, StabilityError
from .hamiltonian import HamiltonianDensity, require_elliptic, state_coefficient
from .paralinearize import GeneratorSymbol, build_generator_symbol
from .quantization import (
    DEFAULT_EPS,
    SpectralOperator,
    compose,
    extended_size,
    quantize_bw,
    restrict,
)
from .spectral_core import GridFunction, frequencies, sobolev_norm
from .symbols import Mollifier, Symbol, Term, abs_power, Multiplier
from .trajectory import Trajectory

__all__ = [
    "MollifiedGenerator",
    "ModifiedEnergy",
    "CancellationProfile",
    "GrowthReport",
    "LinearSolution",
    "conjugator",
    "mollify_symbol",
    "plateau_eps",
    "cancellation_profile",
    "cancellation_check",
    "modified_energy",
    "energy_form",
    "energy_rate",
    "advance_linear",
    "solve_linear",
    "save_growth_report",
    "STABILITY_LIMIT",
]

STABILITY_LIMIT = 2.5
PLATEAU_VALUE = 1.1


def _max_leading(A: GeneratorSymbol) -> float:
    a = A.leading
    return float(np.max(a.values(max(64, 4 * a.K + 4)).real))


def plateau_eps(A: GeneratorSymbol, J: int) -> float:
    """Largest mollifier scale for which ``chi(eps a xi^3) = 1`` on ``|xi| <= J``."""
    return min(1.0, PLATEAU_VALUE / (_max_leading(A) * J ** 3))


# --------------------------------------------------------------------------- generator


@dataclass(frozen=True, eq=False)
class MollifiedGenerator:
    eps: float
    symbol: Symbol
    operator: SpectralOperator
    frozen_state: GridFunction
    _norm: list = field(default_factory=list, repr=False)

    @property
    def J(self) -> int:
        return self.operator.J

    @property
    def matrix(self) -> np.ndarray:
        """``G = -Op(S_eps)``, the right-hand side matrix of ``v' = G v``."""
        return -self.operator.matrix

    @property
    def norm(self) -> float:
        if not self._norm:
            self._norm.append(float(np.linalg.norm(self.operator.matrix, 2)))
        return self._norm[0]


def _mollified(sym: Symbol, A: GeneratorSymbol, eps: float, J: int) -> Symbol:
    """Attach ``chi(eps a xi^3)`` to every term unless its plateau covers ``|xi| <= J``."""
    if eps == 0 or eps * _max_leading(A) * J ** 3 <= PLATEAU_VALUE:
        return sym
    moll = Mollifier(eps, A.leading)
    return Symbol([Term(t.coef, t.mult, moll) for t in sym.terms], sym.J, sym.order, sym.regularity)


def mollify_symbol(A: GeneratorSymbol, F: HamiltonianDensity, u: GridFunction, eps: float,
                   J: int | None = None, eps_bw: float = DEFAULT_EPS) -> MollifiedGenerator:
    """Quantized mollified generator at the frozen state ``u``.

    When ``eps * max(a) * J^3 <= 1.1`` the cutoff equals 1 on the whole band and
    is dropped exactly.
    """
    if not 0 <= eps <= 1:
        raise ValueError(f"mollifier scale must lie in [0, 1], got {eps}")
    J = u.J if J is None else J
    sym = _mollified(A.assembled, A, eps, J)
    op = quantize_bw(sym, J, eps_bw)
    op = SpectralOperator(op.matrix, J, 3.0, "generator", eps_bw)
    return MollifiedGenerator(eps, sym, op, u)


def conjugator(F: HamiltonianDensity, u: GridFunction, J: int | None = None, eps: float = DEFAULT_EPS,
               power: float = 1.0 / 6.0) -> SpectralOperator:
    """``Op(a^power)`` with ``a = F_z1z1(x, u, u_x)``; ``power = -1/6`` gives the inverse conjugator."""
    require_elliptic(F, u)
    J = u.J if J is None else J
    c = state_coefficient(lambda x, z0, z1: F(x, z0, z1, 0, 0, 2) ** power, u, 2 * u.J)
    sym = Symbol([Term(c, Multiplier())], u.J, 0.0)
    op = quantize_bw(sym, J, eps)
    return SpectralOperator(op.matrix, J, 0.0, "conjugator", eps)


# --------------------------------------------------------------------------- cancellation


@dataclass(frozen=True)
class CancellationProfile:
    """Fitted polynomial symbol ``sum_p alpha[p, n] (i xi)^p`` of a probed operator, per x-mode ``n``."""

    modes: np.ndarray
    alpha: np.ndarray
    fit_residual: float

    def relative_order_two(self) -> float:
        top = np.abs(self.alpha[3])
        ref = top[self.modes != 0].max(initial=0.0)
        if ref == 0:
            ref = top[self.modes == 0].max(initial=0.0)
        if ref == 0:
            return 0.0
        return float(np.abs(self.alpha[2]).max() / ref)


def _fit_profile(C: SpectralOperator, nmax: int = 6, lo: float = 0.25, hi: float = 0.75) -> CancellationProfile:
    J = C.J
    k = np.arange(max(1, int(math.ceil(lo * J))), int(math.floor(hi * J)) + 1)
    modes = np.arange(-nmax, nmax + 1)
    alpha = np.zeros((4, modes.size), dtype=complex)
    worst = 0.0
    for i, n in enumerate(modes):
        rows = k + n
        keep = (rows >= 1) & (rows <= J)
        if C.eps is not None:
            # stay where the paradifferential cutoff is identically 1
            keep &= abs(n) <= PLATEAU_VALUE * C.eps * np.sqrt(1.0 + (k + rows) ** 2.0)
        if np.count_nonzero(keep) < 6:
            continue
        kk, rr = k[keep], rows[keep]
        y = C.matrix[rr + J - 1, kk + J - 1]
        xi = kk + n / 2.0
        basis = np.stack([(xi / J) ** p for p in range(4)], axis=1)
        beta, *_ = np.linalg.lstsq(basis, y, rcond=None)
        resid = y - basis @ beta
        worst = max(worst, float(np.linalg.norm(resid) / max(np.linalg.norm(y), 1e-300)))
        alpha[:, i] = beta / (1j * J) ** np.arange(4)
    return CancellationProfile(modes, alpha, worst)


def cancellation_profile(A: GeneratorSymbol, F: HamiltonianDensity, u: GridFunction, J: int | None = None,
                         eps: float = DEFAULT_EPS, eps_mollify: float | None = None,
                         conjugate: bool = True) -> CancellationProfile:
    """Probe ``Op(d) Op(chi (a (i xi)^3 + a'/2 (i xi)^2)) Op(1/d)`` on single modes and fit its symbol."""
    J = u.J if J is None else J
    Jx = extended_size(J, eps, 2 * u.J)
    if eps_mollify is None:
        eps_mollify = plateau_eps(A, Jx)
    top = Symbol(A.principal.terms + A.subprincipal.terms, A.J, 3.0)
    top = _mollified(top, A, eps_mollify, Jx)
    middle = quantize_bw(top, Jx, eps)
    if conjugate:
        C = compose([conjugator(F, u, Jx, eps), middle, conjugator(F, u, Jx, eps, power=-1.0 / 6.0)], J)
    else:
        C = restrict(middle, J)
    return _fit_profile(C)


def cancellation_check(A: GeneratorSymbol, F: HamiltonianDensity, u: GridFunction, J: int | None = None,
                       eps: float = DEFAULT_EPS, eps_mollify: float | None = None,
                       conjugate: bool = True) -> float:
    """Largest fitted ``(i xi)^2`` coefficient relative to the x-varying ``(i xi)^3`` coefficient."""
    return cancellation_profile(A, F, u, J, eps, eps_mollify, conjugate).relative_order_two()


# --------------------------------------------------------------------------- energy


@dataclass(frozen=True, eq=False)
class ModifiedEnergy:
    sigma: float
    weight_operator: SpectralOperator
    conjugator: SpectralOperator
    value: float

    @property
    def form(self) -> np.ndarray:
        """Matrix ``Q = D^H W D`` of the quadratic form ``v -> v^H Q v``."""
        D = self.conjugator.matrix
        return D.conj().T @ self.weight_operator.matrix @ D


def energy_form(F: HamiltonianDensity, u: GridFunction, sigma: float, J: int | None = None,
                eps: float = DEFAULT_EPS):
    """Weight ``Op(a^{2 sigma/3} |xi|^{2 sigma})`` and conjugator ``Op(a^{1/6})``."""
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    require_elliptic(F, u)
    J = u.J if J is None else J
    c = state_coefficient(lambda x, z0, z1: F(x, z0, z1, 0, 0, 2) ** (2.0 * sigma / 3.0), u, 2 * u.J)
    sym = Symbol([Term(c, abs_power(2 * sigma))], u.J, 2 * sigma)
    W = quantize_bw(sym, J, eps)
    return SpectralOperator(W.matrix, J, 2 * sigma, "bony_weyl", eps), conjugator(F, u, J, eps)


def modified_energy(F: HamiltonianDensity, u: GridFunction, v: GridFunction, sigma: float,
                    eps: float = DEFAULT_EPS, operators=None) -> ModifiedEnergy:
    """``<W D v, D v>`` in the coefficient-normalized torus pairing."""
    if v.J != u.J:
        raise DimensionError(f"state has J={u.J}, v has J={v.J}")
    W, D = operators if operators is not None else energy_form(F, u, sigma, v.J, eps)
    Dv = D.matrix @ v.coeffs
    val = np.vdot(Dv, W.matrix @ Dv)
    return ModifiedEnergy(sigma, W, D, float(val.real))


def energy_rate(energy: ModifiedEnergy, gen: MollifiedGenerator, v: GridFunction) -> float:
    """``d/dt <W D v, D v>`` along ``v' = G v`` at frozen coefficients."""
    D, W = energy.conjugator.matrix, energy.weight_operator.matrix
    Dv = D @ v.coeffs
    DGv = D @ (gen.matrix @ v.coeffs)
    return float((np.vdot(DGv, W @ Dv) + np.vdot(Dv, W @ DGv)).real)


# --------------------------------------------------------------------------- time stepping


def _check_step(norm: float, h: float):
    if h * norm > STABILITY_LIMIT:
        raise StabilityError(
            f"step h={h:.3e} exceeds the explicit stability limit {STABILITY_LIMIT}/||G|| = {STABILITY_LIMIT / norm:.3e}",
            suggested_h=0.95 * STABILITY_LIMIT / norm)


def advance_linear(gen: MollifiedGenerator, v: GridFunction, h: float,
                   forcing: GridFunction | None = None) -> GridFunction:
    """One classical fourth-order Runge-Kutta step of ``v' = G v + f`` (``f`` constant over the step)."""
    if v.J != gen.J:
        raise DimensionError(f"generator has J={gen.J}, v has J={v.J}")
    _check_step(gen.norm, h)
    G = gen.matrix
    f = 0 if forcing is None else forcing.coeffs
    y = v.coeffs
    k1 = G @ y + f
    k2 = G @ (y + 0.5 * h * k1) + f
    k3 = G @ (y + 0.5 * h * k2) + f
    k4 = G @ (y + h * k3) + f
    out = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    real = v.real and (forcing is None or forcing.real)
    return GridFunction(out, v.J, real)


@dataclass(frozen=True)
class GrowthReport:
    """Norm history of a linear solve at node times."""

    times: np.ndarray
    sobolev: np.ndarray
    modified: np.ndarray
    step: float
    eps: float
    sigma: float
    rate: float
    equivalence_constant: float
    growth_constant: float


@dataclass(frozen=True, eq=False)
class LinearSolution:
    trajectory: Trajectory
    report: GrowthReport


def _as_trajectory(u, T) -> Trajectory:
    if isinstance(u, GridFunction):
        return Trajectory.constant(u, T)
    return u


def _as_forcing(forcing, T):
    if forcing is None:
        return None
    if isinstance(forcing, GridFunction):
        return Trajectory.constant(forcing, T)
    return forcing


def _rk4_segment(G0, G1, f0, f1, y, t0, t1, h):
    """Integrate ``y' = G(t) y + f(t)`` on ``[t0, t1]`` with ``G, f`` linear in ``t``."""
    span = t1 - t0
    nsteps = max(1, int(math.ceil(span / h - 1e-12)))
    dt = span / nsteps
    n = y.shape[0]
    # one matvec per stage: rows [G0; G1 - G0] give G0 z and the slope in theta
    stack = np.vstack([G0, G1 - G0]) if G1 is not None else G0
    linear = G1 is not None
    df = None if f0 is None else f1 - f0

    def rhs(theta, z):
        w = stack @ z
        out = w[:n] + theta * w[n:] if linear else w
        if f0 is not None:
            out = out + f0 + theta * df
        return out

    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(nsteps):
        th = i / nsteps
        tm = (i + 0.5) / nsteps
        k1 = rhs(th, y)
        k2 = rhs(tm, y + half * k1)
        k3 = rhs(tm, y + half * k2)
        k4 = rhs((i + 1) / nsteps, y + dt * k3)
        y = y + sixth * (k1 + 2 * k2 + 2 * k3 + k4)
    return y, dt


def solve_linear(F: HamiltonianDensity, u_traj, v0: GridFunction, sigma: float, eps: float, T: float,
                 h: float | None = None, forcing=None, eps_bw: float = DEFAULT_EPS,
                 nodes: int | None = None, generators=None, track_energy: bool = True) -> LinearSolution:
    """Solve ``v' = -Op(S_eps(u(t))) v + f(t)`` on ``[0, T]`` from ``v0``.

    Generators are assembled at node times and interpolated linearly in time
    between them; the solution is recorded at the nodes.  ``u_traj`` may be a
    single state (frozen coefficients) or a :class:`Trajectory`; ``forcing``
    likewise.  ``generators`` may pass prebuilt :class:`MollifiedGenerator`
    objects, one per node.
    """
    u_traj = _as_trajectory(u_traj, T)
    forcing = _as_forcing(forcing, T)
    J = v0.J
    frozen = len(u_traj) == 2 and np.array_equal(u_traj.coeffs[0], u_traj.coeffs[1])
    if nodes is None:
        nodes = 2 if frozen else min(256, max(2, len(u_traj)))
    times = np.linspace(0.0, T, nodes) if T > 0 else np.array([0.0])

    if generators is None:
        generators = []
        cache = None
        for t in times:
            if frozen and cache is not None:
                generators.append(cache)
                continue
            u = u_traj.at(t)
            A = build_generator_symbol(F, u)
            cache = mollify_symbol(A, F, u, eps, J, eps_bw)
            generators.append(cache)
    gnorm = max(g.norm for g in generators)
    if h is None:
        h = 0.95 * STABILITY_LIMIT / gnorm if gnorm > 0 else max(T, 1e-300)
    _check_step(gnorm, h)

    f_nodes = None
    if forcing is not None:
        f_nodes = [forcing.at(t).coeffs for t in times]

    states = [v0.coeffs]
    y = v0.coeffs
    used = h
    for i in range(len(times) - 1):
        G0 = generators[i].matrix
        same = generators[i + 1] is generators[i]
        G1 = None if same else generators[i + 1].matrix
        f0 = None if f_nodes is None else f_nodes[i]
        f1 = None if f_nodes is None else f_nodes[i + 1]
        if same and f0 is not None and not np.array_equal(f0, f1):
            G1 = G0
        y, used = _rk4_segment(G0, G1, f0, f1, y, times[i], times[i + 1], h)
        states.append(y)
    real = v0.real and (forcing is None or forcing.real)
    traj = Trajectory(times, np.array(states), J, real)
    report = _growth_report(F, u_traj, traj, sigma, eps, eps_bw, used, track_energy)
    return LinearSolution(traj, report)


def _growth_report(F, u_traj, traj, sigma, eps, eps_bw, h, track_energy) -> GrowthReport:
    sob = traj.norms(sigma)
    mod = np.full(sob.shape, np.nan)
    if track_energy:
        for i, t in enumerate(traj.times):
            mod[i] = modified_energy(F, u_traj.at(t), traj.state(i), sigma, eps_bw).value
    rate = 0.0
    if len(traj) > 1 and np.all(sob > 0):
        rate = float(np.polyfit(traj.times, np.log(sob), 1)[0])
    equiv = float("nan")
    if track_energy and np.all(sob > 0):
        ratio = mod / sob ** 2
        equiv = float(max(np.max(ratio), 1 / np.min(ratio))) if np.all(ratio > 0) else float("inf")
    growth = float(np.max(sob) / sob[0]) if sob[0] > 0 else 1.0
    return GrowthReport(traj.times, sob, mod, float(h), float(eps), float(sigma), rate, equiv, growth)


def save_growth_report(rep: GrowthReport, path) -> None:
    """Columnar text ``t  ||v||_H^sigma  ||v||_{sigma,u}  h  eps``."""
    with open(path, "w") as fh:
        fh.write(f"# sigma {rep.sigma!r} rate {rep.rate!r} equivalence {rep.equivalence_constant!r} "
                 f"growth {rep.growth_constant!r}\n")
        fh.write("# t sobolev modified h eps\n")
        for t, s, m in zip(rep.times, rep.sobolev, rep.modified):
            fh.write(f"{t:.17e} {s:.17e} {np.sqrt(max(m, 0.0)) if np.isfinite(m) else m:.17e} "
                     f"{rep.step:.6e} {rep.eps:.6e}\n")
