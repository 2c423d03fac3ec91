"""Iterative solver for the quasilinear equation and an independent method-of-lines oracle.

Iterate ``n`` solves the linear problem

    d/dt u_n = -Op(S(u_{n-1})) u_n - R0(u_{n-1}),   u_n(0) = u0,

with generator and forcing frozen along the previous iterate (the first iterate
uses ``u_0`` and no forcing).  Iteration stops when the ``sup_t H^{s0}``
difference of consecutive iterates falls below a relative tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NonconvergenceError, StabilityError
from .hamiltonian import (
    HamiltonianDensity,
    ellipticity_margin,
    hamiltonian_value,
    nonlinear_rhs,
    require_elliptic,
)
from .linear_flow import STABILITY_LIMIT, MollifiedGenerator, mollify_symbol, plateau_eps, solve_linear
from .paralinearize import build_generator_symbol
from .quantization import DEFAULT_EPS, apply_operator, quantize_bw
from .spectral_core import GridFunction, random_grid_function, sobolev_norm
from .trajectory import Trajectory

__all__ = [
    "SolverConfig",
    "IterationRecord",
    "IterationLedger",
    "SolveResult",
    "iterate_once",
    "solve",
    "oracle_solve",
    "continuity_probe",
    "ContinuityReport",
    "auto_time",
    "save_ledger",
]


@dataclass(frozen=True)
class SolverConfig:
    J: int = 64
    s0: float = 1.6
    s: float = 4.6
    sigma: float = 2.0
    eps_para: float = DEFAULT_EPS
    eps_mollify: float | None = None
    T: float | None = None
    h: float | None = None
    n_max: int = 12
    tol: float = 1e-9
    ratio_limit: float = 0.75
    max_retries: int = 4
    nodes: int = 64

    def __post_init__(self):
        if self.s <= 4.5:
            raise ConfigError(f"s must exceed 4.5 (regularity threshold for local well-posedness), got {self.s}")
        if self.s0 <= 1.5:
            raise ConfigError(f"s0 must exceed 1.5 (regularity threshold of the linear estimates), got {self.s0}")
        if self.J < 4:
            raise ConfigError(f"J must be at least 4, got {self.J}")
        if not 0 < self.eps_para < 1:
            raise ConfigError(f"eps_para must lie in (0, 1), got {self.eps_para}")
        if self.eps_mollify is not None and not 0 <= self.eps_mollify <= 1:
            raise ConfigError(f"eps_mollify must lie in [0, 1], got {self.eps_mollify}")
        if self.T is not None and self.T < 0:
            raise ConfigError(f"T must be non-negative, got {self.T}")
        if self.h is not None and self.h <= 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.n_max < 1:
            raise ConfigError(f"n_max must be at least 1, got {self.n_max}")
        if not 0 < self.ratio_limit < 1:
            raise ConfigError(f"ratio_limit must lie in (0, 1), got {self.ratio_limit}")
        if self.nodes < 2:
            raise ConfigError(f"nodes must be at least 2, got {self.nodes}")


def auto_time(u0: GridFunction, cfg: SolverConfig) -> float:
    """``min(1, 1/||u0||_{H^{s0+3}})``."""
    n = sobolev_norm(u0, cfg.s0 + 3)
    return 1.0 if n <= 1 else 1.0 / n


# --------------------------------------------------------------------------- one iterate


def _node_data(F: HamiltonianDensity, u: GridFunction, cfg: SolverConfig, with_forcing: bool):
    A = build_generator_symbol(F, u)
    eps = plateau_eps(A, cfg.J) if cfg.eps_mollify is None else cfg.eps_mollify
    gen = mollify_symbol(A, F, u, eps, cfg.J, cfg.eps_para)
    if not with_forcing:
        return gen, None
    if gen.symbol is A.assembled:
        opA = gen.operator
    else:
        opA = quantize_bw(A.assembled, cfg.J, cfg.eps_para)
    R0 = -nonlinear_rhs(F, u, check=False) - apply_operator(opA, u)
    return gen, -R0


def iterate_once(F: HamiltonianDensity, u_prev: Trajectory, u0: GridFunction, cfg: SolverConfig,
                 first: bool = False) -> Trajectory:
    """Solve the linear problem frozen along ``u_prev``; ``first`` drops the remainder forcing."""
    T = u_prev.T
    times = np.linspace(0.0, T, cfg.nodes)
    gens, forces = [], []
    frozen = first and len(u_prev) == 2 and np.array_equal(u_prev.coeffs[0], u_prev.coeffs[1])
    for t in times:
        if frozen and gens:
            gens.append(gens[0])
            continue
        g, f = _node_data(F, u_prev.at(t), cfg, not first)
        gens.append(g)
        forces.append(f)
    forcing = None if first else Trajectory.from_states(times, forces)
    sol = solve_linear(F, u_prev, u0, cfg.sigma, gens[0].eps, T, h=cfg.h, forcing=forcing,
                       eps_bw=cfg.eps_para, nodes=cfg.nodes, generators=gens, track_energy=False)
    return sol.trajectory


# --------------------------------------------------------------------------- full solve


@dataclass(frozen=True)
class IterationRecord:
    m: int
    norm_s0: float
    norm_s0_plus_3: float
    norm_s: float
    dt_norm_s0: float
    difference: float
    ratio: float


@dataclass
class IterationLedger:
    T: float
    records: list = field(default_factory=list)
    attempts: list = field(default_factory=list)
    converged: bool = False
    first_iterate_constant: float = float("nan")
    theta: float = float("nan")
    big_m: float = float("nan")
    radius: float = float("nan")

    @property
    def differences(self) -> np.ndarray:
        return np.array([r.difference for r in self.records])

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass(frozen=True, eq=False)
class SolveResult:
    trajectory: Trajectory
    ledger: IterationLedger


def _time_derivative_norm(traj: Trajectory, s: float) -> float:
    if len(traj) < 2:
        return 0.0
    dt = np.diff(traj.times)[:, None]
    d = np.diff(traj.coeffs, axis=0) / dt
    w = np.abs(traj.state(0).freqs).astype(float) ** s
    return float(np.max(np.sqrt(np.sum(np.abs(d * w) ** 2, axis=1))))


def _attempt(F, u0, cfg, T, ledger):
    u_prev = Trajectory.constant(u0, T).resample(np.linspace(0.0, T, cfg.nodes)) if T > 0 else None
    if T == 0:
        return Trajectory.from_states([0.0], [u0]), True, True
    records = []
    prev_diff = None
    bad = 0
    scale = max(sobolev_norm(u0, cfg.s0), 1e-300)
    traj = u_prev
    for m in range(1, cfg.n_max + 1):
        traj = iterate_once(F, u_prev, u0, cfg, first=(m == 1))
        margin = min(ellipticity_margin(F, traj.state(i)).margin for i in range(0, len(traj), max(1, len(traj) // 8)))
        if margin <= 0:
            require_elliptic(F, traj.final())
        diff = (traj - u_prev).sup_norm(cfg.s0)
        ratio = diff / prev_diff if prev_diff else float("nan")
        records.append(IterationRecord(m, traj.sup_norm(cfg.s0), traj.sup_norm(cfg.s0 + 3), traj.sup_norm(cfg.s),
                                       _time_derivative_norm(traj, cfg.s0), diff, ratio))
        if m >= 3 and ratio > cfg.ratio_limit:
            bad += 1
            if bad >= 2:
                ledger.attempts.append((T, records))
                return traj, False, False
        else:
            bad = 0
        if m >= 2 and diff <= cfg.tol * max(records[-1].norm_s0, scale):
            ledger.records = records
            return traj, True, True
        prev_diff = diff if diff > 0 else None
        if diff == 0:
            ledger.records = records
            return traj, True, True
        u_prev = traj
    ledger.attempts.append((T, records))
    ledger.records = records
    return traj, False, True


def solve(F: HamiltonianDensity, u0: GridFunction, cfg: SolverConfig) -> SolveResult:
    """Iterate to convergence on ``[0, T]``; halve ``T`` when the iteration fails to contract."""
    if u0.J != cfg.J:
        raise ConfigError(f"initial datum has J={u0.J}, configuration has J={cfg.J}")
    require_elliptic(F, u0)
    T = auto_time(u0, cfg) if cfg.T is None else cfg.T
    ledger = IterationLedger(T)
    for _ in range(cfg.max_retries + 1):
        ledger.T = T
        traj, ok, contracting = _attempt(F, u0, cfg, T, ledger)
        if ok:
            ledger.converged = True
            _measure_constants(ledger, u0, cfg)
            return SolveResult(traj, ledger)
        if contracting:
            break
        T = T / 2
    raise NonconvergenceError(
        f"iteration did not converge to tol={cfg.tol:g} within {cfg.n_max} iterates "
        f"(last T={T:g}, attempts={len(ledger.attempts)})", ledger=ledger)


def _measure_constants(ledger: IterationLedger, u0: GridFunction, cfg: SolverConfig):
    if not ledger.records:
        return
    n0 = sobolev_norm(u0, cfg.s0)
    first = ledger.records[0]
    ledger.first_iterate_constant = first.norm_s0 / n0 if n0 > 0 else 1.0
    c = ledger.first_iterate_constant
    ledger.radius = c * n0
    ledger.theta = 4 * c * sobolev_norm(u0, cfg.s0 + 3)
    ledger.big_m = 4 * c * sobolev_norm(u0, cfg.s)


def save_ledger(ledger: IterationLedger, path) -> None:
    """Columnar text keyed by iterate ``m``."""
    with open(path, "w") as fh:
        fh.write(f"# T {ledger.T!r} converged {int(ledger.converged)} C_r {ledger.first_iterate_constant!r} "
                 f"Theta {ledger.theta!r} M {ledger.big_m!r}\n")
        fh.write("# m norm_s0 norm_s0+3 norm_s dt_norm_s0 difference ratio\n")
        for r in ledger.records:
            fh.write(f"{r.m:d} {r.norm_s0:.10e} {r.norm_s0_plus_3:.10e} {r.norm_s:.10e} "
                     f"{r.dt_norm_s0:.10e} {r.difference:.10e} {r.ratio:.6e}\n")


# --------------------------------------------------------------------------- oracle


def oracle_solve(F: HamiltonianDensity, u0: GridFunction, J_hi: int, T: float, h: float | None = None,
                 samples: int = 11) -> Trajectory:
    """Method of lines on the expanded equation at truncation ``J_hi`` with classical RK4.

    No paradifferential operators are involved; the step obeys
    ``h <= 2.5 / (max F_z1z1 * J_hi^3)``.
    """
    u = u0.truncate(J_hi)
    rep = require_elliptic(F, u)
    x_max = _max_leading_value(F, u)
    limit = STABILITY_LIMIT / (x_max * J_hi ** 3)
    if h is None:
        h = 0.95 * limit
    elif h > limit:
        raise StabilityError(f"oracle step h={h:.3e} exceeds {limit:.3e}", suggested_h=0.95 * limit)
    times = np.linspace(0.0, T, samples) if T > 0 else np.array([0.0])
    states = [u]
    y = u
    for t0, t1 in zip(times[:-1], times[1:]):
        n = max(1, int(math.ceil((t1 - t0) / h - 1e-12)))
        dt = (t1 - t0) / n
        for _ in range(n):
            k1 = nonlinear_rhs(F, y, check=False)
            k2 = nonlinear_rhs(F, y + (0.5 * dt) * k1, check=False)
            k3 = nonlinear_rhs(F, y + (0.5 * dt) * k2, check=False)
            k4 = nonlinear_rhs(F, y + dt * k3, check=False)
            y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        require_elliptic(F, y)
        states.append(y)
    return Trajectory.from_states(times, states)


def _max_leading_value(F, u):
    from .hamiltonian import state_grid

    x, z0, z1, _, _ = state_grid(u, max(256, 8 * u.J))
    return float(np.max(F(x, z0, z1, 0, 0, 2)))


# --------------------------------------------------------------------------- continuity


@dataclass(frozen=True)
class ContinuityReport:
    deltas: np.ndarray
    diff_s0: np.ndarray
    diff_s: np.ndarray
    T: float

    @property
    def monotone(self) -> bool:
        order = np.argsort(self.deltas)[::-1]
        return bool(np.all(np.diff(self.diff_s0[order]) < 0) and np.all(np.diff(self.diff_s[order]) < 0))

    def decade_factors(self) -> np.ndarray:
        """``diff(delta_i) / diff(delta_{i+1})`` normalized per decade of ``delta``, largest delta first."""
        order = np.argsort(self.deltas)[::-1]
        d, e = self.deltas[order], self.diff_s0[order]
        return (e[:-1] / e[1:]) ** (1.0 / np.log10(d[:-1] / d[1:]))


def continuity_probe(F: HamiltonianDensity, u0: GridFunction, deltas, cfg: SolverConfig,
                     seed: int = 0) -> ContinuityReport:
    """Perturb ``u0`` by ``delta * bump`` (unit ``H^s`` norm, fixed seed) and compare final states."""
    base = solve(F, u0, cfg)
    T = base.ledger.T
    cfg_T = replace(cfg, T=T)
    rng = np.random.default_rng(seed)
    bump = random_grid_function(u0.J, rng, decay=cfg.s + 2)
    bump = bump * (1.0 / sobolev_norm(bump, cfg.s))
    ref = base.trajectory.final()
    d0, ds = [], []
    for delta in deltas:
        if delta == 0:
            d0.append(0.0)
            ds.append(0.0)
            continue
        res = solve(F, u0 + delta * bump, cfg_T)
        diff = res.trajectory.final() - ref
        d0.append(sobolev_norm(diff, cfg.s0))
        ds.append(sobolev_norm(diff, cfg.s))
    return ContinuityReport(np.asarray(deltas, dtype=float), np.array(d0), np.array(ds), T)
