import numpy as np
import pytest

from paradiff.errors import ConfigError, EllipticityError, StabilityError
from paradiff.hamiltonian import build_density, kdv_density, quasilinear_density
from paradiff.solver import (
    SolverConfig,
    auto_time,
    continuity_probe,
    oracle_solve,
    save_ledger,
    solve,
)
from paradiff.spectral_core import GridFunction, random_grid_function, sobolev_norm
from paradiff.trajectory import Trajectory, load_trajectory, save_trajectory

AIRY = build_density([(0.5, 0, 2, 0, 0)])


def cos_state(amp, J):
    return GridFunction.from_modes({1: amp / 2, -1: amp / 2}, J)


def airy_exact(u0, t):
    return u0.coeffs * np.exp(1j * u0.freqs.astype(float) ** 3 * t)


# --------------------------------------------------------------------------- configuration


@pytest.mark.parametrize("kwargs", [dict(s=4.5), dict(s=4.0), dict(s0=1.5), dict(J=2), dict(eps_para=1.0),
                                    dict(T=-1.0), dict(h=0.0), dict(ratio_limit=1.0), dict(nodes=1)])
def test_solver_config_rejects_invalid(kwargs):
    with pytest.raises(ConfigError):
        SolverConfig(**kwargs)


def test_solver_config_regularity_message():
    with pytest.raises(ConfigError, match="4.5"):
        SolverConfig(s=4.0)


def test_auto_time_small_and_large_data():
    cfg = SolverConfig(J=16)
    assert auto_time(cos_state(0.1, 16), cfg) == 1.0
    big = cos_state(10.0, 16)
    assert auto_time(big, cfg) == pytest.approx(1.0 / sobolev_norm(big, cfg.s0 + 3))


def test_solve_rejects_resolution_mismatch():
    with pytest.raises(ConfigError):
        solve(kdv_density(), cos_state(0.1, 8), SolverConfig(J=16, T=0.01))


def test_solve_rejects_nonelliptic_density():
    F = build_density([(1.0, 0, 2, 0, 0), (0.5, 1, 2, 0, 1)])
    with pytest.raises(EllipticityError):
        solve(F, cos_state(5.0, 16), SolverConfig(J=16, T=0.01))


# --------------------------------------------------------------------------- solve


def test_zero_data_gives_zero_trajectory_in_one_iterate():
    res = solve(kdv_density(), GridFunction.zeros(16), SolverConfig(J=16, T=0.1))
    assert res.ledger.iterations == 1
    assert res.ledger.converged
    assert np.all(res.trajectory.coeffs == 0)


def test_linear_airy_solution_is_exact_phase_rotation():
    u0 = GridFunction.from_modes({1: 0.05, -1: 0.05, 2: 0.02j, -2: -0.02j}, 16)
    res = solve(AIRY, u0, SolverConfig(J=16, T=0.1))
    assert np.max(np.abs(res.trajectory.final().coeffs - airy_exact(u0, 0.1))) < 1e-12


def test_linear_airy_oracle_is_exact_phase_rotation():
    u0 = GridFunction.from_modes({1: 0.05, -1: 0.05, 3: 0.01, -3: 0.01}, 16)
    tr = oracle_solve(AIRY, u0, 16, 0.1)
    # explicit RK4 near its step limit: fourth-order truncation error only
    assert np.max(np.abs(tr.final().coeffs - airy_exact(u0, 0.1))) < 1e-9


@pytest.mark.parametrize("density", [kdv_density, quasilinear_density])
def test_solver_matches_oracle_short_time(density):
    F = density()
    u0 = cos_state(0.1, 32)
    res = solve(F, u0, SolverConfig(J=32, T=0.01))
    ref = oracle_solve(F, u0, 64, 0.01).final().truncate(32)
    err = sobolev_norm(res.trajectory.final() - ref, 1.6) / sobolev_norm(u0, 1.6)
    assert err < 1e-6


def test_iterates_contract():
    res = solve(quasilinear_density(), cos_state(0.1, 16), SolverConfig(J=16, T=0.05))
    ratios = res.ledger.ratios[1:]
    assert res.ledger.converged
    assert np.all(ratios[np.isfinite(ratios)] < 0.75)


def test_solution_keeps_zero_mean_and_is_real():
    u0 = random_grid_function(16, np.random.default_rng(3), decay=4, amplitude=0.1)
    traj = solve(kdv_density(), u0, SolverConfig(J=16, T=0.02)).trajectory
    for u in traj.states():
        assert np.max(np.abs(u.coeffs - np.conj(u.coeffs[::-1]))) < 1e-14


def test_oracle_rejects_step_above_stability_limit():
    with pytest.raises(StabilityError) as info:
        oracle_solve(kdv_density(), cos_state(0.1, 16), 16, 0.01, h=1.0)
    assert info.value.suggested_h < 1.0


def test_solve_is_deterministic():
    u0 = cos_state(0.1, 16)
    a = solve(quasilinear_density(), u0, SolverConfig(J=16, T=0.02)).trajectory
    b = solve(quasilinear_density(), u0, SolverConfig(J=16, T=0.02)).trajectory
    assert np.array_equal(a.coeffs, b.coeffs)


# --------------------------------------------------------------------------- continuity


def test_continuity_probe_zero_perturbation_gives_zero_difference():
    rep = continuity_probe(kdv_density(), cos_state(0.1, 16), [0.0], SolverConfig(J=16, T=0.02))
    assert rep.diff_s0[0] == 0 and rep.diff_s[0] == 0


def test_continuity_probe_differences_shrink_with_delta():
    rep = continuity_probe(kdv_density(), cos_state(0.1, 16), [1e-2, 1e-3], SolverConfig(J=16, T=0.02))
    assert rep.monotone
    assert rep.decade_factors()[0] == pytest.approx(10.0, rel=0.05)


# --------------------------------------------------------------------------- serialization


def test_trajectory_save_load_roundtrip(tmp_path):
    traj = solve(kdv_density(), cos_state(0.1, 16), SolverConfig(J=16, T=0.02)).trajectory
    save_trajectory(traj, tmp_path / "traj.txt")
    back = load_trajectory(tmp_path / "traj.txt")
    assert np.array_equal(back.times, traj.times)
    assert np.max(np.abs(back.coeffs - traj.coeffs)) == 0


def test_trajectory_interpolates_linearly():
    a, b = cos_state(0.1, 8), cos_state(0.3, 8)
    traj = Trajectory.from_states([0.0, 1.0], [a, b])
    assert np.allclose(traj.at(0.25).coeffs, 0.75 * a.coeffs + 0.25 * b.coeffs)


def test_ledger_file_has_one_row_per_iterate(tmp_path):
    res = solve(kdv_density(), cos_state(0.1, 16), SolverConfig(J=16, T=0.02))
    save_ledger(res.ledger, tmp_path / "ledger.txt")
    rows = [ln for ln in (tmp_path / "ledger.txt").read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == res.ledger.iterations
    assert [int(r.split()[0]) for r in rows] == [r.m for r in res.ledger.records]
