"""Command-line entry point: ``paradiff {verify,solve,compare,paralinearize}``.

Exit codes: 0 success, 1 property failure, 2 configuration error,
3 numerical failure (ellipticity, step-size limit, nonconvergence).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, replace

from .config import ExperimentConfig, default_config, parse_config
from .errors import ConfigError, EllipticityError, NonconvergenceError, StabilityError
from .hamiltonian import save_density
from .paralinearize import build_generator_symbol, residual_remainder
from .quantization import quantize_bw, save_operator
from .solver import oracle_solve, save_ledger, solve
from .spectral_core import save_grid_function, sobolev_norm
from .symbols import save_symbol
from .trajectory import save_trajectory
from .verify import run_suite, suite_names

log = logging.getLogger("paradiff")

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _density_fingerprint(cfg: ExperimentConfig) -> str:
    return ";".join(f"{m.c!r},{m.p},{m.q},{m.alpha!r},{m.beta!r},{m.k}" for m in cfg.density.monomials)


def _write_run_info(cfg: ExperimentConfig, out: str, command: str, extra: dict | None = None):
    with open(os.path.join(out, "run.txt"), "w") as fh:
        fh.write(f"command = {command}\n")
        fh.write(f"density = {cfg.density_name}\n")
        fh.write(f"fingerprint = {_density_fingerprint(cfg)}\n")
        fh.write(f"seed = {cfg.seed}\n")
        for k, v in asdict(cfg.solver).items():
            fh.write(f"solver.{k} = {v}\n")
        for k, v in (extra or {}).items():
            fh.write(f"{k} = {v}\n")


def _read_fingerprint(directory: str) -> str:
    path = os.path.join(directory, "run.txt")
    if not os.path.exists(path):
        raise ConfigError(f"reference directory {directory!r} has no run.txt")
    with open(path) as fh:
        for line in fh:
            if line.startswith("fingerprint = "):
                return line.split(" = ", 1)[1].strip()
    raise ConfigError(f"{path} records no density fingerprint")


# --------------------------------------------------------------------------- commands


def cmd_verify(cfg: ExperimentConfig, out: str, dry_run: bool = False) -> int:
    """Run every module suite; write ``verify_<suite>.txt`` reports; exit 1 if any check fails."""
    if dry_run:
        for name in suite_names():
            print(name)
        return EXIT_OK
    os.makedirs(out, exist_ok=True)
    failed = []
    for name in suite_names():
        checks, secs = run_suite(name, cfg)
        with open(os.path.join(out, f"verify_{name}.txt"), "w") as fh:
            fh.write(f"# suite {name} ({secs:.1f}s)\n")
            for c in checks:
                fh.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}\n")
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status} [{name}] {c.name}")
            if not c.passed:
                failed.append(f"{name}: {c.name}")
    if failed:
        print(f"{len(failed)} failing properties:", *failed, sep="\n  ")
        return EXIT_PROPERTY
    return EXIT_OK


def cmd_solve(cfg: ExperimentConfig, out: str, dry_run: bool = False) -> int:
    u0 = cfg.initial_state()
    if dry_run:
        print(f"would solve density {cfg.density_name} with J={cfg.solver.J}, T={cfg.solver.T or 'auto'}")
        return EXIT_OK
    os.makedirs(out, exist_ok=True)
    res = solve(cfg.density, u0, cfg.solver)
    save_trajectory(res.trajectory, os.path.join(out, "trajectory.txt"))
    save_ledger(res.ledger, os.path.join(out, "ledger.txt"))
    _write_run_info(cfg, out, "solve", {"T": res.ledger.T})
    print(f"T = {res.ledger.T:g}; {res.ledger.iterations} iterates; final difference "
          f"{res.ledger.differences[-1]:.3e}")
    return EXIT_OK


def cmd_compare(cfg: ExperimentConfig, out: str, dry_run: bool = False, reference: str | None = None) -> int:
    """Solve and run the oracle at ``J_hi``; write a normwise difference table over time."""
    if reference is not None and _read_fingerprint(reference) != _density_fingerprint(cfg):
        raise ConfigError(f"density of reference run {reference!r} differs from the configured density")
    if cfg.J_hi == cfg.solver.J:
        log.warning("J_hi equals J: the oracle resolves no extra modes and is not an independent check")
    if dry_run:
        print(f"would compare solver (J={cfg.solver.J}) and oracle (J_hi={cfg.J_hi}) up to T={cfg.compare_T}")
        return EXIT_OK
    os.makedirs(out, exist_ok=True)
    u0 = cfg.initial_state()
    scfg = replace(cfg.solver, T=cfg.compare_T)
    sol = solve(cfg.density, u0, scfg).trajectory
    ora = oracle_solve(cfg.density, u0, cfg.J_hi, cfg.compare_T, samples=len(sol))
    s0, s = scfg.s0, scfg.s
    ref = sobolev_norm(u0, s0)
    path = os.path.join(out, "compare.txt")
    with open(path, "w") as fh:
        fh.write(f"# J {scfg.J} J_hi {cfg.J_hi} s0 {s0} s {s}\n# t rel_diff_s0 diff_s0 diff_s\n")
        final = None
        for i, t in enumerate(sol.times):
            d = sol.state(i) - ora.at(t).truncate(scfg.J)
            d0, ds = sobolev_norm(d, s0), sobolev_norm(d, s)
            final = d0 / ref if ref > 0 else d0
            fh.write(f"{t:.10e} {final:.6e} {d0:.6e} {ds:.6e}\n")
    _write_run_info(cfg, out, "compare", {"J_hi": cfg.J_hi, "T": cfg.compare_T})
    print(f"final relative H^{s0:g} difference {final:.3e} (table in {path})")
    return EXIT_OK


def cmd_paralinearize(cfg: ExperimentConfig, out: str, dry_run: bool = False) -> int:
    """Dump the generator symbol, its Bony-Weyl matrix and the remainder at the initial state."""
    if dry_run:
        print("would write generator_symbol.txt, generator_operator.txt, remainder.txt")
        return EXIT_OK
    os.makedirs(out, exist_ok=True)
    u = cfg.initial_state()
    A = build_generator_symbol(cfg.density, u)
    save_symbol(A.assembled, os.path.join(out, "generator_symbol.txt"))
    save_operator(quantize_bw(A.assembled, u.J, cfg.solver.eps_para), os.path.join(out, "generator_operator.txt"))
    R0 = residual_remainder(cfg.density, u, A, u.J, cfg.solver.eps_para)
    save_grid_function(R0, os.path.join(out, "remainder.txt"))
    save_density(cfg.density, os.path.join(out, "density.txt"))
    _write_run_info(cfg, out, "paralinearize")
    print(f"ellipticity margin {A.margin:.4f}; |R0|_H^s0 = {sobolev_norm(R0, cfg.solver.s0):.3e}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "solve": cmd_solve, "compare": cmd_compare, "paralinearize": cmd_paralinearize}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paradiff", description="Paradifferential toolkit and quasilinear solver.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="INI configuration file (defaults are used when omitted)")
    p.add_argument("--out", help="output directory (overrides [run] out)")
    p.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
    p.add_argument("--dry-run", action="store_true", help="describe the work without running it")
    p.add_argument("--reference", help="compare: earlier run directory whose density must match")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    where = args.config or "built-in defaults"
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.out_dir
        if args.command == "compare":
            return cmd_compare(cfg, out, args.dry_run, args.reference)
        return COMMANDS[args.command](cfg, out, args.dry_run)
    except ConfigError as exc:
        print(f"[{args.command} with {where}] configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EllipticityError as exc:
        print(f"[{args.command} with {where}] numerical failure: ellipticity hypothesis F_z1z1 >= c > 0 violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except StabilityError as exc:
        print(f"[{args.command} with {where}] numerical failure: {exc} (suggested h = {exc.suggested_h:.3e})", file=sys.stderr)
        return EXIT_NUMERICAL
    except NonconvergenceError as exc:
        print(f"[{args.command} with {where}] numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
