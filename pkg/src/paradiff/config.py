"""Experiment configuration: INI-style ``key = value`` files with a fixed schema."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .hamiltonian import HamiltonianDensity, kdv_density, load_density, quasilinear_density
from .solver import SolverConfig
from .spectral_core import GridFunction, load_grid_function

__all__ = ["ExperimentConfig", "parse_config", "default_config", "BUILTIN_DENSITIES"]

BUILTIN_DENSITIES = {"kdv": kdv_density, "quasilinear": quasilinear_density}

_SCHEMA = {
    "run": {"density": str, "out": str, "seed": int},
    "solver": {
        "J": int, "s0": float, "s": float, "sigma": float, "eps_para": float,
        "eps_mollify": "optfloat", "T": "optfloat", "h": "optfloat", "n_max": int, "tol": float,
        "ratio_limit": float, "max_retries": int, "nodes": int,
    },
    "initial": {"cos": "modes", "sin": "modes", "file": str},
    "compare": {"J_hi": int, "T": float},
    "sweeps": {"eps": "floats", "delta": "floats", "J": "ints"},
}


@dataclass
class ExperimentConfig:
    density_name: str = "kdv"
    density: HamiltonianDensity = field(default_factory=kdv_density)
    solver: SolverConfig = field(default_factory=SolverConfig)
    u0: GridFunction | None = None
    out_dir: str = "out"
    seed: int = 0
    J_hi: int = 128
    compare_T: float = 0.01
    eps_sweep: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    delta_sweep: tuple = (1e-2, 1e-3, 1e-4)
    J_sweep: tuple = (32, 64, 128)
    source: str | None = None

    def initial_state(self) -> GridFunction:
        if self.u0 is not None:
            return self.u0
        return GridFunction.from_modes({1: 0.05, -1: 0.05}, self.solver.J)


def default_config() -> ExperimentConfig:
    """KdV density, ``u0 = 0.1 cos x``, ``J = 64``."""
    return ExperimentConfig()


def _convert(kind, text: str, where: str):
    text = text.strip()
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is str:
            return text
        if kind == "optfloat":
            return None if text.lower() in ("auto", "none", "") else float(text)
        if kind == "floats":
            return tuple(float(v) for v in text.split(",") if v.strip())
        if kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if kind == "modes":
            out = {}
            for item in text.split(","):
                if not item.strip():
                    continue
                k, amp = item.split(":")
                out[int(k)] = float(amp)
            return out
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {text!r} ({exc})") from None
    raise AssertionError(kind)


def _build_initial(section: dict, J: int, base_dir: str) -> GridFunction | None:
    if not section:
        return None
    if "file" in section:
        if "cos" in section or "sin" in section:
            raise ConfigError("[initial]: give either 'file' or 'cos'/'sin' modes, not both")
        path = _resolve(section["file"], base_dir)
        u = load_grid_function(path)
        if u.J != J:
            raise ConfigError(f"[initial] file has J={u.J}, [solver] J={J}")
        return u
    modes = {}
    for k, amp in section.get("cos", {}).items():
        _check_mode(k, J)
        modes[k] = modes.get(k, 0) + amp / 2
        modes[-k] = modes.get(-k, 0) + amp / 2
    for k, amp in section.get("sin", {}).items():
        _check_mode(k, J)
        modes[k] = modes.get(k, 0) - 0.5j * amp
        modes[-k] = modes.get(-k, 0) + 0.5j * amp
    return GridFunction.from_modes(modes, J, real=True)


def _check_mode(k: int, J: int):
    if not 1 <= k <= J:
        raise ConfigError(f"[initial]: wavenumber {k} outside 1..{J}")


def _resolve(path: str, base_dir: str) -> str:
    full = path if os.path.isabs(path) else os.path.join(base_dir, path)
    if not os.path.exists(full):
        raise ConfigError(f"referenced file {path!r} does not exist")
    return full


def parse_config(path) -> ExperimentConfig:
    """Read and validate a configuration file; unknown sections or keys are errors."""
    if not os.path.exists(path):
        raise ConfigError(f"configuration file {path!r} not found")
    parser = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc.message if hasattr(exc, 'message') else exc}") from None
    values = {}
    for sec in parser.sections():
        if sec not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{sec}]")
        values[sec] = {}
        for key, text in parser.items(sec):
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"{path}: unknown key '{key}' in [{sec}]")
            values[sec][key] = _convert(_SCHEMA[sec][key], text, f"{path} [{sec}] {key}")

    base_dir = os.path.dirname(os.path.abspath(path))
    cfg = ExperimentConfig(source=str(path))
    run = values.get("run", {})
    name = run.get("density", "kdv")
    if name in BUILTIN_DENSITIES:
        cfg.density = BUILTIN_DENSITIES[name]()
    else:
        cfg.density = load_density(_resolve(name, base_dir))
    cfg.density_name = name
    cfg.out_dir = run.get("out", cfg.out_dir)
    cfg.seed = run.get("seed", cfg.seed)
    cfg.solver = SolverConfig(**values.get("solver", {}))
    cfg.u0 = _build_initial(values.get("initial", {}), cfg.solver.J, base_dir)
    comp = values.get("compare", {})
    cfg.J_hi = comp.get("J_hi", 2 * cfg.solver.J)
    cfg.compare_T = comp.get("T", cfg.compare_T)
    if cfg.J_hi < cfg.solver.J:
        raise ConfigError(f"[compare] J_hi={cfg.J_hi} must be at least [solver] J={cfg.solver.J}")
    sw = values.get("sweeps", {})
    cfg.eps_sweep = sw.get("eps", cfg.eps_sweep)
    cfg.delta_sweep = sw.get("delta", cfg.delta_sweep)
    cfg.J_sweep = sw.get("J", cfg.J_sweep)
    if any(not 0 < e <= 1 for e in cfg.eps_sweep):
        raise ConfigError("[sweeps] eps values must lie in (0, 1]")
    if any(d < 0 for d in cfg.delta_sweep):
        raise ConfigError("[sweeps] delta values must be non-negative")
    return cfg
