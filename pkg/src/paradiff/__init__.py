"""Bony-Weyl paradifferential calculus on the torus and a solver for quasilinear Hamiltonian KdV equations."""

from .errors import (
    ConfigError,
    DimensionError,
    EllipticityError,
    NonconvergenceError,
    ParadiffError,
    StabilityError,
    UnsupportedOrderError,
)
from .spectral_core import GridFunction, analyze, sobolev_norm, synthesize
from .symbols import Coefficient, Symbol, build_symbol, eval_symbol, poisson_bracket, s_form
from .quantization import SpectralOperator, apply_operator, compose, quantize_bw, quantize_weyl
from .calculus import compose_with_remainder, paraproduct, sharp_rho
from .hamiltonian import HamiltonianDensity, build_density, kdv_density, nonlinear_rhs, quasilinear_density
from .paralinearize import build_generator_symbol, residual_remainder
from .linear_flow import modified_energy, solve_linear
from .solver import SolverConfig, oracle_solve, solve
from .trajectory import Trajectory

__version__ = "0.1.0"
