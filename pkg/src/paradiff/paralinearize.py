"""Paralinearization of the quasilinear flow: ``u_t + Op(A(u)) u + R0(u) = 0``.

The generator symbol is

    A(u) = a (i xi)^3 + a'/2 (i xi)^2 + a1 (i xi),

with ``a = F_z1z1(x, u, u_x)`` and ``'`` the total x-derivative.  The first-order
coefficient collects every order-one contribution of the linearized flux,
written in Weyl form:

    a1 = -a''/4 + b' - c,    b = F_z0z1,  c = F_z0z0.

``R0`` is then defined as the exact residual so the decomposition holds
identically; its smoothing is checked numerically, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionError
from .hamiltonian import HamiltonianDensity, nonlinear_rhs, require_elliptic, state_coefficient
from .quantization import DEFAULT_EPS, apply_operator, quantize_bw
from .spectral_core import GridFunction
from .symbols import Coefficient, Symbol, Term, power_i_xi

__all__ = ["GeneratorSymbol", "build_generator_symbol", "residual_remainder", "density_coefficients"]


@dataclass(frozen=True, eq=False)
class GeneratorSymbol:
    principal: Symbol
    subprincipal: Symbol
    first_order: Symbol
    assembled: Symbol
    leading: Coefficient
    first_coefficient: Coefficient
    margin: float

    @property
    def J(self) -> int:
        return self.assembled.J


def density_coefficients(F: HamiltonianDensity, u: GridFunction, K: int | None = None):
    """``(F_z1z1, F_z0z1, F_z0z0)`` at the state ``u`` as coefficients of band ``K = 2J``."""
    K = 2 * u.J if K is None else K

    def partial(n0, n1):
        return state_coefficient(lambda x, z0, z1: F(x, z0, z1, 0, n0, n1), u, K)

    return partial(0, 2), partial(1, 1), partial(2, 0)


def build_generator_symbol(F: HamiltonianDensity, u: GridFunction, check: bool = True) -> GeneratorSymbol:
    margin = require_elliptic(F, u).margin if check else float("nan")
    J = u.J
    a, b, c = density_coefficients(F, u)
    da = a.derivative()
    a1 = a.derivative(2) * (-0.25) + b.derivative() - c
    principal = Symbol([Term(a, power_i_xi(3))], J, 3.0)
    sub = Symbol([Term(da * 0.5, power_i_xi(2))], J, 2.0)
    first = Symbol([Term(a1, power_i_xi(1))], J, 1.0)
    assembled = Symbol(principal.terms + sub.terms + first.terms, J, 3.0)
    return GeneratorSymbol(principal, sub, first, assembled, a, a1, margin)


def residual_remainder(F: HamiltonianDensity, u: GridFunction, A: GeneratorSymbol | None = None,
                       J: int | None = None, eps: float = DEFAULT_EPS) -> GridFunction:
    """``R0(u) = -rhs(u) - Op(A(u)) u`` at truncation ``J``."""
    J = u.J if J is None else J
    if J != u.J:
        raise DimensionError(f"state has J={u.J}, requested J={J}")
    if A is None:
        A = build_generator_symbol(F, u)
    if A.J != J:
        raise DimensionError(f"generator symbol has J={A.J}, requested J={J}")
    opA = quantize_bw(A.assembled, J, eps)
    return -nonlinear_rhs(F, u, check=False) - apply_operator(opA, u)
