"""Polynomial Hamiltonian densities ``F(x, z0, z1)`` and the evolution they generate.

A density is a sum of monomials ``c * trig(x) * z0^p * z1^q`` with
``trig(x) = alpha cos(kx) + beta sin(kx)``.  All partial derivatives are exact
monomial manipulations; state-dependent quantities are sampled on grids large
enough that band projection is alias-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EllipticityError
from .spectral_core import GridFunction, analyze, differentiate, grid, synthesize
from .symbols import Coefficient

__all__ = [
    "Monomial",
    "HamiltonianDensity",
    "EllipticityReport",
    "build_density",
    "load_density",
    "save_density",
    "kdv_density",
    "quasilinear_density",
    "nonlinear_rhs",
    "conservative_rhs",
    "hamiltonian_value",
    "ellipticity_margin",
    "require_elliptic",
    "state_grid",
    "state_coefficient",
]


@dataclass(frozen=True)
class Monomial:
    """``c * (alpha cos(kx) + beta sin(kx)) * z0^p * z1^q``."""

    c: float
    p: int
    q: int
    alpha: float = 1.0
    beta: float = 0.0
    k: int = 0

    def dz0(self):
        if self.p == 0:
            return None
        return Monomial(self.c * self.p, self.p - 1, self.q, self.alpha, self.beta, self.k)

    def dz1(self):
        if self.q == 0:
            return None
        return Monomial(self.c * self.q, self.p, self.q - 1, self.alpha, self.beta, self.k)

    def dx(self):
        if self.k == 0:
            return None
        return Monomial(self.c, self.p, self.q, self.beta * self.k, -self.alpha * self.k, self.k)

    def trig(self, x):
        if self.k == 0:
            return self.alpha * np.ones_like(x)
        return self.alpha * np.cos(self.k * x) + self.beta * np.sin(self.k * x)

    def __call__(self, x, z0, z1):
        return self.c * self.trig(x) * z0 ** self.p * z1 ** self.q


class HamiltonianDensity:
    """Sum of :class:`Monomial` terms with cached partial derivatives."""

    def __init__(self, monomials):
        self.monomials = tuple(monomials)
        self._cache = {}

    @property
    def degree(self) -> int:
        return max((m.p + m.q for m in self.monomials), default=0)

    @property
    def max_wavenumber(self) -> int:
        return max((m.k for m in self.monomials), default=0)

    def partial(self, nx: int = 0, n0: int = 0, n1: int = 0) -> tuple:
        """Monomials of ``d_x^nx d_z0^n0 d_z1^n1 F``."""
        key = (nx, n0, n1)
        if key not in self._cache:
            terms = list(self.monomials)
            for step, count in (("dx", nx), ("dz0", n0), ("dz1", n1)):
                for _ in range(count):
                    terms = [t for t in (getattr(m, step)() for m in terms) if t is not None]
            self._cache[key] = tuple(terms)
        return self._cache[key]

    def __call__(self, x, z0, z1, nx: int = 0, n0: int = 0, n1: int = 0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.broadcast(x, z0, z1).shape)
        for m in self.partial(nx, n0, n1):
            out = out + m(x, z0, z1)
        return out

    def __repr__(self):
        return f"HamiltonianDensity({len(self.monomials)} monomials, degree {self.degree})"


def _monomial_from_spec(item) -> Monomial:
    if isinstance(item, Monomial):
        return item
    c, p, q, kc, ks = item
    p, q, kc, ks = int(p), int(q), int(kc), int(ks)
    if p < 0 or q < 0 or kc < 0 or ks < 0:
        raise ConfigError(f"monomial {item!r}: powers and wavenumbers must be non-negative")
    if kc and ks:
        raise ConfigError(f"monomial {item!r}: give either a cosine or a sine wavenumber, not both")
    if ks:
        return Monomial(float(c), p, q, 0.0, 1.0, ks)
    return Monomial(float(c), p, q, 1.0, 0.0, kc)


def build_density(spec) -> HamiltonianDensity:
    """Density from monomials or ``(c, p, q, k_cos, k_sin)`` tuples.

    ``k_cos > 0`` selects ``cos(k_cos x)``, ``k_sin > 0`` selects ``sin(k_sin x)``,
    both zero give an x-independent monomial.
    """
    monos = [_monomial_from_spec(item) for item in spec]
    for m in monos:
        if m.p + m.q <= 1:
            raise ConfigError(f"monomial {m} has total degree {m.p + m.q}; constant and linear parts are not allowed")
        if not np.isfinite(m.c):
            raise ConfigError(f"monomial {m} has a non-finite coefficient")
    return HamiltonianDensity(monos)


def load_density(path) -> HamiltonianDensity:
    """Read ``c p q k_cos k_sin`` lines; blank lines and ``#`` comments are skipped."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ConfigError(f"{path}:{lineno}: expected 'c p q k_cos k_sin', got {line!r}")
            try:
                c = float(parts[0])
                ints = [int(v) for v in parts[1:]]
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
            rows.append((c, *ints))
    return build_density(rows)


def save_density(F: HamiltonianDensity, path) -> None:
    with open(path, "w") as fh:
        for m in F.monomials:
            if m.k and m.alpha and m.beta:
                raise ValueError("mixed cos/sin monomials have no file representation")
            if m.k == 0:
                fh.write(f"{m.c * m.alpha!r} {m.p} {m.q} 0 0\n")
            elif m.beta == 0:
                fh.write(f"{m.c * m.alpha!r} {m.p} {m.q} {m.k} 0\n")
            else:
                fh.write(f"{m.c * m.beta!r} {m.p} {m.q} 0 {m.k}\n")


def kdv_density() -> HamiltonianDensity:
    """``z1^2/2 - z0^3/6``, giving ``u_t = -u_xxx - u u_x``."""
    return build_density([(0.5, 0, 2, 0, 0), (-1.0 / 6.0, 3, 0, 0, 0)])


def quasilinear_density() -> HamiltonianDensity:
    """``(1 + z0^2) z1^2 / 2``."""
    return build_density([(0.5, 0, 2, 0, 0), (0.5, 2, 2, 0, 0)])


# --------------------------------------------------------------------------- state sampling


def _dealiased_size(F: HamiltonianDensity, J: int, extra_degree: int = 1) -> int:
    need = (F.degree + extra_degree) * J + 2 * F.max_wavenumber + 2
    return int(2 ** math.ceil(math.log2(max(need, 8))))


def state_grid(u: GridFunction, M: int):
    """``x, u, u_x, u_xx, u_xxx`` sampled on the ``M``-point grid."""
    du = differentiate(u)
    ddu = differentiate(du)
    dddu = differentiate(ddu)
    vals = [np.real(synthesize(f, M)) for f in (u, du, ddu, dddu)]
    return (grid(M), *vals)


def state_coefficient(func, u: GridFunction, K: int, M: int | None = None) -> Coefficient:
    """Modes ``|n| <= K`` of ``func(x, u, u_x)`` for a smooth pointwise ``func``."""
    if M is None:
        M = int(2 ** math.ceil(math.log2(8 * max(K, u.J) + 8)))
    x, z0, z1, _, _ = state_grid(u, M)
    return Coefficient.from_samples(np.asarray(func(x, z0, z1), dtype=complex), K)


# --------------------------------------------------------------------------- evolution


def nonlinear_rhs(F: HamiltonianDensity, u: GridFunction, check: bool = True) -> GridFunction:
    """Expanded quasilinear right-hand side ``u_t`` evaluated at ``u``, band-projected."""
    if check:
        require_elliptic(F, u)
    M = _dealiased_size(F, u.J)
    x, z0, z1, z2, z3 = state_grid(u, M)

    def P(nx, n0, n1):
        return F(x, z0, z1, nx, n0, n1)

    expanded = (
        z3 * P(0, 0, 2)
        + 2 * z2 * P(1, 0, 2)
        + z2 ** 2 * P(0, 0, 3)
        + 2 * z1 * z2 * P(0, 1, 2)
        + z1 ** 2 * P(0, 2, 1)
        + z1 * (-P(0, 2, 0) + 2 * P(1, 1, 1))
        - P(1, 1, 0)
        + P(2, 0, 1)
    )
    return analyze(-expanded, u.J)


def conservative_rhs(F: HamiltonianDensity, u: GridFunction) -> GridFunction:
    """``d/dx (F_z0) - d^2/dx^2 (F_z1)`` by spectral differentiation of the pointwise fluxes."""
    M = _dealiased_size(F, u.J)
    x, z0, z1, _, _ = state_grid(u, M)
    flux0 = analyze(F(x, z0, z1, 0, 1, 0), u.J)
    flux1 = analyze(F(x, z0, z1, 0, 0, 1), u.J)
    return differentiate(flux0) - differentiate(differentiate(flux1))


def hamiltonian_value(F: HamiltonianDensity, u: GridFunction) -> float:
    """``int_T F(x, u, u_x) dx``, exact for polynomial densities."""
    M = _dealiased_size(F, u.J, extra_degree=1)
    x, z0, z1, _, _ = state_grid(u, M)
    return float(2 * np.pi * np.mean(F(x, z0, z1)))


@dataclass(frozen=True)
class EllipticityReport:
    margin: float
    attained_at: int
    gridsize: int

    @property
    def ok(self) -> bool:
        return self.margin > 0

    @property
    def x(self) -> float:
        return 2 * np.pi * self.attained_at / self.gridsize


def ellipticity_margin(F: HamiltonianDensity, u: GridFunction, gridsize: int | None = None) -> EllipticityReport:
    """Minimum of ``F_z1z1(x, u, u_x)`` over a uniform grid."""
    M = gridsize or max(256, 8 * u.J)
    x, z0, z1, _, _ = state_grid(u, M)
    a = F(x, z0, z1, 0, 0, 2)
    i = int(np.argmin(a))
    return EllipticityReport(float(a[i]), i, M)


def require_elliptic(F: HamiltonianDensity, u: GridFunction) -> EllipticityReport:
    rep = ellipticity_margin(F, u)
    if not rep.ok:
        raise EllipticityError(
            f"F_z1z1 reaches {rep.margin:.3e} <= 0 at x = {rep.x:.4f}; the equation is not elliptic at this state")
    return rep
