"""Symbolic composition with its operator remainder, and the three-piece paraproduct."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoff import chi_eps
from .errors import DimensionError
from .quantization import (
    DEFAULT_EPS,
    SpectralOperator,
    compose,
    extended_size,
    quantize_bw,
)
from .spectral_core import GridFunction, frequencies, project_product
from .symbols import Symbol, japanese, poisson_bracket, s_form

__all__ = [
    "sharp_rho",
    "CompositionResult",
    "compose_with_remainder",
    "ParaproductSplit",
    "paraproduct",
    "single_mode_response",
    "single_mode_slope",
    "comparability_constant",
]


def sharp_rho(a: Symbol, b: Symbol, rho: float) -> Symbol:
    """Truncated composition symbol: ``ab``, then ``+ {a,b}/(2i)``, then ``- s(a,b)/8``."""
    if not 0 < rho <= 3:
        raise ValueError(f"rho must lie in (0, 3], got {rho}")
    out = a * b
    if rho > 1:
        out = out + (1 / 2j) * poisson_bracket(a, b)
    if rho > 2:
        out = out - 0.125 * s_form(a, b)
    return out.with_order(a.order + b.order, min(a.regularity, b.regularity) - min(rho, 3))


def _coefficient_band(a) -> int:
    return max((t.coef.bandwidth() for t in a.terms), default=0)


@dataclass(frozen=True, eq=False)
class CompositionResult:
    principal: Symbol
    residual: SpectralOperator
    rho: float
    product: SpectralOperator

    @property
    def residual_order(self) -> float:
        return self.residual.order


def compose_with_remainder(a: Symbol, b: Symbol, rho: float, J: int,
                           eps: float = DEFAULT_EPS) -> CompositionResult:
    """``Op(a) Op(b) = Op(a #_rho b) + residual`` at truncation ``J``.

    The product is formed on an enlarged lattice so that the restricted block
    equals the infinite-lattice product; the residual is then exactly the
    operator remainder, free of truncation artifacts.
    """
    if a.J != b.J:
        raise DimensionError(f"symbol truncation mismatch: J={a.J} vs J={b.J}")
    principal = sharp_rho(a, b, rho)
    band = max(_coefficient_band(a), _coefficient_band(b))
    Jx = extended_size(J, eps, band)
    product = compose([quantize_bw(a, Jx, eps), quantize_bw(b, Jx, eps)], J)
    target = quantize_bw(principal, J, eps)
    order = a.order + b.order - rho
    residual = SpectralOperator(product.matrix - target.matrix, J, order, "residual", eps)
    return CompositionResult(principal, residual, float(rho), product)


def single_mode_response(R: SpectralOperator, lo: float = 0.25, hi: float = 0.75):
    """Column norms ``||R e_k||`` for ``k`` in ``[lo J, hi J]``."""
    k = np.arange(max(1, int(np.ceil(lo * R.J))), int(np.floor(hi * R.J)) + 1)
    cols = R.J - 1 + k
    return k, np.linalg.norm(R.matrix[:, cols], axis=0)


def single_mode_slope(R: SpectralOperator, lo: float = 0.25, hi: float = 0.75) -> float:
    """Least-squares log-log slope of the single-mode response versus frequency."""
    k, norms = single_mode_response(R, lo, hi)
    keep = norms > 0
    if keep.sum() < 2:
        return -np.inf
    return float(np.polyfit(np.log(k[keep]), np.log(norms[keep]), 1)[0])


# --------------------------------------------------------------------------- paraproduct


@dataclass(frozen=True, eq=False)
class ParaproductSplit:
    """``Pi_J(fg) = Tf_g + Tg_f + remainder`` with the Fourier-side weights used.

    Weight tables are indexed ``[output xi, frequency eta of g]`` over
    :func:`frequencies`; entries where ``f(xi - eta)`` is outside the band are 0.
    """

    Tf_g: GridFunction
    Tg_f: GridFunction
    remainder: GridFunction
    w_f: np.ndarray
    w_g: np.ndarray
    theta: np.ndarray
    eps: float

    def total(self) -> GridFunction:
        return self.Tf_g + self.Tg_f + self.remainder


def paraproduct(f: GridFunction, g: GridFunction, eps: float = DEFAULT_EPS) -> ParaproductSplit:
    if f.J != g.J:
        raise DimensionError(f"truncation mismatch: J={f.J} vs J={g.J}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    J = f.J
    fr = frequencies(J)
    xi, eta = np.meshgrid(fr, fr, indexing="ij")
    diff = xi - eta
    valid = (diff != 0) & (np.abs(diff) <= J)
    w_f = np.where(valid, chi_eps(np.abs(diff) / japanese(xi + eta), eps), 0.0)
    w_g = np.where(valid, chi_eps(np.abs(eta) / japanese(2 * xi - eta), eps), 0.0)
    theta = np.where(valid, 1.0 - w_f - w_g, 0.0)

    fhat = np.zeros(diff.shape, dtype=complex)
    idx = np.where(diff < 0, diff + J, diff + J - 1)
    fhat[valid] = f.coeffs[idx[valid]]
    pairs = fhat * g.coeffs[None, :]

    real = f.real and g.real

    def piece(w):
        return GridFunction(np.sum(w * pairs, axis=1), J, real)

    return ParaproductSplit(piece(w_f), piece(w_g), piece(theta), w_f, w_g, theta, eps)


def comparability_constant(eps: float) -> float:
    """``c`` with ``<eta>/<xi - eta>`` in ``[c, 1/c]`` wherever the remainder weight is nonzero."""
    return 2.2 * eps / (1 + 1.1 * eps)


def product_oracle(f: GridFunction, g: GridFunction) -> GridFunction:
    return project_product(f, g, f.J)
