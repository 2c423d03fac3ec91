"""Dense Weyl and Bony-Weyl matrices on the zero-mean frequency lattice ``0 < |j| <= J``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cutoff import SUPPORT
from .errors import DimensionError
from .spectral_core import GridFunction, frequencies
from .symbols import RegularizedSymbol

__all__ = [
    "SpectralOperator",
    "quantize_weyl",
    "quantize_bw",
    "apply_operator",
    "operator_band_norm",
    "extended_size",
    "restrict",
    "compose",
    "save_operator",
    "load_operator",
    "DEFAULT_EPS",
]

DEFAULT_EPS = 0.1
PROVENANCES = ("weyl", "bony_weyl", "composed", "residual", "conjugator", "generator")


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Matrix ``M[j, k]`` with rows and columns ordered as :func:`frequencies`."""

    matrix: np.ndarray
    J: int
    order: float = 0.0
    provenance: str = "weyl"
    eps: float | None = None

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (2 * self.J, 2 * self.J):
            raise DimensionError(f"expected a {2 * self.J}x{2 * self.J} matrix, got {M.shape}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def freqs(self) -> np.ndarray:
        return frequencies(self.J)

    def entry(self, j: int, k: int) -> complex:
        fr = self.freqs
        return complex(self.matrix[np.searchsorted(fr, j), np.searchsorted(fr, k)])

    def preserves_real(self, tol: float = 1e-12) -> bool:
        """``M[-j, -k] = conj(M[j, k])``, i.e. real inputs map to real outputs."""
        M = self.matrix
        scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
        return bool(np.max(np.abs(M[::-1, ::-1] - np.conj(M)), initial=0.0) <= tol * scale)

    def __matmul__(self, other: "SpectralOperator") -> "SpectralOperator":
        if other.J != self.J:
            raise DimensionError(f"operator truncation mismatch: J={self.J} vs J={other.J}")
        return SpectralOperator(self.matrix @ other.matrix, self.J, self.order + other.order,
                                "composed", self.eps)

    def __add__(self, other: "SpectralOperator") -> "SpectralOperator":
        if other.J != self.J:
            raise DimensionError(f"operator truncation mismatch: J={self.J} vs J={other.J}")
        return SpectralOperator(self.matrix + other.matrix, self.J, max(self.order, other.order),
                                "composed", self.eps)

    def __sub__(self, other: "SpectralOperator") -> "SpectralOperator":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "SpectralOperator":
        return SpectralOperator(self.matrix * scalar, self.J, self.order, self.provenance, self.eps)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralOperator(J={self.J}, order={self.order}, provenance={self.provenance!r})"


def _assemble(a, J: int) -> np.ndarray:
    """``M[j, k] = ahat(j - k, (j + k)/2)`` from one Fourier table per Weyl midpoint."""
    fr = frequencies(J)
    nmax = 2 * J
    # midpoints (j + k)/2 range over -J..J in half steps; index by j + k
    xi = np.arange(-2 * J, 2 * J + 1) / 2.0
    table = np.empty((xi.size, 2 * nmax + 1), dtype=complex)
    chunk = max(1, 4_000_000 // max(1, 8 * (a.K + nmax)))
    for start in range(0, xi.size, chunk):
        stop = min(xi.size, start + chunk)
        table[start:stop] = a.fourier_table(xi[start:stop], nmax)
    jj, kk = np.meshgrid(fr, fr, indexing="ij")
    return table[jj + kk + 2 * J, jj - kk + nmax]


def quantize_weyl(a, J: int) -> SpectralOperator:
    """Weyl quantization of a symbol (or anything exposing ``fourier_table``)."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    return SpectralOperator(_assemble(a, J), J, a.order, "weyl")


def quantize_bw(a, J: int, eps: float = DEFAULT_EPS) -> SpectralOperator:
    """Bony-Weyl quantization: Weyl matrix damped by ``chi_eps(|j - k| / <j + k>)``."""
    reg = RegularizedSymbol(a, eps)
    return SpectralOperator(_assemble(reg, J), J, a.order, "bony_weyl", eps)


def apply_operator(M: SpectralOperator, u: GridFunction) -> GridFunction:
    if u.J != M.J:
        raise DimensionError(f"operator has J={M.J}, function has J={u.J}")
    out = M.matrix @ u.coeffs
    real = u.real and M.preserves_real()
    return GridFunction(out, M.J, real)


def operator_band_norm(M: SpectralOperator, s_in: float, s_out: float) -> float:
    """Largest singular value of ``diag(|j|^s_out) M diag(|j|^-s_in)``."""
    w = np.abs(M.freqs).astype(float)
    W = (w[:, None] ** s_out) * M.matrix * (w[None, :] ** (-s_in))
    return float(np.linalg.norm(W, 2))


# --------------------------------------------------------------------------- compositions


def extended_size(J: int, eps: float, band: int) -> int:
    """Lattice size on which a product of BW operators restricted to ``|j| <= J`` is exact.

    ``band`` bounds the x-bandwidth of the symbol coefficients; the BW cutoff
    further limits couplings to ``|j - k| < 1.9 eps <j + k>``.
    """
    delta = SUPPORT * eps
    if delta >= 1:
        return J + band
    reach = math.ceil(((1 + delta) * J + delta) / (1 - delta)) - J
    return J + max(0, min(band, reach))


def restrict(M: SpectralOperator, J: int) -> SpectralOperator:
    """Block of ``M`` acting on ``|j|, |k| <= J``."""
    if J > M.J:
        raise DimensionError(f"cannot restrict J={M.J} to larger J={J}")
    d = M.J - J
    sub = M.matrix[d:M.J + J, d:M.J + J]
    return SpectralOperator(sub, J, M.order, M.provenance, M.eps)


def compose(ops, J: int) -> SpectralOperator:
    """Product of operators assembled on a common extended lattice, restricted to ``J``."""
    prod = ops[0]
    for op in ops[1:]:
        prod = prod @ op
    return restrict(prod, J)


# --------------------------------------------------------------------------- dumps


def save_operator(M: SpectralOperator, path) -> None:
    """Columnar ``j k re im`` rows for nonzero entries after a one-line header."""
    fr = M.freqs
    rows, cols = np.nonzero(M.matrix)
    with open(path, "w") as fh:
        fh.write(f"# J {M.J} order {M.order!r} provenance {M.provenance} eps {M.eps!r}\n")
        for r, c in zip(rows, cols):
            v = M.matrix[r, c]
            fh.write(f"{fr[r]:d} {fr[c]:d} {v.real:.17e} {v.imag:.17e}\n")


def load_operator(path) -> SpectralOperator:
    with open(path) as fh:
        head = fh.readline().split()
        J, order, prov, eps = int(head[2]), float(head[4]), head[6], head[8]
        data = np.loadtxt(fh, ndmin=2)
    M = np.zeros((2 * J, 2 * J), dtype=complex)
    fr = frequencies(J)
    if data.size:
        r = np.searchsorted(fr, data[:, 0].astype(int))
        c = np.searchsorted(fr, data[:, 1].astype(int))
        M[r, c] = data[:, 2] + 1j * data[:, 3]
    return SpectralOperator(M, J, order, prov, None if eps == "None" else float(eps))
