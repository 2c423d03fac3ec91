"""Zero-mean periodic functions on the torus, stored by their Fourier coefficients.

Convention: ``u(x) = sum_j uhat(j) exp(i j x)`` with
``uhat(j) = (1/2pi) int u(x) exp(-i j x) dx``, so pointwise products are plain
convolutions of coefficient sequences.  A :class:`GridFunction` of truncation
order ``J`` keeps the modes ``-J..-1, 1..J``; the mean mode is never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "GridFunction",
    "frequencies",
    "analyze",
    "synthesize",
    "sobolev_norm",
    "differentiate",
    "antiderivative",
    "symplectic_form",
    "inner",
    "project_product",
    "random_grid_function",
    "grid",
    "sobolev_weights",
    "save_grid_function",
    "load_grid_function",
]


def frequencies(J: int) -> np.ndarray:
    """Integer frequencies ``[-J, ..., -1, 1, ..., J]`` in storage order."""
    return np.concatenate([np.arange(-J, 0), np.arange(1, J + 1)])


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Zero-mean band-limited function; ``coeffs[i]`` belongs to ``frequencies(J)[i]``."""

    coeffs: np.ndarray
    J: int
    real: bool = True

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (2 * self.J,):
            raise DimensionError(f"expected {2 * self.J} coefficients for J={self.J}, got {c.shape}")
        if self.real:
            # enforce conjugate symmetry exactly: coeff(-j) = conj(coeff(j))
            pos = c[self.J:]
            c[: self.J] = np.conj(pos[::-1])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def freqs(self) -> np.ndarray:
        return frequencies(self.J)

    @classmethod
    def zeros(cls, J: int, real: bool = True) -> "GridFunction":
        return cls(np.zeros(2 * J, dtype=complex), J, real)

    @classmethod
    def from_modes(cls, modes: dict, J: int, real: bool | None = None) -> "GridFunction":
        """Build from a ``{frequency: amplitude}`` mapping; frequency 0 is dropped."""
        c = np.zeros(2 * J, dtype=complex)
        for j, val in modes.items():
            j = int(j)
            if j == 0:
                continue
            if abs(j) > J:
                raise DimensionError(f"frequency {j} outside band |j| <= {J}")
            c[_index(j, J)] = val
        if real is None:
            real = bool(np.allclose(c[:J], np.conj(c[J:][::-1]), rtol=0, atol=1e-15))
        return cls(c, J, real)

    def coeff(self, j: int) -> complex:
        if j == 0 or abs(j) > self.J:
            return 0j
        return complex(self.coeffs[_index(j, self.J)])

    def as_dict(self) -> dict:
        return {int(j): complex(c) for j, c in zip(self.freqs, self.coeffs) if c != 0}

    def full(self, K: int | None = None) -> np.ndarray:
        """Coefficients over ``-K..K`` including an explicit zero mean slot."""
        K = self.J if K is None else K
        out = np.zeros(2 * K + 1, dtype=complex)
        m = min(K, self.J)
        out[K - m:K] = self.coeffs[self.J - m:self.J]
        out[K + 1:K + 1 + m] = self.coeffs[self.J:self.J + m]
        return out

    def truncate(self, J: int) -> "GridFunction":
        """Band-project onto ``|j| <= J`` (or zero-pad when ``J`` is larger)."""
        full = self.full(J)
        return GridFunction(np.concatenate([full[:J], full[J + 1:]]), J, self.real)

    def _binary(self, other, op):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.J != self.J:
            raise DimensionError(f"truncation mismatch: J={self.J} vs J={other.J}")
        return GridFunction(op(self.coeffs, other.coeffs), self.J, self.real and other.real)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return GridFunction(-self.coeffs, self.J, self.real)

    def __mul__(self, scalar):
        if isinstance(scalar, GridFunction):
            return NotImplemented
        real = self.real and np.isreal(scalar)
        return GridFunction(self.coeffs * scalar, self.J, bool(real))

    __rmul__ = __mul__

    def __repr__(self):
        return f"GridFunction(J={self.J}, real={self.real}, nnz={np.count_nonzero(self.coeffs)})"


def _index(j: int, J: int) -> int:
    return j + J if j < 0 else j + J - 1


def _check_grid(n_points: int, J: int):
    if n_points % 2:
        raise DimensionError(f"grid size must be even, got {n_points}")
    if n_points < 2 * J + 2:
        raise DimensionError(f"grid of {n_points} points cannot resolve J={J} (need >= {2 * J + 2})")


def analyze(samples, J: int | None = None) -> GridFunction:
    """Truncated Fourier coefficients of samples on the uniform grid ``x_n = 2 pi n / L``.

    The mean is projected out.  ``J`` defaults to ``L/2 - 1``.
    """
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise DimensionError("samples must be one-dimensional")
    L = samples.shape[0]
    if J is None:
        J = L // 2 - 1
    _check_grid(L, J)
    real = not np.iscomplexobj(samples)
    c = np.fft.fft(samples) / L
    coeffs = np.concatenate([c[L - J:], c[1:J + 1]])
    return GridFunction(coeffs, J, real)


def synthesize(f: GridFunction, gridsize: int) -> np.ndarray:
    """Point values of ``f`` on the uniform grid of ``gridsize`` points."""
    _check_grid(gridsize, f.J)
    spec = np.zeros(gridsize, dtype=complex)
    spec[1:f.J + 1] = f.coeffs[f.J:]
    spec[gridsize - f.J:] = f.coeffs[:f.J]
    vals = np.fft.ifft(spec) * gridsize
    return vals.real if f.real else vals


def grid(gridsize: int) -> np.ndarray:
    return 2 * np.pi * np.arange(gridsize) / gridsize


def sobolev_weights(J: int, s: float) -> np.ndarray:
    return np.abs(frequencies(J)).astype(float) ** s


def sobolev_norm(f: GridFunction, s: float) -> float:
    """``(sum_j |uhat(j)|^2 |j|^{2s})^{1/2}``."""
    w = sobolev_weights(f.J, s)
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * w ** 2)))


def differentiate(f: GridFunction) -> GridFunction:
    return GridFunction(1j * f.freqs * f.coeffs, f.J, f.real)


def antiderivative(f: GridFunction) -> GridFunction:
    """Periodic primitive with zero average."""
    return GridFunction(f.coeffs / (1j * f.freqs), f.J, f.real)


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Coefficient-normalized pairing ``(1/2pi) int f conj(g) dx``."""
    if f.J != g.J:
        raise DimensionError(f"truncation mismatch: J={f.J} vs J={g.J}")
    return complex(np.vdot(g.coeffs, f.coeffs))


def symplectic_form(u: GridFunction, v: GridFunction) -> float:
    """``Omega(u, v) = int (d_x^{-1} u) v dx`` for real u, v."""
    if u.J != v.J:
        raise DimensionError(f"truncation mismatch: J={u.J} vs J={v.J}")
    w = antiderivative(u)
    # int w v dx = 2 pi sum_j what(j) vhat(-j)
    return float((2 * np.pi * np.sum(w.coeffs * v.coeffs[::-1])).real)


def project_product(f: GridFunction, g: GridFunction, J: int | None = None) -> GridFunction:
    """Band projection of the pointwise product ``f g`` (alias-free)."""
    J = f.J if J is None else J
    n = 2 * (f.J + g.J + J) + 2
    prod = synthesize(f, n) * synthesize(g, n)
    return analyze(prod, J)


def random_grid_function(J: int, rng, decay: float = 0.0, amplitude: float = 1.0,
                         real: bool = True) -> GridFunction:
    """Gaussian coefficients scaled by ``|j|^{-decay}``."""
    freqs = frequencies(J)
    c = (rng.standard_normal(2 * J) + 1j * rng.standard_normal(2 * J)) / np.sqrt(2)
    c = amplitude * c * np.abs(freqs).astype(float) ** (-decay)
    return GridFunction(c, J, real)


def save_grid_function(f: GridFunction, path) -> None:
    """Columnar text: a header with ``J`` and the realness flag, then ``j re im`` rows."""
    with open(path, "w") as fh:
        fh.write(f"# J {f.J} real {int(f.real)}\n")
        for j, c in zip(f.freqs, f.coeffs):
            fh.write(f"{j:d} {c.real:.17e} {c.imag:.17e}\n")


def load_grid_function(path) -> GridFunction:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "#" or header[1] != "J" or header[3] != "real":
            raise ValueError(f"{path}: malformed grid-function header")
        J, real = int(header[2]), bool(int(header[4]))
        data = np.loadtxt(fh, ndmin=2)
    modes = {int(row[0]): row[1] + 1j * row[2] for row in data}
    c = np.zeros(2 * J, dtype=complex)
    for j, val in modes.items():
        c[_index(j, J)] = val
    return GridFunction(c, J, real)
