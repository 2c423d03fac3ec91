"""Symbols ``a(x, xi) = sum_p c_p(x) m_p(xi)`` on the torus and their calculus.

Coefficients are :class:`Coefficient` objects (Fourier modes ``-K..K`` including
the mean, ``K = 2J``); multipliers are products of closed-form factors in
``xi`` that can be differentiated to any order and evaluated exactly at
half-integers.  A term may additionally carry a state-dependent mollifier
``chi(eps * w(x) * xi^3)``; such terms can be evaluated and quantized but have
no exact bracket calculus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from numbers import Number

import numpy as np

from . import cutoff
from .errors import DimensionError, UnsupportedOrderError
from .spectral_core import GridFunction

__all__ = [
    "Coefficient",
    "Multiplier",
    "Mollifier",
    "Term",
    "Symbol",
    "RegularizedSymbol",
    "power_i_xi",
    "abs_power",
    "bracket_power",
    "build_symbol",
    "eval_symbol",
    "seminorm",
    "dyadic_probe",
    "poisson_bracket",
    "s_form",
    "regularize_symbol",
    "japanese",
    "save_symbol",
    "load_symbol",
]

MAX_SEMINORM_ORDER = 4


def japanese(xi):
    return np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2)


def _falling(p, k):
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


# --------------------------------------------------------------------------- coefficients


class Coefficient:
    """x-periodic function stored by its Fourier modes ``-K..K`` (mean included)."""

    __slots__ = ("modes", "K")

    def __init__(self, modes, K: int | None = None):
        modes = np.asarray(modes, dtype=complex)
        if K is None:
            K = (modes.shape[0] - 1) // 2
        if modes.shape != (2 * K + 1,):
            raise DimensionError(f"expected {2 * K + 1} modes for K={K}, got {modes.shape}")
        modes = modes.copy()
        modes.setflags(write=False)
        self.modes = modes
        self.K = K

    @classmethod
    def constant(cls, c, K: int) -> "Coefficient":
        m = np.zeros(2 * K + 1, dtype=complex)
        m[K] = c
        return cls(m, K)

    @classmethod
    def from_grid_function(cls, f: GridFunction, K: int | None = None) -> "Coefficient":
        K = 2 * f.J if K is None else K
        return cls(f.full(K), K)

    @classmethod
    def from_function(cls, func, K: int) -> "Coefficient":
        """Modes of a smooth periodic callable, sampled on a fine grid."""
        M = int(2 ** math.ceil(math.log2(8 * K + 8)))
        x = 2 * np.pi * np.arange(M) / M
        return cls.from_samples(np.asarray(func(x), dtype=complex), K)

    @classmethod
    def from_samples(cls, values, K: int) -> "Coefficient":
        """Modes ``|n| <= K`` of samples on the uniform grid (needs ``len > 2K``)."""
        values = np.asarray(values)
        M = values.shape[0]
        if M <= 2 * K:
            raise DimensionError(f"{M} samples cannot resolve K={K}")
        c = np.fft.fft(values) / M
        idx = np.arange(-K, K + 1) % M
        return cls(c[idx], K)

    def mode(self, n):
        """Modes at integer array ``n``; zero outside ``|n| <= K``."""
        n = np.asarray(n)
        inside = np.abs(n) <= self.K
        out = np.zeros(n.shape, dtype=complex)
        out[inside] = self.modes[n[inside] + self.K]
        return out

    def resize(self, K: int) -> "Coefficient":
        out = np.zeros(2 * K + 1, dtype=complex)
        m = min(K, self.K)
        out[K - m:K + m + 1] = self.modes[self.K - m:self.K + m + 1]
        return Coefficient(out, K)

    def derivative(self, order: int = 1) -> "Coefficient":
        n = np.arange(-self.K, self.K + 1)
        return Coefficient(self.modes * (1j * n) ** order, self.K)

    def values(self, M: int) -> np.ndarray:
        """Samples on the ``M``-point uniform grid (exact when ``M > 2K``)."""
        if M <= 2 * self.K:
            raise DimensionError(f"grid of {M} points cannot resolve K={self.K}")
        spec = np.zeros(M, dtype=complex)
        spec[np.arange(-self.K, self.K + 1) % M] = self.modes
        return np.fft.ifft(spec) * M

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        n = np.arange(-self.K, self.K + 1)
        return np.exp(1j * np.multiply.outer(x, n)) @ self.modes

    def hs_norm(self, s: float) -> float:
        """Sobolev norm with the mean mode weighted by 1."""
        n = np.maximum(np.abs(np.arange(-self.K, self.K + 1)), 1).astype(float)
        return float(np.sqrt(np.sum(np.abs(self.modes) ** 2 * n ** (2 * s))))

    @property
    def mean(self) -> complex:
        return complex(self.modes[self.K])

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.modes - np.conj(self.modes[::-1])), initial=0.0)
                    <= tol * max(1.0, np.max(np.abs(self.modes), initial=0.0)))

    def bandwidth(self) -> int:
        nz = np.nonzero(self.modes)[0]
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(nz - self.K)))

    def _check(self, other: "Coefficient"):
        if other.K != self.K:
            raise DimensionError(f"coefficient truncation mismatch: K={self.K} vs K={other.K}")

    def __add__(self, other):
        if isinstance(other, Number):
            return self + Coefficient.constant(other, self.K)
        self._check(other)
        return Coefficient(self.modes + other.modes, self.K)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return Coefficient(-self.modes, self.K)

    def __mul__(self, other):
        if isinstance(other, Number):
            return Coefficient(self.modes * other, self.K)
        if not isinstance(other, Coefficient):
            return NotImplemented
        self._check(other)
        # exact convolution, truncated back to |n| <= K
        full = np.convolve(self.modes, other.modes)
        return Coefficient(full[self.K:3 * self.K + 1], self.K)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Coefficient(K={self.K}, band={self.bandwidth()})"


# --------------------------------------------------------------------------- multipliers


def _factor_values(kind: str, p: float, k: int, xi: np.ndarray) -> np.ndarray:
    """k-th xi-derivative of the base factor ``|xi|^p`` or ``<xi>^p``."""
    if kind == "abs":
        if float(p).is_integer() and p >= 0 and int(p) % 2 == 0:
            n = int(p)
            if k > n:
                return np.zeros_like(xi)
            return _falling(n, k) * xi ** (n - k)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _falling(p, k) * np.abs(xi) ** (p - k) * np.sign(xi) ** k
        return out
    if kind == "bracket":
        q = p / 2.0
        w = 1.0 + xi ** 2
        out = np.zeros_like(xi)
        # d^k/dxi^k w^q = sum_j q^(j) k! / ((2j-k)! (k-j)!) (2 xi)^(2j-k) w^(q-j)
        for j in range((k + 1) // 2, k + 1):
            coef = _falling(q, j) * math.factorial(k) / (math.factorial(2 * j - k) * math.factorial(k - j))
            out = out + coef * (2 * xi) ** (2 * j - k) * w ** (q - j)
        return out
    raise ValueError(f"unknown multiplier factor kind {kind!r}")


@dataclass(frozen=True)
class Multiplier:
    """``(i xi)^ixi * prod_f d^{deriv_f} base_f(xi)`` with base factors ``|xi|^p`` or ``<xi>^p``."""

    ixi: int = 0
    factors: tuple = ()

    def __post_init__(self):
        if self.ixi < 0:
            raise ValueError("power of (i xi) must be non-negative")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    @property
    def order(self) -> float:
        return self.ixi + sum(p - d for _, p, d in self.factors)

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        merged = {}
        rest = []
        for kind, p, d in self.factors + other.factors:
            if d == 0:
                merged[kind] = merged.get(kind, 0.0) + p
            else:
                rest.append((kind, p, d))
        plain = [(k, p, 0) for k, p in merged.items() if p != 0]
        return Multiplier(self.ixi + other.ixi, tuple(plain + rest))

    def derivative(self):
        """``d/dxi`` as a list of ``(scalar, Multiplier)`` pairs."""
        out = []
        if self.ixi > 0:
            out.append((1j * self.ixi, Multiplier(self.ixi - 1, self.factors)))
        for i, (kind, p, d) in enumerate(self.factors):
            if kind == "abs" and float(p).is_integer() and p >= 0 and int(p) % 2 == 0 and d >= p:
                continue
            f = list(self.factors)
            f[i] = (kind, p, d + 1)
            out.append((1.0, Multiplier(self.ixi, tuple(f))))
        return out

    def base_values(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        out = (1j * xi) ** self.ixi if self.ixi else np.ones(xi.shape, dtype=complex)
        for kind, p, d in self.factors:
            out = out * _factor_values(kind, p, d, xi)
        return out

    def values(self, xi, deriv: int = 0) -> np.ndarray:
        """``d^deriv/dxi^deriv`` of the multiplier at ``xi``."""
        xi = np.asarray(xi, dtype=float)
        expansion = {self: 1.0 + 0j}
        for _ in range(deriv):
            nxt = {}
            for mult, c in expansion.items():
                for c2, m2 in mult.derivative():
                    nxt[m2] = nxt.get(m2, 0) + c * c2
            expansion = nxt
        out = np.zeros(xi.shape, dtype=complex)
        for mult, c in expansion.items():
            out = out + c * mult.base_values(xi)
        return out

    def describe(self) -> str:
        parts = [f"ixi:{self.ixi}"] + [f"{k}:{p!r}:{d}" for k, p, d in self.factors]
        return ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Multiplier":
        ixi = 0
        factors = []
        for part in text.split(","):
            bits = part.split(":")
            if bits[0] == "ixi":
                ixi = int(bits[1])
            else:
                factors.append((bits[0], float(bits[1]), int(bits[2])))
        return cls(ixi, tuple(factors))


def power_i_xi(n: int) -> Multiplier:
    return Multiplier(ixi=n)


def abs_power(p: float) -> Multiplier:
    return Multiplier(factors=(("abs", float(p), 0),))


def bracket_power(p: float) -> Multiplier:
    return Multiplier(factors=(("bracket", float(p), 0),))


# --------------------------------------------------------------------------- terms & symbols


@dataclass(frozen=True, eq=False)
class Mollifier:
    """The factor ``chi(eps * weight(x) * xi^3)``."""

    eps: float
    weight: Coefficient

    def xi_derivatives(self, xi, M: int, order: int):
        """``[d^k/dxi^k chi(eps w(x) xi^3)]_k`` on the ``M``-point x-grid, shape ``(len(xi), M)`` each."""
        w = self.weight.values(M).real[None, :]
        xi = np.asarray(xi, dtype=float)[:, None]
        e = self.eps * w
        y = [e * xi ** 3, 3 * e * xi ** 2, 6 * e * xi, 6 * e * np.ones_like(xi), np.zeros_like(e * xi)]
        return cutoff.chi_composite_derivatives(y, order)


@dataclass(frozen=True, eq=False)
class Term:
    coef: Coefficient
    mult: Multiplier
    moll: Mollifier | None = None


def _as_coefficient(c, K: int | None):
    if isinstance(c, Coefficient):
        return c
    if isinstance(c, GridFunction):
        return Coefficient.from_grid_function(c, K)
    if isinstance(c, Number):
        if K is None:
            raise DimensionError("cannot place a scalar coefficient without a truncation order")
        return Coefficient.constant(c, K)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class Symbol:
    """Finite sum of ``coefficient(x) * multiplier(xi)`` terms, truncated at ``K = 2J``."""

    def __init__(self, terms, J: int, order: float, regularity: float = 0.0):
        self.J = int(J)
        self.order = float(order)
        self.regularity = float(regularity)
        K = 2 * self.J
        combined = {}
        rest = []
        for t in terms:
            if t.coef.K != K:
                raise DimensionError(f"coefficient has K={t.coef.K}, symbol with J={J} needs K={K}")
            if t.moll is None:
                if t.mult in combined:
                    combined[t.mult] = combined[t.mult] + t.coef
                else:
                    combined[t.mult] = t.coef
            else:
                rest.append(t)
        self.terms = tuple(Term(c, m) for m, c in combined.items()
                           if np.any(c.modes != 0)) + tuple(rest)

    @property
    def K(self) -> int:
        return 2 * self.J

    @property
    def is_mollified(self) -> bool:
        return any(t.moll is not None for t in self.terms)

    def with_order(self, order: float, regularity: float | None = None) -> "Symbol":
        reg = self.regularity if regularity is None else regularity
        return Symbol(self.terms, self.J, order, reg)

    # algebra -----------------------------------------------------------------

    def _check(self, other: "Symbol"):
        if other.J != self.J:
            raise DimensionError(f"symbol truncation mismatch: J={self.J} vs J={other.J}")

    def __add__(self, other):
        if isinstance(other, Number):
            other = Symbol([Term(Coefficient.constant(other, self.K), Multiplier())], self.J, 0.0)
        self._check(other)
        return Symbol(self.terms + other.terms, self.J, max(self.order, other.order),
                      min(self.regularity, other.regularity))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, other):
        if isinstance(other, Number):
            return Symbol([Term(t.coef * other, t.mult, t.moll) for t in self.terms], self.J,
                          self.order, self.regularity)
        if not isinstance(other, Symbol):
            return NotImplemented
        self._check(other)
        terms = []
        for a, b in iproduct(self.terms, other.terms):
            if a.moll is not None and b.moll is not None:
                raise ValueError("product of two mollified terms is not supported")
            terms.append(Term(a.coef * b.coef, a.mult * b.mult, a.moll or b.moll))
        return Symbol(terms, self.J, self.order + other.order,
                      min(self.regularity, other.regularity))

    __rmul__ = __mul__

    def _require_plain(self, what):
        if self.is_mollified:
            raise ValueError(f"{what} is not available for mollified symbols")

    def dx(self) -> "Symbol":
        """Total x-derivative (order unchanged, one degree of regularity lost)."""
        self._require_plain("exact x-differentiation")
        return Symbol([Term(t.coef.derivative(), t.mult) for t in self.terms], self.J,
                      self.order, self.regularity - 1)

    def dxi(self) -> "Symbol":
        self._require_plain("exact xi-differentiation")
        terms = []
        for t in self.terms:
            for c, m in t.mult.derivative():
                terms.append(Term(t.coef * c, m))
        return Symbol(terms, self.J, self.order - 1, self.regularity)

    # evaluation --------------------------------------------------------------

    def fourier_table(self, xi, nmax: int | None = None, deriv: int = 0) -> np.ndarray:
        """``[d_xi^deriv ahat(n, xi)]`` with shape ``(len(xi), 2 nmax + 1)``, ``n = -nmax..nmax``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        nmax = self.K if nmax is None else nmax
        n = np.arange(-nmax, nmax + 1)
        out = np.zeros((xi.size, n.size), dtype=complex)
        moll_terms = []
        for t in self.terms:
            if t.moll is None:
                out += np.outer(t.mult.values(xi, deriv), t.coef.mode(n))
            else:
                moll_terms.append(t)
        if moll_terms:
            M = _fine_grid(max(self.K, nmax))
            vals = np.zeros((xi.size, M), dtype=complex)
            for t in moll_terms:
                vals += _mollified_term_values(t, xi, M, deriv)
            spec = np.fft.fft(vals, axis=1) / M
            out += spec[:, n % M]
        return out

    def grid_values(self, xi, M: int, deriv: int = 0) -> np.ndarray:
        """``d_xi^deriv a(x_m, xi)`` on the ``M``-point grid, shape ``(len(xi), M)``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.zeros((xi.size, M), dtype=complex)
        for t in self.terms:
            if t.moll is None:
                out += np.outer(t.mult.values(xi, deriv), t.coef.values(M))
            else:
                out += _mollified_term_values(t, xi, M, deriv)
        return out

    def eval(self, x, xi) -> complex:
        """Pointwise value ``a(x, xi)`` at a real point."""
        total = 0j
        for t in self.terms:
            val = complex(t.coef.eval(x)) * complex(t.mult.values(np.array([xi]))[0])
            if t.moll is not None:
                w = float(np.real(t.moll.weight.eval(x)))
                val *= float(cutoff.chi(t.moll.eps * w * xi ** 3))
            total += val
        return total

    def coefficient_for(self, mult: Multiplier) -> Coefficient:
        for t in self.terms:
            if t.moll is None and t.mult == mult:
                return t.coef
        return Coefficient.constant(0.0, self.K)

    def __repr__(self):
        return f"Symbol(J={self.J}, order={self.order}, terms={len(self.terms)}, mollified={self.is_mollified})"


def _fine_grid(K: int) -> int:
    return int(2 ** math.ceil(math.log2(8 * K + 8)))


def _mollified_term_values(t: Term, xi, M: int, deriv: int):
    if deriv > 4:
        raise UnsupportedOrderError("mollified symbols support xi-derivatives up to order 4")
    c = t.coef.values(M)[None, :]
    chis = t.moll.xi_derivatives(xi, M, deriv)
    out = np.zeros((xi.size, M), dtype=complex)
    for l in range(deriv + 1):
        out += math.comb(deriv, l) * t.mult.values(xi, deriv - l)[:, None] * chis[l]
    return c * out


class RegularizedSymbol:
    """``a_chi``: x-Fourier modes of ``a`` damped by ``chi_eps(n / <2 xi>)``.

    Quantizing it with the plain Weyl rule reproduces the Bony-Weyl matrix
    (``<2 xi> = <j + k>`` at the Weyl midpoint ``xi = (j + k)/2``).
    """

    def __init__(self, base: Symbol, eps: float):
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        self.base = base
        self.eps = float(eps)
        self.J = base.J
        self.order = base.order
        self.regularity = base.regularity

    @property
    def K(self):
        return self.base.K

    @property
    def is_mollified(self):
        return self.base.is_mollified

    def damping(self, xi, n):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return cutoff.chi_eps(np.abs(n)[None, :] / japanese(2 * xi)[:, None], self.eps)

    def fourier_table(self, xi, nmax: int | None = None, deriv: int = 0) -> np.ndarray:
        if deriv:
            raise UnsupportedOrderError("xi-derivatives of regularized symbols are not tabulated")
        nmax = self.K if nmax is None else nmax
        n = np.arange(-nmax, nmax + 1)
        return self.base.fourier_table(xi, nmax) * self.damping(xi, n)

    def eval(self, x, xi) -> complex:
        n = np.arange(-self.K, self.K + 1)
        row = self.fourier_table([xi])[0]
        return complex(np.sum(row * np.exp(1j * n * x)))


# --------------------------------------------------------------------------- operations


def build_symbol(terms, m: float, s: float = 0.0, J: int | None = None) -> Symbol:
    """Assemble a symbol from ``(coefficient, multiplier)`` pairs.

    Coefficients may be :class:`GridFunction` (placed with ``K = 2J``),
    :class:`Coefficient` or plain numbers.  Order and regularity are recorded
    as given.
    """
    Js = set()
    for c, _ in terms:
        if isinstance(c, GridFunction):
            Js.add(c.J)
        elif isinstance(c, Coefficient):
            if c.K % 2:
                raise DimensionError(f"coefficient band K={c.K} is not of the form 2J")
            Js.add(c.K // 2)
    if J is not None:
        Js.add(J)
    if len(Js) > 1:
        raise DimensionError(f"coefficients carry different truncations: {sorted(Js)}")
    if not Js:
        if terms:
            raise DimensionError("truncation order J must be given when all coefficients are scalars")
        Js.add(1)
    J = Js.pop()
    built = [Term(_as_coefficient(c, 2 * J), mult) for c, mult in terms]
    return Symbol(built, J, m, s)


def eval_symbol(a, x: float, xi: float) -> complex:
    return a.eval(x, xi)


def dyadic_probe(J: int) -> np.ndarray:
    top = math.ceil(math.log2(max(J, 1))) + 2
    pos = 2.0 ** np.arange(0, top + 1)
    return np.concatenate([-pos[::-1], [0.0], pos])


def seminorm(a, m: float, s: float, n: int, probe=None) -> float:
    """``max_{beta<=n} sup_xi || <xi>^{beta-m} d_xi^beta a(., xi) ||_{H^s}`` over a probe set."""
    if n > MAX_SEMINORM_ORDER:
        raise UnsupportedOrderError(f"seminorm order {n} > {MAX_SEMINORM_ORDER} is not supported")
    xi = dyadic_probe(a.J) if probe is None else np.asarray(probe, dtype=float)
    K = a.K
    weights = np.maximum(np.abs(np.arange(-K, K + 1)), 1).astype(float) ** s
    best = 0.0
    for beta in range(n + 1):
        table = a.fourier_table(xi, K, deriv=beta)
        norms = np.sqrt(np.sum(np.abs(table * weights[None, :]) ** 2, axis=1))
        best = max(best, float(np.max(japanese(xi) ** (beta - m) * norms)))
    return best


def poisson_bracket(a: Symbol, b: Symbol) -> Symbol:
    """``{a, b} = d_xi a d_x b - d_x a d_xi b``."""
    out = a.dxi() * b.dx() - a.dx() * b.dxi()
    return out.with_order(a.order + b.order - 1, min(a.regularity, b.regularity) - 1)


def s_form(a: Symbol, b: Symbol) -> Symbol:
    """Second-order form ``a_xx b_xixi - 2 a_xxi b_xxi + a_xixi b_xx``."""
    axx, axi = a.dx().dx(), a.dxi()
    bxx, bxi = b.dx().dx(), b.dxi()
    out = axx * bxi.dxi() - 2 * (axi.dx() * bxi.dx()) + axi.dxi() * bxx
    return out.with_order(a.order + b.order - 2, min(a.regularity, b.regularity) - 2)


def regularize_symbol(a: Symbol, eps: float) -> RegularizedSymbol:
    return RegularizedSymbol(a, eps)


# --------------------------------------------------------------------------- serialization


def save_symbol(a: Symbol, path) -> None:
    """Columnar text: one block per term (multiplier description, then ``n re im`` rows)."""
    with open(path, "w") as fh:
        fh.write(f"# symbol J {a.J} order {a.order!r} regularity {a.regularity!r} terms {len(a.terms)}\n")
        for t in a.terms:
            moll = "none" if t.moll is None else repr(t.moll.eps)
            fh.write(f"term {t.mult.describe()} mollifier {moll}\n")
            _write_modes(fh, t.coef)
            if t.moll is not None:
                fh.write("weight\n")
                _write_modes(fh, t.moll.weight)


def _write_modes(fh, c: Coefficient):
    nz = np.nonzero(c.modes)[0]
    fh.write(f"modes {len(nz)}\n")
    for i in nz:
        v = c.modes[i]
        fh.write(f"{i - c.K:d} {v.real:.17e} {v.imag:.17e}\n")


def _read_modes(lines, K):
    head = next(lines).split()
    count = int(head[1])
    modes = np.zeros(2 * K + 1, dtype=complex)
    for _ in range(count):
        n, re, im = next(lines).split()
        modes[int(n) + K] = float(re) + 1j * float(im)
    return Coefficient(modes, K)


def load_symbol(path) -> Symbol:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    head = next(lines).split()
    J, order, reg, nterms = int(head[3]), float(head[5]), float(head[7]), int(head[9])
    K = 2 * J
    terms = []
    for _ in range(nterms):
        _, desc, _, moll = next(lines).split()
        coef = _read_modes(lines, K)
        mollifier = None
        if moll != "none":
            next(lines)
            mollifier = Mollifier(float(moll), _read_modes(lines, K))
        terms.append(Term(coef, Multiplier.parse(desc), mollifier))
    return Symbol(terms, J, order, reg)
