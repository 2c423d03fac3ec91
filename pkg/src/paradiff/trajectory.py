"""Time-indexed sequences of band-limited states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .spectral_core import GridFunction, frequencies, sobolev_norm

__all__ = ["Trajectory", "save_trajectory", "load_trajectory"]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``u(t_i)`` at increasing times, stored as a ``(len(t), 2J)`` coefficient array."""

    times: np.ndarray
    coeffs: np.ndarray
    J: int
    real: bool = True

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (t.size, 2 * self.J):
            raise DimensionError(f"trajectory coefficients have shape {c.shape}, expected {(t.size, 2 * self.J)}")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_states(cls, times, states) -> "Trajectory":
        states = list(states)
        J = states[0].J
        real = all(s.real for s in states)
        return cls(np.asarray(times, dtype=float), np.array([s.coeffs for s in states]), J, real)

    @classmethod
    def constant(cls, u: GridFunction, T: float) -> "Trajectory":
        return cls.from_states([0.0, T], [u, u])

    def __len__(self):
        return self.times.size

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def state(self, i: int) -> GridFunction:
        return GridFunction(self.coeffs[i], self.J, self.real)

    def states(self):
        return [self.state(i) for i in range(len(self))]

    def final(self) -> GridFunction:
        return self.state(len(self) - 1)

    def at(self, t: float) -> GridFunction:
        """Linear interpolation in time (clamped to the stored interval)."""
        ts = self.times
        if t <= ts[0]:
            return self.state(0)
        if t >= ts[-1]:
            return self.final()
        i = int(np.searchsorted(ts, t, side="right")) - 1
        theta = (t - ts[i]) / (ts[i + 1] - ts[i])
        return GridFunction((1 - theta) * self.coeffs[i] + theta * self.coeffs[i + 1], self.J, self.real)

    def resample(self, times) -> "Trajectory":
        return Trajectory.from_states(times, [self.at(t) for t in times])

    def sup_norm(self, s: float) -> float:
        """``max_i ||u(t_i)||_{H^s}``."""
        w = np.abs(frequencies(self.J)).astype(float) ** s
        return float(np.max(np.sqrt(np.sum(np.abs(self.coeffs * w) ** 2, axis=1))))

    def norms(self, s: float) -> np.ndarray:
        return np.array([sobolev_norm(self.state(i), s) for i in range(len(self))])

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        if other.J != self.J or other.times.shape != self.times.shape or np.any(other.times != self.times):
            raise DimensionError("trajectories must share J and time nodes to be subtracted")
        return Trajectory(self.times, self.coeffs - other.coeffs, self.J, self.real and other.real)


def save_trajectory(traj: Trajectory, path) -> None:
    """Columnar text: ``t`` then ``re im`` pairs for frequencies ``-J..-1, 1..J``."""
    with open(path, "w") as fh:
        fh.write(f"# J {traj.J} real {int(traj.real)} columns t (re im) x {2 * traj.J}\n")
        for t, row in zip(traj.times, traj.coeffs):
            pairs = " ".join(f"{c.real:.17e} {c.imag:.17e}" for c in row)
            fh.write(f"{t:.17e} {pairs}\n")


def load_trajectory(path) -> Trajectory:
    with open(path) as fh:
        head = fh.readline().split()
        J, real = int(head[2]), bool(int(head[4]))
        data = np.loadtxt(fh, ndmin=2)
    coeffs = data[:, 1::2] + 1j * data[:, 2::2]
    return Trajectory(data[:, 0], coeffs, J, real)
