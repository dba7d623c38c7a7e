"""System definitions, pair potentials and the log-domain number type."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Union

import numpy as np


class MicroentError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MicroentError, ValueError):
    pass


class UsageError(MicroentError, ValueError):
    pass


# ---------------------------------------------------------------------------
# LogValue
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogValue:
    """A nonnegative real stored as its natural log, with an explicit zero."""

    log_magnitude: float = -math.inf
    is_zero: bool = True

    def __post_init__(self):
        if not self.is_zero and not math.isfinite(self.log_magnitude):
            if self.log_magnitude == -math.inf:
                object.__setattr__(self, "is_zero", True)
            else:
                raise ValueError(f"non-finite log magnitude {self.log_magnitude}")
        if self.is_zero:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def zero(cls) -> "LogValue":
        return cls()

    @classmethod
    def from_log(cls, log_magnitude: float) -> "LogValue":
        if log_magnitude == -math.inf:
            return cls()
        return cls(float(log_magnitude), False)

    @classmethod
    def from_value(cls, value: float) -> "LogValue":
        if value < 0:
            raise ValueError("LogValue holds nonnegative numbers only")
        if value == 0:
            return cls()
        return cls(math.log(value), False)

    def value(self) -> float:
        return 0.0 if self.is_zero else math.exp(self.log_magnitude)

    def add(self, other: "LogValue") -> "LogValue":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return LogValue(float(np.logaddexp(self.log_magnitude, other.log_magnitude)), False)

    def sub(self, other: "LogValue") -> "LogValue":
        """Log-diff-exp; raises if the difference would be negative."""
        if other.is_zero:
            return self
        if self.is_zero or other.log_magnitude > self.log_magnitude:
            raise ValueError("difference of LogValues is negative")
        if other.log_magnitude == self.log_magnitude:
            return LogValue()
        d = other.log_magnitude - self.log_magnitude
        return LogValue(self.log_magnitude + math.log(-math.expm1(d)), False)

    def mul(self, other: "LogValue") -> "LogValue":
        if self.is_zero or other.is_zero:
            return LogValue()
        return LogValue(self.log_magnitude + other.log_magnitude, False)

    def scale(self, factor: float) -> "LogValue":
        """Multiply by a nonnegative real factor."""
        return self.mul(LogValue.from_value(factor))

    def __add__(self, other):
        return self.add(other)

    def __mul__(self, other):
        if isinstance(other, LogValue):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def __float__(self):
        return self.log_magnitude


# ---------------------------------------------------------------------------
# Pair potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    name = "ideal"

    def pair(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def stability_constant(self, n_particles: int) -> float:
        return 0.0

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class HardSphere:
    diameter: float = 1.0
    name = "hard_sphere"

    def __post_init__(self):
        if not self.diameter > 0:
            raise DomainError("hard-sphere diameter must be positive")

    def pair(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.diameter, np.inf, 0.0)

    def stability_constant(self, n_particles: int) -> float:
        return 0.0

    def params(self) -> dict:
        return {"diameter": self.diameter}


@dataclass(frozen=True)
class LennardJones:
    """12-6 potential truncated and shifted so that W(r) = 0 for r >= cutoff."""

    well_depth: float = 1.0
    sigma: float = 1.0
    cutoff: float = 2.5
    name = "lennard_jones"

    def __post_init__(self):
        if not (self.well_depth > 0 and self.sigma > 0):
            raise DomainError("Lennard-Jones well depth and size must be positive")
        if not self.cutoff > 2.0 ** (1.0 / 6.0) * self.sigma:
            raise DomainError("cutoff must lie beyond the potential minimum")

    def untruncated(self, r):
        sr6 = (self.sigma / np.asarray(r, dtype=float)) ** 6
        return 4.0 * self.well_depth * (sr6 * sr6 - sr6)

    @property
    def shift(self) -> float:
        return float(self.untruncated(self.cutoff))

    @property
    def min_pair_energy(self) -> float:
        # shift < 0, so the shifted well is slightly shallower than well_depth
        return -self.well_depth - self.shift

    def pair(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            w = self.untruncated(r) - self.shift
        w = np.where(r == 0.0, np.inf, w)
        return np.where(r >= self.cutoff, 0.0, w)

    def stability_constant(self, n_particles: int) -> float:
        # every pair contributes at least min_pair_energy; tight for N <= 4
        return 0.5 * max(n_particles - 1, 0) * -self.min_pair_energy

    def params(self) -> dict:
        return {"well_depth": self.well_depth, "sigma": self.sigma, "cutoff": self.cutoff}


PairPotential = Union[Ideal, HardSphere, LennardJones]

POTENTIALS = {"ideal": Ideal, "hard_sphere": HardSphere, "lennard_jones": LennardJones}


def make_potential(name: str, **params) -> PairPotential:
    try:
        cls = POTENTIALS[name]
    except KeyError:
        raise UsageError(f"unknown potential {name!r}; expected one of {sorted(POTENTIALS)}")
    return cls(**params)


# ---------------------------------------------------------------------------
# Systems and phase points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SystemSpec:
    """N particles in the hard-walled cube [0, L]^3."""

    n_particles: int
    box_side: float
    potential: PairPotential = field(default_factory=Ideal)

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise DomainError("n_particles must be an integer >= 1")
        if not self.box_side > 0:
            raise DomainError("box_side must be positive")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "box_side", float(self.box_side))

    def volume(self) -> float:
        return self.box_side**3

    def density(self) -> float:
        return self.n_particles / self.volume()

    def log_box_measure(self) -> float:
        """ln(L^{3N} / N!)."""
        n = self.n_particles
        return 3 * n * math.log(self.box_side) - math.lgamma(n + 1)

    def lattice_configuration(self):
        """A non-overlapping configuration, or None if the lattice test finds none.

        Simple cubic packing with spacing sigma; pairs additionally use the
        box diagonal.  A None result is a certificate only for N = 2.
        """
        n, L = self.n_particles, self.box_side
        if not isinstance(self.potential, HardSphere):
            m = math.ceil(n ** (1 / 3))
            g = (np.arange(m) + 0.5) * L / m
            pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
            return pts[:n]
        s = self.potential.diameter
        if n == 1:
            return np.full((1, 3), 0.5 * L)
        if n == 2:
            if s > math.sqrt(3.0) * L:
                return None
            return np.array([[0.0, 0.0, 0.0], [L, L, L]])
        m = int(math.floor(L / s)) + 1
        if m**3 < n:
            return None
        g = np.arange(m) * s
        pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
        return pts[:n]

    def packing_feasible(self) -> bool:
        return self.lattice_configuration() is not None

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.name,
            "n_particles": self.n_particles,
            "box_side": self.box_side,
            **self.potential.params(),
        }


@dataclass(frozen=True)
class ThermoPoint:
    rho: float
    eps: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("density must be positive")


@dataclass(frozen=True)
class PhasePoint:
    momenta: np.ndarray
    positions: np.ndarray
    box_side: float

    def __post_init__(self):
        p = np.asarray(self.momenta, dtype=float).reshape(-1, 3)
        q = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if p.shape != q.shape:
            raise DomainError("momenta and positions must describe the same N")
        _check_inside(q, self.box_side)
        object.__setattr__(self, "momenta", p)
        object.__setattr__(self, "positions", q)

    def energy(self, spec: SystemSpec) -> float:
        return kinetic_energy(self.momenta) + config_energy(spec, self.positions)


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def _check_inside(q, L):
    if np.any(q < 0.0) or np.any(q > L):
        raise DomainError("position outside the box")


_PAIR_INDEX: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _PAIR_INDEX:
        ij = np.array(list(combinations(range(n), 2)), dtype=np.intp).reshape(-1, 2)
        _PAIR_INDEX[n] = (ij[:, 0], ij[:, 1])
    return _PAIR_INDEX[n]


def config_energies(spec: SystemSpec, positions: np.ndarray) -> np.ndarray:
    """Vectorised U for a batch of configurations of shape (M, N, 3)."""
    q = np.asarray(positions, dtype=float)
    if q.ndim != 3 or q.shape[1:] != (spec.n_particles, 3):
        raise DomainError(f"expected shape (M, {spec.n_particles}, 3), got {q.shape}")
    if isinstance(spec.potential, Ideal) or spec.n_particles < 2:
        return np.zeros(q.shape[0])
    i, j = pair_indices(spec.n_particles)
    r = np.sqrt(((q[:, i] - q[:, j]) ** 2).sum(-1))
    return spec.potential.pair(r).sum(-1)


def config_energy(spec: SystemSpec, positions) -> float:
    """Configurational energy; +inf signals a hard-core overlap."""
    q = np.asarray(positions, dtype=float).reshape(-1, 3)
    if q.shape[0] != spec.n_particles:
        raise DomainError(f"expected {spec.n_particles} positions, got {q.shape[0]}")
    _check_inside(q, spec.box_side)
    return float(config_energies(spec, q[None])[0])


def kinetic_energy(momenta) -> float:
    p = np.asarray(momenta, dtype=float).reshape(-1, 3)
    return 0.5 * float((p * p).sum())
