"""Configurational volume Omega_U(E) = (1/N!) Vol{q in box^N : U(q) < E}.

Three estimators produce tabulated :class:`ConfigDoS` objects:

* the ideal gas, exactly;
* uniform hit-or-miss sampling (hard spheres, spot checks for anything else);
* Wang-Landau flat-histogram sampling (Lennard-Jones, or any model).

Tabulated values carry the 1/N! factor.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp
from sklearn.isotonic import isotonic_regression

from . import streams
from .core import (
    DomainError,
    HardSphere,
    Ideal,
    LennardJones,
    LogValue,
    MicroentError,
    SystemSpec,
    UsageError,
    config_energies,
)
from .wang_landau import potential_codes, wl_walk

log = logging.getLogger(__name__)

CSV_HEADER = ["E", "log_omega_u", "is_zero", "std_err"]


class ConvergenceError(MicroentError, RuntimeError):
    def __init__(self, message, flatness):
        super().__init__(message)
        self.flatness = flatness


@dataclass(frozen=True)
class SamplerParams:
    master_seed: int = 20081011
    n_samples: int = 1_000_000
    n_streams: int = 8
    wl_flatness: float = 0.8
    wl_log_f_final: float = 1e-6
    wl_max_sweeps: int = 50_000_000
    wl_step: float = 0.5
    wl_check_sweeps: int = 1000

    def __post_init__(self):
        if self.n_samples < 1:
            raise UsageError("n_samples must be >= 1")
        if self.n_streams < 1:
            raise UsageError("n_streams must be >= 1")
        if not 0 < self.wl_flatness < 1:
            raise UsageError("wl_flatness must lie in (0, 1)")
        if not self.wl_log_f_final > 0:
            raise UsageError("wl_log_f_final must be positive")
        if self.wl_max_sweeps < 1 or self.wl_check_sweeps < 1:
            raise UsageError("sweep counts must be >= 1")
        if not self.wl_step > 0:
            raise UsageError("wl_step must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# ConfigDoS
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConfigDoS:
    """Tabulated ln Omega_U on an energy grid.

    Between nodes ln Omega_U is interpolated linearly.  Below the first
    nonzero node the volume is taken constant down to the previous node (or
    ``e_ground``) and zero beneath; above the last node it stays constant.
    The last rule is exact for bounded potentials only, so evaluate at
    energies inside the grid for Lennard-Jones.
    """

    spec: SystemSpec
    grid: np.ndarray
    log_omega_u: np.ndarray
    std_err: np.ndarray
    e_ground: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).copy()
        lo = np.asarray(self.log_omega_u, dtype=float).copy()
        err = np.asarray(self.std_err, dtype=float).copy()
        if grid.ndim != 1 or grid.size == 0 or lo.shape != grid.shape or err.shape != grid.shape:
            raise DomainError("grid, log_omega_u and std_err must be equal-length 1-d arrays")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if np.any(np.isnan(lo)) or np.any(lo == np.inf):
            raise DomainError("log_omega_u must be finite or -inf")
        if np.any(lo[1:] < lo[:-1]):
            raise DomainError("log_omega_u must be nondecreasing")
        if np.any(np.isfinite(lo[grid <= self.e_ground])):
            raise DomainError("entries at or below e_ground must be zero")
        bound = -self.spec.n_particles * self.spec.potential.stability_constant(self.spec.n_particles)
        if self.e_ground < bound - 1e-12 * max(1.0, abs(bound)):
            raise DomainError("e_ground violates the stability bound")
        err[~np.isfinite(lo)] = 0.0
        for a in (grid, lo, err):
            a.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "log_omega_u", lo)
        object.__setattr__(self, "std_err", err)
        object.__setattr__(self, "e_ground", float(self.e_ground))

    @property
    def is_zero(self) -> np.ndarray:
        return ~np.isfinite(self.log_omega_u)

    def entry(self, j: int) -> LogValue:
        return LogValue.from_log(self.log_omega_u[j])

    def first_nonzero(self) -> int | None:
        idx = np.flatnonzero(np.isfinite(self.log_omega_u))
        return int(idx[0]) if idx.size else None

    def effective_ground(self) -> float:
        """Energy below which Omega_U vanishes under the interpolation rule."""
        j = self.first_nonzero()
        if j is None:
            return math.inf
        return max(self.e_ground, self.grid[j - 1]) if j > 0 else self.e_ground

    def segments(self):
        """Pieces (lo, hi, ln value at lo, d ln/dE) covering (effective_ground, inf)."""
        j0 = self.first_nonzero()
        if j0 is None:
            return []
        g, lv = self.grid, self.log_omega_u
        out = []
        eg = self.effective_ground()
        if g[j0] > eg:
            out.append((eg, g[j0], lv[j0], 0.0))
        for j in range(j0, g.size - 1):
            out.append((g[j], g[j + 1], lv[j], (lv[j + 1] - lv[j]) / (g[j + 1] - g[j])))
        out.append((g[-1], math.inf, lv[-1], 0.0))
        return out

    def log_at(self, u):
        """ln Omega_U(u) (vectorised); -inf where the volume vanishes."""
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, -np.inf)
        for lo, hi, l0, beta in self.segments():
            m = (u > lo) & (u <= hi)
            out[m] = l0 + beta * (u[m] - lo)
        return out

    def std_err_at(self, u) -> float:
        """Largest tabulated standard error at nodes up to u (conservative)."""
        m = self.grid <= u
        j = self.first_nonzero()
        if j is not None and j < self.grid.size:
            m[j] = True
        return float(self.std_err[m].max()) if m.any() else 0.0

    # -- serialisation -----------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for e, lv, z, s in zip(self.grid, self.log_omega_u, self.is_zero, self.std_err):
                w.writerow([fmt(e), fmt(lv), int(z), fmt(s)])

    def sidecar(self, params: SamplerParams | None = None) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "e_ground": self.e_ground,
            "params": params.to_dict() if params else None,
            "seed": params.master_seed if params else None,
            "normalization_anchor": self.meta.get("anchor"),
            "meta": self.meta,
        }

    @classmethod
    def from_csv(cls, path, spec: SystemSpec, e_ground: float) -> "ConfigDoS":
        grid, lo, err = [], [], []
        with open(path, newline="") as fh:
            rows = csv.DictReader(fh)
            for row in rows:
                grid.append(float(row["E"]))
                lo.append(-math.inf if int(row["is_zero"]) else float(row["log_omega_u"]))
                err.append(float(row["std_err"]))
        return cls(spec, np.array(grid), np.array(lo), np.array(err), e_ground)

    def write(self, stem, params: SamplerParams | None = None) -> tuple[Path, Path]:
        stem = Path(stem)
        csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
        self.to_csv(csv_path)
        json_path.write_text(json.dumps(self.sidecar(params), indent=2, default=_json_default))
        return csv_path, json_path


def fmt(x: float) -> str:
    """Full-precision text for CSV output."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def make_monotone(log_omega, std_err=None):
    """Pool-adjacent-violators fit of the finite entries; returns (values, corrected)."""
    lo = np.asarray(log_omega, dtype=float).copy()
    fin = np.isfinite(lo)
    if np.all(lo[fin][1:] >= lo[fin][:-1]):
        return lo, False
    w = None
    if std_err is not None:
        s = np.asarray(std_err, dtype=float)[fin]
        if np.all(s > 0):
            w = 1.0 / s**2
    lo[fin] = np.maximum.accumulate(isotonic_regression(lo[fin], sample_weight=w, increasing=True))
    log.warning("isotonic correction applied to %d configurational volume entries", int(fin.sum()))
    return lo, True


# ---------------------------------------------------------------------------
# Exact and bound results
# ---------------------------------------------------------------------------


def ground_energy_bound(spec: SystemSpec) -> float:
    """Certified E_g with Omega_U(E) = 0 for E <= E_g."""
    n = spec.n_particles
    if isinstance(spec.potential, (Ideal, HardSphere)):
        return 0.0
    return -n * spec.potential.stability_constant(n)


def log_omega_u_ideal(E: float, spec: SystemSpec) -> LogValue:
    if not isinstance(spec.potential, Ideal):
        raise UsageError("log_omega_u_ideal needs an ideal-gas system")
    if E <= 0:
        return LogValue.zero()
    return LogValue.from_log(spec.log_box_measure())


def ideal_dos(spec: SystemSpec, e_max: float = 1.0) -> ConfigDoS:
    if not isinstance(spec.potential, Ideal):
        raise UsageError("ideal_dos needs an ideal-gas system")
    c = spec.log_box_measure()
    return ConfigDoS(spec, np.array([0.0, e_max]), np.array([-np.inf, c]), np.zeros(2), 0.0,
                     meta={"method": "exact", "anchor": c})


# ---------------------------------------------------------------------------
# Uniform hit-or-miss sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FractionEstimate:
    estimate: float
    std_err: float
    hits: int
    n_samples: int

    @property
    def zero_hits(self) -> bool:
        return self.hits == 0

    def log_omega_u(self, spec: SystemSpec) -> tuple[LogValue, float]:
        """(ln Omega_U, standard error of the log); zero when no hits."""
        if self.zero_hits:
            return LogValue.zero(), 0.0
        p = self.estimate
        return (LogValue.from_log(spec.log_box_measure() + math.log(p)),
                math.sqrt((1 - p) / (p * self.n_samples)))


_CHUNK = 65536


def _count_below(spec, energies, n, rng) -> np.ndarray:
    """Counts of uniform configurations with U < each energy."""
    counts = np.zeros(len(energies), dtype=np.int64)
    energies = np.asarray(energies, dtype=float)
    left = n
    while left > 0:
        m = min(left, _CHUNK)
        q = rng.random((m, spec.n_particles, 3)) * spec.box_side
        u = np.sort(config_energies(spec, q))
        counts += np.searchsorted(u, energies, side="left")
        left -= m
    return counts


def _stream_counts(spec, energies, params, threads):
    gens = streams.stream_generators(params.master_seed, params.n_streams)
    sizes = streams.split_count(params.n_samples, params.n_streams)
    parts = streams.ordered_map(lambda k: _count_below(spec, energies, sizes[k], gens[k]),
                                list(range(params.n_streams)), threads)
    # integer sums: order-independent
    return np.sum(parts, axis=0)


def estimate_accessible_fraction(spec: SystemSpec, E: float, params: SamplerParams,
                                 threads: int | None = None) -> FractionEstimate:
    """Unbiased estimate of Vol{U < E} / L^{3N} with its binomial standard error."""
    if not math.isfinite(E):
        raise DomainError("energy must be finite")
    if isinstance(spec.potential, Ideal):
        return FractionEstimate(1.0 if E > 0 else 0.0, 0.0, params.n_samples if E > 0 else 0,
                                params.n_samples)
    hits = int(_stream_counts(spec, [E], params, threads)[0])
    n = params.n_samples
    p = hits / n
    return FractionEstimate(p, math.sqrt(p * (1 - p) / n), hits, n)


def uniform_dos(spec: SystemSpec, grid, params: SamplerParams, threads: int | None = None) -> ConfigDoS:
    """ln Omega_U at every grid energy from one shared set of uniform samples.

    Zero-hit entries above the ground bound are recorded in ``meta`` so that
    callers can defer them to Wang-Landau.
    """
    grid = np.asarray(grid, dtype=float)
    e_g = ground_energy_bound(spec)
    n = params.n_samples
    counts = _stream_counts(spec, grid, params, threads)
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.where(counts > 0, spec.log_box_measure() + np.log(p), -np.inf)
        err = np.where(counts > 0, np.sqrt((1 - p) / (p * n)), 0.0)
    lo[grid <= e_g] = -np.inf
    deferred = [float(e) for e, c in zip(grid, counts) if c == 0 and e > e_g]
    return ConfigDoS(spec, grid, lo, err, e_g,
                     meta={"method": "uniform", "anchor": spec.log_box_measure(),
                           "hits": counts.tolist(), "deferred_to_wang_landau": deferred})


def hard_sphere_dos(spec: SystemSpec, params: SamplerParams, e_max: float = 1.0,
                    threads: int | None = None) -> ConfigDoS:
    """Two-level step: zero for E <= 0, the accessible volume above."""
    if not isinstance(spec.potential, HardSphere):
        raise UsageError("hard_sphere_dos needs a hard-sphere system")
    fe = estimate_accessible_fraction(spec, e_max, params, threads)
    lv, err = fe.log_omega_u(spec)
    return ConfigDoS(spec, np.array([0.0, e_max]), np.array([-np.inf, lv.log_magnitude]),
                     np.array([0.0, err]), 0.0,
                     meta={"method": "hit_fraction", "anchor": spec.log_box_measure(),
                           "fraction": fe.estimate, "fraction_std_err": fe.std_err})


# ---------------------------------------------------------------------------
# Wang-Landau
# ---------------------------------------------------------------------------


def _macrostate_layout(spec: SystemSpec, edges: np.ndarray, e_g: float) -> tuple[bool, bool]:
    if isinstance(spec.potential, Ideal) or spec.n_particles < 2:
        # U == 0 identically
        return bool(edges[0] > 0), bool(edges[-1] <= 0)
    return bool(edges[0] > e_g), True


def _start_configuration(spec, edges, has_under, has_over, rng, tries=100_000):
    from .wang_landau import _macrostate

    for _ in range(tries):
        q = rng.random((spec.n_particles, 3)) * spec.box_side
        u = float(config_energies(spec, q[None])[0])
        if _macrostate(u, edges, has_under, has_over) >= 0:
            return q
    raise UsageError("could not find a starting configuration inside the energy window")


def wang_landau_dos(spec: SystemSpec, u_grid, params: SamplerParams,
                    threads: int | None = None) -> ConfigDoS:
    """Cumulative Omega_U at the bin edges of ``u_grid`` from flat-histogram walks.

    Each of ``n_streams`` independent walks yields ln g per macrostate; it is
    normalised so the total equals ln(L^{3N}/N!), summed into the cumulative
    volume at the upper edges, and the streams are averaged in stream order.
    The spread over streams gives the standard error.
    """
    edges = np.asarray(u_grid, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise UsageError("u_grid must hold at least two increasing bin edges")
    e_g = ground_energy_bound(spec)
    if edges[1] <= e_g:
        raise UsageError("the first bin lies entirely below the ground-energy bound")
    has_under, has_over = _macrostate_layout(spec, edges, e_g)
    kind, a, b, c, shift = potential_codes(spec.potential)
    seeds = streams.stream_uint32(params.master_seed, params.n_streams)
    gens = streams.stream_generators(params.master_seed, params.n_streams)
    anchor = spec.log_box_measure()
    nbins = edges.size - 1

    def walk(k):
        q0 = _start_configuration(spec, edges, has_under, has_over, gens[k])
        ln_g, ok, flat, sweeps = wl_walk(
            q0, spec.box_side, kind, a, b, c, shift, edges, has_under, has_over,
            params.wl_step, params.wl_flatness, params.wl_log_f_final,
            params.wl_max_sweeps, params.wl_check_sweeps, seeds[k])
        if not ok:
            raise ConvergenceError(
                f"Wang-Landau stream {k} not flat after {sweeps} sweeps "
                f"(achieved flatness {flat:.3f})", flat)
        ln_g = ln_g - logsumexp(ln_g) + anchor
        off = 1 if has_under else 0
        cum = np.logaddexp.accumulate(ln_g)
        # node values at edges[0..nbins]
        nodes = np.empty(nbins + 1)
        nodes[0] = cum[0] if has_under else -np.inf
        nodes[1:] = cum[off:off + nbins]
        return nodes, float(ln_g[-1]) if has_over else -np.inf

    results = streams.ordered_map(walk, list(range(params.n_streams)), threads)
    nodes = np.array([r[0] for r in results])
    fin = np.all(np.isfinite(nodes), axis=0)
    mean = np.full(nbins + 1, -np.inf)
    err = np.zeros(nbins + 1)
    mean[fin] = nodes[:, fin].mean(axis=0)
    if params.n_streams > 1:
        err[fin] = nodes[:, fin].std(axis=0, ddof=1) / math.sqrt(params.n_streams)
    else:
        err[fin] = np.nan
    mean[edges <= e_g] = -np.inf
    mean, corrected = make_monotone(mean, err)
    overflow = [r[1] for r in results]
    return ConfigDoS(spec, edges, mean, err, e_g,
                     meta={"method": "wang_landau", "anchor": anchor,
                           "underflow_state": has_under, "overflow_state": has_over,
                           "log_overflow_volume": float(np.mean(overflow)),
                           "isotonic_corrected": corrected})


def build_config_dos(spec: SystemSpec, params: SamplerParams, u_grid=None, method: str = "auto",
                     threads: int | None = None) -> ConfigDoS:
    """Dispatch to the estimator suited to the model."""
    pot = spec.potential
    if method == "auto":
        method = {Ideal: "exact", HardSphere: "hit_fraction", LennardJones: "wang_landau"}[type(pot)]
    e_max = float(np.max(u_grid)) if u_grid is not None and np.size(u_grid) else 1.0
    if method == "exact":
        return ideal_dos(spec, e_max=max(e_max, 1e-300))
    if method == "hit_fraction":
        return hard_sphere_dos(spec, params, e_max=max(e_max, 1e-300), threads=threads)
    if u_grid is None:
        raise UsageError(f"method {method!r} needs an energy grid")
    if method == "uniform":
        return uniform_dos(spec, u_grid, params, threads)
    if method == "wang_landau":
        return wang_landau_dos(spec, u_grid, params, threads)
    raise UsageError(f"unknown estimator {method!r}")
