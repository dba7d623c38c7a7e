"""Thermodynamic-limit sequences at fixed density and energy density."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import streams
from .convolution import DEFAULT_QUAD, QuadratureSpec, boltzmann_entropy, entropy_gap, quasi_entropy  # noqa: F401
from .core import Ideal, LennardJones, MicroentError, SystemSpec, ThermoPoint
from .dos import SamplerParams, build_config_dos, fmt, ground_energy_bound

CSV_HEADER = ["N", "volume", "s_boltzmann", "s_quasi", "s_regularized", "std_err", "error"]


@dataclass(frozen=True)
class DeltaERule:
    """Shell width: ``value * volume`` (mode "volume_fraction") or ``value`` ("absolute")."""

    value: float = 0.1
    mode: str = "volume_fraction"

    def __post_init__(self):
        if self.mode not in ("volume_fraction", "absolute"):
            raise ValueError("delta_e mode must be 'volume_fraction' or 'absolute'")
        if not self.value > 0:
            raise ValueError("delta_e must be positive")

    def width(self, volume: float) -> float:
        return self.value * volume if self.mode == "volume_fraction" else self.value


@dataclass
class CurveEntry:
    n: int
    volume: float
    s_boltzmann: float = math.nan
    s_quasi: float = math.nan
    s_regularized: float | None = None
    std_err: float = 0.0
    error: str | None = None


@dataclass
class EntropyCurve:
    point: ThermoPoint
    entries: list[CurveEntry]
    delta_e_rule: DeltaERule | None

    def ok_entries(self) -> list[CurveEntry]:
        return [e for e in self.entries if e.error is None]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for e in self.entries:
                reg = "" if e.s_regularized is None else fmt(e.s_regularized)
                w.writerow([e.n, fmt(e.volume), fmt(e.s_boltzmann), fmt(e.s_quasi), reg,
                            fmt(e.std_err), e.error or ""])


@dataclass(frozen=True)
class ModelTemplate:
    """Potential plus the recipe for the per-N energy grid of sampled models."""

    potential: object = field(default_factory=Ideal)
    grid_bins: int = 40
    grid_top: float = 1.0  # in units of N for sampled models

    def system(self, n: int, rho: float) -> SystemSpec:
        return SystemSpec(n, (n / rho) ** (1.0 / 3.0), self.potential)

    def grid(self, spec: SystemSpec, e_target: float):
        if isinstance(self.potential, LennardJones):
            e_g = ground_energy_bound(spec)
            top = max(e_target, self.grid_top * spec.n_particles)
            return np.linspace(e_g, top, self.grid_bins + 1)
        return np.array([0.0, max(e_target, 1.0)])


def _entry(template: ModelTemplate, point: ThermoPoint, n: int, params: SamplerParams,
           delta_rule: DeltaERule | None, quad: QuadratureSpec) -> CurveEntry:
    spec = template.system(n, point.rho)
    vol = spec.volume()
    entry = CurveEntry(n, vol)
    E = point.eps * vol
    try:
        if E <= ground_energy_bound(spec):
            raise MicroentError(f"energy {E} not above the ground bound at N={n}")
        sub = SamplerParams(**{**params.to_dict(), "master_seed": params.master_seed + n})
        dos = build_config_dos(spec, sub, template.grid(spec, E), threads=1)
        entry.s_boltzmann = boltzmann_entropy(E, dos, quad) / vol
        entry.s_quasi = quasi_entropy(E, dos, quad) / vol
        if delta_rule is not None:
            entry.s_regularized = quasi_entropy(E, dos, quad, delta_rule.width(vol)) / vol
        entry.std_err = dos.std_err_at(E) / vol
    except (MicroentError, ArithmeticError, ValueError) as exc:
        entry.error = f"{type(exc).__name__}: {exc}"
    return entry


def run_tdl_sequence(template: ModelTemplate, point: ThermoPoint, n_list, params: SamplerParams,
                     delta_rule: DeltaERule | None = DeltaERule(), quad: QuadratureSpec = DEFAULT_QUAD,
                     threads: int | None = None) -> EntropyCurve:
    """Per-volume S, S^- and shell entropies along cubes of side (N/rho)^(1/3).

    Entries are computed concurrently and returned ordered by N; a failing
    entry records its error and the sequence carries on.
    """
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be strictly increasing")
    entries = streams.ordered_map(lambda n: _entry(template, point, n, params, delta_rule, quad),
                                  ns, threads)
    return EntropyCurve(point, sorted(entries, key=lambda e: e.n), delta_rule)


def gap_per_volume(curve: EntropyCurve) -> list[tuple[float, float]]:
    return [(e.volume, e.s_boltzmann - e.s_quasi) for e in curve.ok_entries()]


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares exponent and prefactor of |y| = A x^k on log-log axes."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.abs(np.asarray(ys, dtype=float)))
    k, la = np.polyfit(lx, ly, 1)
    return float(k), float(math.exp(la))


def same_limit_constants(curve: EntropyCurve, last: int = 3) -> dict[str, list[float]]:
    """C = volume * |difference| for each pair of entropy variants over the largest sizes."""
    rows = curve.ok_entries()[-last:]
    out = {"boltzmann-quasi": [], "boltzmann-regularized": [], "quasi-regularized": []}
    for e in rows:
        out["boltzmann-quasi"].append(e.volume * abs(e.s_boltzmann - e.s_quasi))
        if e.s_regularized is not None:
            out["boltzmann-regularized"].append(e.volume * abs(e.s_boltzmann - e.s_regularized))
            out["quasi-regularized"].append(e.volume * abs(e.s_quasi - e.s_regularized))
    return out


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_curve(curve: EntropyCurve, stem, config: dict, quad: QuadratureSpec,
                params: SamplerParams) -> tuple[Path, Path]:
    stem = Path(stem)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    curve.to_csv(csv_path)
    side = dict(config)
    side["provenance"] = {
        "config_sha256": config_hash(config),
        "quadrature": asdict(quad),
        "sampler": params.to_dict(),
        "delta_e_rule": asdict(curve.delta_e_rule) if curve.delta_e_rule else None,
        "point": asdict(curve.point),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    json_path.write_text(json.dumps(side, indent=2, default=str))
    return csv_path, json_path

