"""Run configuration: a sectioned TOML file, or a JSON sidecar from an earlier run.

Sections and keys::

    [model]       potential, n_particles, box_side, diameter, well_depth, sigma, cutoff
    [grid]        e_min, e_max, n_bins, energies
    [sampler]     SamplerParams fields, plus method
    [quadrature]  QuadratureSpec fields
    [tdl]         rho, eps, n_list, delta_e, delta_e_mode, grid_bins, grid_top
    [output]      directory, prefix
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .convolution import QuadratureSpec
from .core import MicroentError, SystemSpec, make_potential
from .dos import SamplerParams, ground_energy_bound
from .streams import resolve_seed

SECTIONS = {
    "model": {"potential", "n_particles", "box_side", "diameter", "well_depth", "sigma", "cutoff"},
    "grid": {"e_min", "e_max", "n_bins", "energies"},
    "sampler": {f.name for f in dataclasses.fields(SamplerParams)} | {"method"},
    "quadrature": {f.name for f in dataclasses.fields(QuadratureSpec)},
    "tdl": {"rho", "eps", "n_list", "delta_e", "delta_e_mode", "grid_bins", "grid_top"},
    "output": {"directory", "prefix"},
}
IGNORED_TOP = {"provenance"}


class ConfigError(MicroentError, ValueError):
    pass


@dataclass
class RunConfig:
    raw: dict
    model: dict
    grid: dict
    sampler: SamplerParams
    method: str
    quadrature: QuadratureSpec
    tdl: dict
    output: dict = field(default_factory=dict)

    def system(self) -> SystemSpec:
        m = dict(self.model)
        try:
            pot_name = m.pop("potential", "ideal")
            n = m.pop("n_particles")
            side = m.pop("box_side")
            return SystemSpec(n, side, make_potential(pot_name, **m))
        except KeyError as exc:
            raise ConfigError(f"model.{exc.args[0]}: required key missing")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}")

    def energy_grid(self, spec: SystemSpec) -> np.ndarray | None:
        g = self.grid
        if "energies" in g:
            return np.asarray(g["energies"], dtype=float)
        if not g:
            return None
        e_min = g.get("e_min", ground_energy_bound(spec))
        try:
            return np.linspace(float(e_min), float(g["e_max"]), int(g.get("n_bins", 40)) + 1)
        except KeyError:
            raise ConfigError("grid.e_max: required key missing")

    def output_stem(self, kind: str) -> Path:
        d = Path(self.output.get("directory", "."))
        d.mkdir(parents=True, exist_ok=True)
        return d / f"{self.output.get('prefix', 'microent')}_{kind}"

    def canonical(self) -> dict:
        """Sections as plain data, suitable for a sidecar that reloads as a config."""
        out = {k: v for k, v in self.raw.items() if k in SECTIONS}
        out["sampler"] = {**out.get("sampler", {}), **self.sampler.to_dict(), "method": self.method}
        out["quadrature"] = dataclasses.asdict(self.quadrature)
        return out


def parse_config(data: dict, source: str = "<config>") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a table")
    for key, val in data.items():
        if key in IGNORED_TOP:
            continue
        if key not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{key}]")
        if not isinstance(val, dict):
            raise ConfigError(f"{source}: [{key}] must be a table")
        for sub in val:
            if sub not in SECTIONS[key]:
                raise ConfigError(f"{source}: unknown key {key}.{sub}")
    samp = dict(data.get("sampler", {}))
    method = samp.pop("method", "auto")
    try:
        sampler = SamplerParams(**samp)
        sampler = dataclasses.replace(sampler, master_seed=resolve_seed(sampler.master_seed))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: sampler: {exc}")
    try:
        quad = QuadratureSpec(**data.get("quadrature", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: quadrature: {exc}")
    return RunConfig(data, dict(data.get("model", {})), dict(data.get("grid", {})), sampler, method,
                     quad, dict(data.get("tdl", {})), dict(data.get("output", {})))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}")
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}")
    return parse_config(data, str(path))
