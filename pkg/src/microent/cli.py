"""``microent`` command line.

Exit status: 0 on success, 1 when a numerical operation fails (the message
names it), 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .convolution import (
    boltzmann_entropy,
    entropy_via_psi_prime,
    quasi_entropy,
    quasi_entropy_via_psi,
)
from .core import MicroentError, ThermoPoint, UsageError, make_potential
from .dos import build_config_dos, fmt
from .kinetic import log_omega_k, log_omega_k_double_prime, log_omega_k_prime, s_kin
from .tdl import DeltaERule, ModelTemplate, config_hash, run_tdl_sequence, write_curve


class OperationError(Exception):
    def __init__(self, op: str, exc: BaseException):
        super().__init__(f"{op} failed: {type(exc).__name__}: {exc}")


def _run(op: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, UsageError):
        raise
    except (MicroentError, ArithmeticError, ValueError, RuntimeError) as exc:
        raise OperationError(op, exc) from exc


def _lv(x) -> str:
    return "-inf" if x.is_zero else fmt(x.log_magnitude)


def _provenance(cfg: RunConfig, threads) -> dict:
    return {
        "config_sha256": config_hash(cfg.canonical()),
        "version": __version__,
        "threads": threads,
        "created": datetime.now(timezone.utc).isoformat(),
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_kinetic(args) -> int:
    if args.n < 1 or args.points < 1:
        raise UsageError("--n and --points must be positive")
    if not 0 < args.emin <= args.emax:
        raise UsageError("need 0 < emin <= emax")
    energies = np.array([args.emin]) if args.points == 1 else np.linspace(args.emin, args.emax, args.points)
    vol = args.n / args.rho
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["E", "log_omega_k", "log_omega_k_prime", "log_omega_k_double_prime", "s_kin"])
    for E in energies:
        row = [fmt(E), _lv(log_omega_k(E, args.n)), _lv(log_omega_k_prime(E, args.n)),
               _lv(log_omega_k_double_prime(E, args.n)),
               fmt(s_kin(ThermoPoint(args.rho, E / vol)))]
        w.writerow(row)
    return 0


def _build_dos(cfg: RunConfig, method: str, threads):
    spec = cfg.system()
    grid = cfg.energy_grid(spec)
    return _run(f"dos ({method})", build_config_dos, spec, cfg.sampler, grid, method, threads)


def cmd_dos(args) -> int:
    cfg = load_config(args.config)
    methods = ["uniform", "wang_landau"] if cfg.method == "both" else [cfg.method]
    for method in methods:
        dos = _build_dos(cfg, method, args.threads)
        stem = cfg.output_stem("dos" if len(methods) == 1 else f"dos_{method}")
        csv_path = stem.with_suffix(".csv")
        dos.to_csv(csv_path)
        side = cfg.canonical()
        side["sampler"] = {**side["sampler"], "method": method}
        side["provenance"] = {**_provenance(cfg, args.threads), "dos": dos.sidecar(cfg.sampler)}
        stem.with_suffix(".json").write_text(json.dumps(side, indent=2, default=str))
        print(csv_path)
    return 0


def cmd_entropy(args) -> int:
    cfg = load_config(args.config)
    dos = _build_dos(cfg, cfg.method, args.threads)
    E, quad = args.energy, cfg.quadrature
    s = _run("boltzmann_entropy", boltzmann_entropy, E, dos, quad, check_paths=False)
    s_psi = _run("entropy_via_psi_prime", entropy_via_psi_prime, E, dos, quad)
    sq = _run("quasi_entropy", quasi_entropy, E, dos, quad)
    sq_psi = _run("quasi_entropy_via_psi", quasi_entropy_via_psi, E, dos, quad)
    reg = ""
    if args.delta_e is not None:
        reg = fmt(_run("quasi_entropy (shell)", quasi_entropy, E, dos, quad, args.delta_e))
    rows = [["E", "s_boltzmann", "s_boltzmann_psi", "s_quasi", "s_quasi_psi", "s_regularized", "gap",
             "std_err"],
            [fmt(E), fmt(s), fmt(s_psi), fmt(sq), fmt(sq_psi), reg, fmt(s - sq), fmt(dos.std_err_at(E))]]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerows(rows)
    if cfg.output:
        with open(cfg.output_stem("entropy").with_suffix(".csv"), "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    tol = 1e-8 + quad.tolerance
    if abs(s - s_psi) > tol or abs(sq - sq_psi) > tol:
        print(f"entropy: representation paths disagree beyond {tol:g}", file=sys.stderr)
        return 1
    return 0


def cmd_tdl(args) -> int:
    cfg = load_config(args.config)
    t = dict(cfg.tdl)
    try:
        point = ThermoPoint(float(t["rho"]), float(t["eps"]))
        n_list = [int(n) for n in t["n_list"]]
    except KeyError as exc:
        raise ConfigError(f"{args.config}: tdl.{exc.args[0]}: required key missing")
    m = {k: v for k, v in cfg.model.items() if k not in ("n_particles", "box_side")}
    try:
        pot = make_potential(m.pop("potential", "ideal"), **m)
        rule = None
        if t.get("delta_e") is not None:
            rule = DeltaERule(float(t["delta_e"]), t.get("delta_e_mode", "volume_fraction"))
        template = ModelTemplate(pot, int(t.get("grid_bins", 40)), float(t.get("grid_top", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{args.config}: {exc}")
    curve = _run("tdl sequence", run_tdl_sequence, template, point, n_list, cfg.sampler, rule,
                 cfg.quadrature, args.threads)
    csv_path, json_path = write_curve(curve, cfg.output_stem("tdl"), cfg.canonical(), cfg.quadrature,
                                      cfg.sampler)
    side = json.loads(json_path.read_text())
    side["provenance"]["threads"] = args.threads
    json_path.write_text(json.dumps(side, indent=2, default=str))
    print(csv_path)
    failed = [e for e in curve.entries if e.error]
    for e in failed:
        print(f"tdl: N={e.n}: {e.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_verify(args) -> int:
    from .verify import run_checks

    checks = run_checks(quick=args.quick, threads=args.threads)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}")
    n_ok = sum(c.passed for c in checks)
    print(f"{n_ok}/{len(checks)} checks passed")
    return 0 if n_ok == len(checks) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="microent", description="Microcanonical entropy toolkit.")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kinetic", help="kinetic phase volume and structure functions")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--emin", type=float, required=True)
    k.add_argument("--emax", type=float, required=True)
    k.add_argument("--points", type=int, default=20)
    k.add_argument("--rho", type=float, default=1.0, help="density used for the s_kin column")
    k.set_defaults(func=cmd_kinetic)

    d = sub.add_parser("dos", help="configurational density of states")
    d.add_argument("--config", required=True)
    d.set_defaults(func=cmd_dos)

    e = sub.add_parser("entropy", help="entropies at one energy")
    e.add_argument("--config", required=True)
    e.add_argument("--energy", type=float, required=True)
    e.add_argument("--delta-e", type=float, default=None)
    e.set_defaults(func=cmd_entropy)

    t = sub.add_parser("tdl", help="per-volume entropies along a sequence of cubes")
    t.add_argument("--config", required=True)
    t.set_defaults(func=cmd_tdl)

    v = sub.add_parser("verify", help="run the self-verification suite")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OperationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MicroentError, ArithmeticError) as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
