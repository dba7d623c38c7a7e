"""Self-verification suite behind ``microent verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .convolution import (
    QuadratureSpec,
    boltzmann_entropy,
    entropy_gap,
    entropy_via_psi_prime,
    log_omega_h,
    log_omega_h_prime,
    power_convolution_identity_check,
    quasi_entropy,
    quasi_entropy_via_psi,
)
from .core import HardSphere, LennardJones, SystemSpec, ThermoPoint
from .dos import SamplerParams, ground_energy_bound, hard_sphere_dos, ideal_dos, wang_landau_dos
from .kinetic import log_omega_k, log_omega_k_double_prime, log_omega_k_prime, s_kin
from .laplace import SIntModel, s_tot_sup
from .oracle import direct_phase_volume, finite_difference_check, mollified_delta_estimate


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _ideal_closed(spec: SystemSpec, E: float, prime: bool) -> float:
    n = spec.n_particles
    h = 1.5 * n
    if prime:
        return spec.log_box_measure() + h * math.log(2 * math.pi) - gammaln(h) + (h - 1) * math.log(E)
    return spec.log_box_measure() + h * math.log(2 * math.pi) - gammaln(h + 1) + h * math.log(E)


def check_kinetic_chain(ns=(1, 2, 5, 50, 1000)) -> Check:
    worst = 0.0
    for n in ns:
        for E in np.logspace(-2, 2, 20):
            # truncation grows like (power * h / E)^2, so shrink the step with the power
            h = 1e-5 * E / max(1.0, 1.5 * n)
            worst = max(worst,
                        finite_difference_check(lambda e: log_omega_k(e, n), lambda e: log_omega_k_prime(e, n), E, h),
                        finite_difference_check(lambda e: log_omega_k_prime(e, n),
                                                lambda e: log_omega_k_double_prime(e, n), E, h))
    return Check("kinetic derivative chain", worst < 1e-6, f"max relative residual {worst:.2e}")


def check_ideal_pipeline(quad: QuadratureSpec) -> Check:
    worst = 0.0
    for n in (1, 2, 5, 10):
        spec = SystemSpec(n, 1.7)
        dos = ideal_dos(spec)
        for E in np.linspace(0.1, 10, 12):
            worst = max(worst,
                        abs(log_omega_h(E, dos, quad).log_magnitude - _ideal_closed(spec, E, False)),
                        abs(log_omega_h_prime(E, dos, quad).log_magnitude - _ideal_closed(spec, E, True)))
    return Check("ideal-gas closed forms", worst < 1e-6, f"max log error {worst:.2e}")


def _test_models(quick: bool, threads):
    params = SamplerParams(n_samples=200_000 if quick else 2_000_000, n_streams=4,
                           wl_log_f_final=1e-3 if quick else 1e-5)
    ideal = ideal_dos(SystemSpec(3, 2.0))
    hs = hard_sphere_dos(SystemSpec(4, 4.0, HardSphere(1.0)), params, threads=threads)
    lj_spec = SystemSpec(3, 4.0, LennardJones())
    lj = wang_landau_dos(lj_spec, np.linspace(ground_energy_bound(lj_spec), 1.0, 25), params, threads)
    return {"ideal": (ideal, 2.0), "hard_sphere": (hs, 2.0), "lennard_jones": (lj, 0.0)}


def check_paths(models, quad) -> Check:
    worst = 0.0
    for dos, E in models.values():
        worst = max(worst,
                    abs(boltzmann_entropy(E, dos, quad, check_paths=False) - entropy_via_psi_prime(E, dos, quad)),
                    abs(quasi_entropy(E, dos, quad) - quasi_entropy_via_psi(E, dos, quad)))
    tol = 1e-8 + quad.tolerance
    return Check("representation paths agree", worst <= tol, f"max difference {worst:.2e} (tol {tol:.1e})")


def check_power_identity(models, quad) -> Check:
    ok, parts = True, []
    for name, (dos, E) in models.items():
        P = 1.5 * dos.spec.n_particles
        r1 = power_convolution_identity_check(dos, E, P, quad)
        if name == "ideal":
            good = r1 < 1e-10
        elif name == "hard_sphere":
            good = r1 < 1e-6
        else:
            r4 = power_convolution_identity_check(dos, E, P, quad.refined(4))
            good = r1 < 10 * quad.tolerance and (r4 <= r1 / 4 or r4 < 1e-12)
        ok &= good
        parts.append(f"{name} {r1:.1e}")
    return Check("power integration-by-parts identity", ok, ", ".join(parts))


def check_gap(quad) -> Check:
    worst = 0.0
    for n in (1, 2, 5, 10, 40):
        dos = ideal_dos(SystemSpec(n, 1.3))
        for E in (0.5, 1.0, 7.0, 15.0):
            worst = max(worst, abs(entropy_gap(E, dos, quad) - math.log(1.5 * n / E)))
    return Check("ideal entropy gap ln(3N/2E)", worst <= 1e-8, f"max error {worst:.2e}")


def check_fd_pipeline(quad) -> Check:
    dos = ideal_dos(SystemSpec(2, 1.0))
    r = finite_difference_check(lambda e: log_omega_h(e, dos, quad), lambda e: log_omega_h_prime(e, dos, quad),
                                1.0, 1e-5)
    return Check("d/dE ln Omega_H matches structure function", r < 1e-5, f"relative residual {r:.2e}")


def check_oracle(quad, quick, threads) -> Check:
    parts, ok = [], True
    for n in (1, 2):
        spec = SystemSpec(n, 1.0)
        ref = direct_phase_volume(spec, 0.5, 16)
        got = math.exp(log_omega_h(0.5, ideal_dos(spec), quad).log_magnitude)
        ok &= abs(got / ref - 1) < 1e-10
        parts.append(f"ideal N={n} {abs(got / ref - 1):.1e}")
    spec = SystemSpec(2, 2.0, HardSphere(1.0))
    params = SamplerParams(n_samples=200_000 if quick else 4_000_000, n_streams=4)
    dos = hard_sphere_dos(spec, params, threads=threads)
    ref = direct_phase_volume(spec, 1.0, 32)
    got = log_omega_h(1.0, dos, quad).log_magnitude
    z = abs(got - math.log(ref)) / dos.std_err[-1]
    ok &= z < 3
    parts.append(f"hard-sphere N=2 {z:.1f} sigma")
    if not quick:
        spec = SystemSpec(2, 4.0, LennardJones())
        grid = np.linspace(ground_energy_bound(spec), 1.0, 31)
        dos = wang_landau_dos(spec, grid, SamplerParams(n_streams=8, wl_log_f_final=1e-5), threads)
        for E in (-0.5, 1.0):
            got = log_omega_h(E, dos, quad).log_magnitude
            z = abs(got - math.log(direct_phase_volume(spec, E, 32))) / max(dos.std_err_at(E), 1e-12)
            ok &= z < 3
            parts.append(f"LJ N=2 E={E:g} {z:.1f} sigma")
    return Check("brute-force phase volume", ok, ", ".join(parts))


def check_mollified(quad, quick) -> Check:
    spec = SystemSpec(3, 1.0)
    target = log_omega_h_prime(1.0, ideal_dos(spec), quad).log_magnitude
    params = SamplerParams(n_samples=200_000 if quick else 1_000_000, n_streams=4)
    errs = []
    for w in (0.1, 0.05, 0.025):
        est, _ = mollified_delta_estimate(spec, 1.0, w, params)
        errs.append(abs(est.log_magnitude - target) / abs(target))
    ok = errs[-1] < 0.01 and errs[-1] < errs[0]
    return Check("smoothed-delta Monte Carlo", ok, "relative errors " + ", ".join(f"{e:.1e}" for e in errs))


def check_laplace() -> Check:
    res = s_tot_sup(1.0, 1.0, SIntModel.ideal(1.0))
    ref = 1.0 + s_kin(ThermoPoint(1.0, 1.0))
    return Check("variational supremum (ideal)", abs(res.value - ref) <= 1e-9 and res.boundary_supremum,
                 f"{res.value:.12f} vs {ref:.12f}")


def run_checks(quick: bool = False, threads: int | None = None) -> list[Check]:
    quad = QuadratureSpec()
    models = _test_models(quick, threads)
    return [
        check_kinetic_chain(),
        check_ideal_pipeline(quad),
        check_paths(models, quad),
        check_power_identity(models, quad),
        check_gap(quad),
        check_fd_pipeline(quad),
        check_oracle(quad, quick, threads),
        check_mollified(quad, quick),
        check_laplace(),
    ]
