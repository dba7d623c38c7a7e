"""Brute-force reference estimators for tiny systems.

Nothing here calls into the convolution engine or the density-of-states
estimators: Gamma functions come from :mod:`math`, quadrature from
Gauss-Legendre nodes, and sampling from freshly seeded generators.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .core import HardSphere, Ideal, LennardJones, LogValue, MicroentError, SystemSpec, config_energies
from .dos import SamplerParams


class UnsupportedSizeError(MicroentError, ValueError):
    pass


class DegenerateEstimateError(MicroentError, ArithmeticError):
    pass


def _log_ball(n: int, E: float) -> float:
    """ln volume of {p in R^{3N}: |p|^2/2 < E}."""
    d = 3 * n
    return 0.5 * d * math.log(2 * math.pi * E) - math.lgamma(0.5 * d + 1)


def _pair_breakpoints(potential, E: float) -> list[float]:
    """Radii where (E - W(r))_+ loses smoothness."""
    if isinstance(potential, HardSphere):
        return [potential.diameter]
    if isinstance(potential, LennardJones):
        w = lambda r: float(potential.pair(r)) - E
        r_min = 2.0 ** (1 / 6) * potential.sigma
        pts = [potential.cutoff]
        lo = 1e-3 * potential.sigma
        if w(r_min) < 0:
            pts.append(brentq(w, lo, r_min, xtol=1e-15, rtol=1e-15))
            if E < 0:
                pts.append(brentq(w, r_min, potential.cutoff, xtol=1e-15, rtol=1e-15))
        return pts
    return []


def direct_phase_volume(spec: SystemSpec, E: float, resolution: int = 32) -> float:
    """(1/N!) Vol{H < E} by brute-force position quadrature, N <= 2.

    The momentum ball is integrated analytically at every position, leaving
    (1/N!) integral ball(E - U(q)) d^{3N}q.  For a pair the integrand depends
    on the separation only; the separation is integrated against the cube's
    overlap volume prod(L - |d_k|) on the pyramid d3 >= d1, d2 (times 24 by
    symmetry), with Gauss-Legendre nodes in every coordinate and the radial
    direction split wherever the integrand has a kink or jump.
    """
    n = spec.n_particles
    if n > 2:
        raise UnsupportedSizeError("direct phase volume supports N <= 2 only")
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    if E <= 0 and not isinstance(spec.potential, LennardJones):
        return 0.0
    L = spec.box_side
    if n == 1:
        return L**3 * math.exp(_log_ball(1, E)) if E > 0 else 0.0

    x, w = np.polynomial.legendre.leggauss(resolution)
    st = 0.5 * (x + 1.0)
    sw = 0.5 * w
    s, t = np.meshgrid(st, st, indexing="ij")
    ws = np.outer(sw, sw)
    rho = np.sqrt(1.0 + s * s + t * t)  # |d| = z * rho
    breaks = sorted(b for b in _pair_breakpoints(spec.potential, E) if b > 0)
    log_coef = _log_ball(2, 1.0)  # ball(E') = coef * E'^3
    total = 0.0
    for i in range(resolution):
        for j in range(resolution):
            r_end = L * rho[i, j]
            cuts = [0.0] + [b / rho[i, j] for b in breaks if b < r_end] + [L]
            acc = 0.0
            for z0, z1 in zip(cuts[:-1], cuts[1:]):
                z = z0 + (z1 - z0) * st
                r = z * rho[i, j]
                with np.errstate(over="ignore", invalid="ignore"):
                    e_kin = E - spec.potential.pair(r)
                e_kin = np.where(np.isfinite(e_kin) & (e_kin > 0), e_kin, 0.0)
                f = e_kin**3 * z * z * (L - s[i, j] * z) * (L - t[i, j] * z) * (L - z)
                acc += (z1 - z0) * float(np.dot(sw, f))
            total += ws[i, j] * acc
    # 8 octants x 3 pyramids, and 1/2! for identical particles
    return 24.0 * total * math.exp(log_coef) / 2.0


def mollified_delta_estimate(spec: SystemSpec, E: float, width: float,
                             params: SamplerParams) -> tuple[LogValue, float]:
    """Monte Carlo of (1/N!) integral delta_w(E - H) d^{6N}X with a Gaussian delta_w.

    Positions are drawn uniformly and the momentum integral is done exactly,
    so each sample contributes Omega_K'(E - U - xi) with xi ~ Normal(0, width).
    Returns (estimate, standard error of its log).
    """
    if not width > 0:
        raise ValueError("width must be positive")
    n = spec.n_particles
    if n > 10:
        raise UnsupportedSizeError("mollified estimate is meant for N <= 10")
    power = 1.5 * n - 1
    log_pref = 1.5 * n * math.log(2 * math.pi) - math.lgamma(1.5 * n)
    log_box = 3 * n * math.log(spec.box_side) - math.lgamma(n + 1)
    seqs = np.random.SeedSequence([params.master_seed, 0x6d6f6c]).spawn(params.n_streams)
    base, extra = divmod(params.n_samples, params.n_streams)
    chunks = []
    for k, seq in enumerate(seqs):
        rng = np.random.default_rng(seq)
        m = base + (1 if k < extra else 0)
        if isinstance(spec.potential, Ideal) or n < 2:
            u = np.zeros(m)
        else:
            u = np.empty(m)
            for a in range(0, m, 65536):
                b = min(m, a + 65536)
                u[a:b] = config_energies(spec, rng.random((b - a, n, 3)) * spec.box_side)
        xi = rng.normal(0.0, width, m)
        e_kin = E - u - xi
        with np.errstate(divide="ignore", invalid="ignore"):
            chunks.append(np.where(e_kin > 0, power * np.log(e_kin), -np.inf))
    lw = np.concatenate(chunks)
    if np.isnan(lw).any():
        raise DegenerateEstimateError("non-numeric sample weights")
    if not np.isfinite(lw).any():
        return LogValue.zero(), 0.0
    top = lw[np.isfinite(lw)].max()
    wts = np.exp(lw - top)
    mean = wts.mean()
    err = wts.std(ddof=1) / (mean * math.sqrt(wts.size)) if wts.size > 1 else math.inf
    return LogValue.from_log(log_box + log_pref + top + math.log(mean)), float(err)


def finite_difference_check(f: Callable[[float], LogValue], f_prime: Callable[[float], LogValue],
                            E: float, h: float) -> float:
    """Relative residual |central difference of exp(f) - exp(f')| / exp(f').

    Absolute residual when the registered derivative is zero.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    fp, fm, d = f(E + h), f(E - h), f_prime(E)
    ref = d.log_magnitude if not d.is_zero else max(fp.log_magnitude, fm.log_magnitude)
    if ref == -math.inf:
        return 0.0
    cd = (math.exp(fp.log_magnitude - ref) - math.exp(fm.log_magnitude - ref)) / (2 * h)
    if d.is_zero:
        return abs(cd) * math.exp(ref)
    return abs(cd - 1.0)
