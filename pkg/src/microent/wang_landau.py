"""Flat-histogram random walk over configurations in the hard-walled box.

The walk runs on macrostates ``[underflow] + bins + [overflow]``; optional end
states collect U below the first edge and U at or above the last edge
(including hard-core overlaps).  Because the end states close the partition,
``sum(exp(ln_g))`` is the full box measure, which fixes the normalisation.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

KIND_IDEAL, KIND_HARD_SPHERE, KIND_LJ = 0, 1, 2


@nb.njit(nogil=True, cache=True)
def _pair(r, kind, a, b, c, shift):
    if kind == KIND_IDEAL:
        return 0.0
    if kind == KIND_HARD_SPHERE:
        return np.inf if r < a else 0.0
    # a = well depth, b = sigma, c = cutoff
    if r >= c:
        return 0.0
    if r == 0.0:
        return np.inf
    sr6 = (b / r) ** 6
    return 4.0 * a * (sr6 * sr6 - sr6) - shift


@nb.njit(nogil=True, cache=True)
def _total_energy(pos, kind, a, b, c, shift):
    n = pos.shape[0]
    u = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            u += _pair(math.sqrt(dx * dx + dy * dy + dz * dz), kind, a, b, c, shift)
    return u


@nb.njit(nogil=True, cache=True)
def _macrostate(u, edges, has_under, has_over):
    """Index of the macrostate holding energy u, or -1 if it has none."""
    nb_ = edges.shape[0] - 1
    off = 1 if has_under else 0
    if u < edges[0]:
        return 0 if has_under else -1
    if u >= edges[nb_]:
        return off + nb_ if has_over else -1
    k = np.searchsorted(edges, u, side="right") - 1
    return off + k


@nb.njit(nogil=True, cache=True)
def wl_walk(pos, L, kind, a, b, c, shift, edges, has_under, has_over,
            step, flatness, log_f_final, max_sweeps, check_sweeps, seed):
    """Run one Wang-Landau walk in place on ``pos``.

    Returns (ln_g, converged, achieved_flatness, sweeps).
    """
    np.random.seed(seed)
    n = pos.shape[0]
    n_states = edges.shape[0] - 1 + (1 if has_under else 0) + (1 if has_over else 0)
    ln_g = np.zeros(n_states)
    hist = np.zeros(n_states)
    log_f = 1.0
    u = _total_energy(pos, kind, a, b, c, shift)
    s = _macrostate(u, edges, has_under, has_over)
    old = np.empty(3)
    sweeps = 0
    achieved = 0.0
    while log_f > log_f_final:
        if sweeps >= max_sweeps:
            return ln_g, False, achieved, sweeps
        for _ in range(check_sweeps):
            for _m in range(n):
                i = np.random.randint(n)
                inside = True
                for d in range(3):
                    old[d] = pos[i, d]
                    x = old[d] + step * (np.random.random() - 0.5)
                    if x < 0.0 or x > L:
                        inside = False
                    pos[i, d] = x
                accept = False
                if inside:
                    u_new = _total_energy(pos, kind, a, b, c, shift)
                    s_new = _macrostate(u_new, edges, has_under, has_over)
                    if s_new >= 0:
                        dg = ln_g[s] - ln_g[s_new]
                        if dg >= 0.0 or np.random.random() < math.exp(dg):
                            accept = True
                if accept:
                    u = u_new
                    s = s_new
                else:
                    for d in range(3):
                        pos[i, d] = old[d]
                ln_g[s] += log_f
                hist[s] += 1.0
        sweeps += check_sweeps
        mean = hist.mean()
        achieved = hist.min() / mean if mean > 0 else 0.0
        if achieved >= flatness:
            log_f *= 0.5
            hist[:] = 0.0
    return ln_g, True, achieved, sweeps


def potential_codes(potential) -> tuple[int, float, float, float, float]:
    from .core import HardSphere, Ideal, LennardJones

    if isinstance(potential, Ideal):
        return KIND_IDEAL, 0.0, 0.0, 0.0, 0.0
    if isinstance(potential, HardSphere):
        return KIND_HARD_SPHERE, potential.diameter, 0.0, 0.0, 0.0
    if isinstance(potential, LennardJones):
        return KIND_LJ, potential.well_depth, potential.sigma, potential.cutoff, potential.shift
    raise TypeError(f"unsupported potential {potential!r}")
