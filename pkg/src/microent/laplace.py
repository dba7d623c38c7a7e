"""Entropy densities in the thermodynamic limit.

The total entropy density is the supremum over the kinetic share of the
energy density of s_kin + s_int; s_int itself is extrapolated from
finite-N configurational volumes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DomainError, MicroentError, ThermoPoint
from .kinetic import s_kin

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitQualityError(MicroentError, ValueError):
    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SIntModel:
    """s_int(rho, .) at fixed rho with its lower energy-density boundary."""

    rho: float
    evaluator: Callable[[float], float]
    eps_lower: float = 0.0
    repaired: bool = False

    def __call__(self, eps: float) -> float:
        return self.evaluator(eps)

    @classmethod
    def ideal(cls, rho: float) -> "SIntModel":
        c = rho * (1.0 - math.log(rho))

        def s_int(eps):
            if eps <= 0:
                return -math.inf
            return c

        return cls(rho, s_int, 0.0)

    @classmethod
    def constant(cls, rho: float, value: float, eps_lower: float = 0.0) -> "SIntModel":
        return cls(rho, lambda eps: value if eps > eps_lower else -math.inf, eps_lower)

    @classmethod
    def from_table(cls, rho: float, eps: Sequence[float], s: Sequence[float],
                   eps_lower: float | None = None) -> "SIntModel":
        """Piecewise-linear interpolant; non-concave data is replaced by its concave hull."""
        e = np.asarray(eps, dtype=float)
        v = np.asarray(s, dtype=float)
        if e.size < 2 or np.any(np.diff(e) <= 0):
            raise DomainError("tabulated s_int needs >= 2 increasing energy densities")
        report = concavity_check(list(zip(e, v)), tol=0.0) if e.size >= 3 else None
        repaired = False
        if report is not None and not report.passed:
            hull = _upper_concave_hull(e, v)
            v = np.interp(e, e[hull], v[hull])
            repaired = True
            log.warning("s_int table was not concave; concave hull used (max second difference %.3g)",
                        report.max_second_difference)
        lower = e[0] if eps_lower is None else eps_lower

        def s_int(x):
            if x <= lower:
                return -math.inf
            return float(np.interp(x, e, v))

        return cls(rho, s_int, float(lower), repaired)


def _upper_concave_hull(x, y) -> list[int]:
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (y[b] - y[a]) * (x[i] - x[a]) <= (y[i] - y[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


# ---------------------------------------------------------------------------
# Extrapolation
# ---------------------------------------------------------------------------


@dataclass
class ExtrapolationDiagnostics:
    coefficients: tuple[float, float, float]
    residuals: np.ndarray
    rms_residual: float
    n_values: list[int] = field(default_factory=list)


def s_int_extrapolate(series, rho_tol: float = 1e-9, fit_tol: float = 1e-3):
    """Fit a_N = a_inf + b/N + c ln(N)/N to (N, volume, ln Omega_U) triples.

    a_N is ln Omega_U / volume.  Returns (a_inf, diagnostics).
    """
    data = sorted((int(n), float(v), float(lo)) for n, v, lo in series)
    if len(data) < 3:
        raise DomainError("need at least three system sizes")
    n = np.array([d[0] for d in data], dtype=float)
    vol = np.array([d[1] for d in data])
    rhos = n / vol
    if np.ptp(rhos) > rho_tol * max(1.0, abs(rhos[0])):
        raise DomainError("series must be at fixed density")
    a = np.array([d[2] for d in data]) / vol
    if not np.all(np.isfinite(a)):
        raise FitQualityError("non-finite configurational entropy in series", None)
    design = np.column_stack([np.ones_like(n), 1.0 / n, np.log(n) / n])
    coef, *_ = np.linalg.lstsq(design, a, rcond=None)
    resid = a - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    diag = ExtrapolationDiagnostics(tuple(float(c) for c in coef), resid, rms, [int(x) for x in n])
    if rms > fit_tol * max(1.0, abs(coef[0])):
        raise FitQualityError(f"extrapolation residual {rms:.3g} exceeds {fit_tol:g}", diag)
    return float(coef[0]), diag


# ---------------------------------------------------------------------------
# Variational supremum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: float
    boundary_supremum: bool = False


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 500):
    """Maximise a unimodal f on [lo, hi]; returns (x, f(x)) to bracket width tol."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def s_tot_sup(rho: float, eps: float, s_int_model: SIntModel, rel_margin: float = 1e-9,
              rel_tol: float = 1e-10) -> SupResult:
    """sup over kinetic share e of s_kin(rho, e) + s_int(rho, eps - e).

    The interval (0, eps - eps_lower) is open; the search runs on the interval
    shrunk by rel_margin * eps at both ends.  When the maximum sits at an end,
    the supremum is reported as the one-sided limit there (the term that stays
    continuous is evaluated at the end point itself) and flagged.
    """
    top = eps - s_int_model.eps_lower
    if not top > 0:
        raise DomainError(f"energy density {eps} is not above the lower boundary {s_int_model.eps_lower}")
    margin = rel_margin * abs(eps) if eps != 0 else rel_margin
    lo, hi = margin, top - margin
    if not hi > lo:
        raise DomainError("admissible interval is empty at this resolution")

    def objective(e):
        return s_kin(ThermoPoint(rho, e)) + s_int_model(eps - e)

    x, fx = golden_section_max(objective, lo, hi, rel_tol * abs(eps) if eps else rel_tol)
    width = hi - lo
    near = 1e-6 * width
    if x >= hi - near and objective(hi) >= fx:
        # s_kin is continuous at the upper end; s_int is taken at its right limit
        value = s_kin(ThermoPoint(rho, top)) + s_int_model(eps - hi)
        return SupResult(value, top, True)
    if x <= lo + near and objective(lo) >= fx:
        return SupResult(objective(lo), 0.0, True)
    return SupResult(fx, x, False)


# ---------------------------------------------------------------------------
# Concavity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcavityReport:
    max_second_difference: float
    max_negative_first_difference: float
    passed: bool


def concavity_check(values, tol: float) -> ConcavityReport:
    """Slope-difference test for concavity and a first-difference test for increase."""
    pts = [(float(e), float(s)) for e, s in values]
    if len(pts) < 3:
        raise DomainError("concavity check needs >= 3 points")
    e = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    if np.any(np.diff(e) <= 0):
        raise DomainError("energies must be strictly increasing")
    ds = np.diff(s)
    slopes = ds / np.diff(e)
    second = float(np.max(np.diff(slopes)))
    neg_first = float(np.max(-ds))
    return ConcavityReport(second, neg_first, second <= tol and neg_first <= tol)
