"""Log-domain convolutions of the configurational volume with kinetic power laws.

Every phase-space quantity here has the form

    c * integral_0^{E - E_g} x**a * G(E - x) dx,        a > -1,

with G either Omega_U or its Stieltjes density.  The quadrature integrates
the power ``x**a`` exactly on every panel (incomplete-beta moments) and
interpolates only G, which is smooth on each panel because panels never
straddle a node of the tabulated volume.  For a = 3N/2 - 2 < 0 (N = 1) the
integrable singularity at x = 0 therefore needs no special treatment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln, gammaln, logsumexp

from .core import DomainError, LogValue, MicroentError
from .dos import ConfigDoS
from .kinetic import KineticOrder, kinetic_power, log_kinetic_prefactor

RULES = ("trapezoid", "simpson")


class UndefinedEntropyError(MicroentError, ArithmeticError):
    pass


class DegenerateShellError(MicroentError, ArithmeticError):
    pass


class PathMismatchError(MicroentError, AssertionError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel rule for the convolution engine.

    Each tabulated interval is cut into ``refinement * max(1, ceil(dl / log_step))``
    panels, where dl is the change of ln Omega_U across it.
    """

    rule: str = "simpson"
    refinement: int = 8
    log_step: float = 0.5
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.rule not in RULES:
            raise DomainError(f"rule must be one of {RULES}")
        if int(self.refinement) != self.refinement or self.refinement < 1:
            raise DomainError("refinement must be an integer >= 1")
        if not self.log_step > 0:
            raise DomainError("log_step must be positive")

    def refined(self, factor: int) -> "QuadratureSpec":
        return QuadratureSpec(self.rule, self.refinement * factor, self.log_step, self.tolerance)


DEFAULT_QUAD = QuadratureSpec()


# ---------------------------------------------------------------------------
# Panel moments
# ---------------------------------------------------------------------------


def _log_moments(a: float, delta: np.ndarray, kmax: int) -> list[np.ndarray]:
    """ln of integral_0^delta (1 - w)**a * w**k dw for k = 0..kmax."""
    out = []
    for k in range(kmax + 1):
        with np.errstate(divide="ignore"):
            out.append(np.log(betainc(k + 1, a + 1, delta)) + betaln(k + 1, a + 1))
    return out


def _panel_terms(a, x_nodes, lg_nodes, rule):
    """Signed log terms of the product rule on one smooth piece.

    x_nodes ascending; lg_nodes = ln G at the nodes.
    Returns (log|weight * G|, sign) arrays; the integral is the signed sum of exp.
    """
    if rule == "trapezoid":
        x0, x1 = x_nodes[:-1], x_nodes[1:]
        g0, g1 = lg_nodes[:-1], lg_nodes[1:]
        delta = (x1 - x0) / x1
        m0, m1 = _log_moments(a, delta, 1)
        ld = np.log(delta)
        w_lo = m1 - ld
        # K0 - K1/delta = integral (1-w)^a (1 - w/delta) dw > 0
        w_hi = m0 + np.log(-np.expm1(w_lo - m0))
        base = (a + 1) * np.log(x1)
        logs = np.concatenate([base + w_hi + g1, base + w_lo + g0])
        return logs, np.ones_like(logs)
    xa, xc = x_nodes[0:-1:2], x_nodes[2::2]
    ga, gb, gc = lg_nodes[0:-1:2], lg_nodes[1::2], lg_nodes[2::2]
    delta = (xc - xa) / xc
    m = _log_moments(a, delta, 2)
    ld = np.log(delta)
    mu0, mu1, mu2 = np.exp(m[0] - m[0]), np.exp(m[1] - ld - m[0]), np.exp(m[2] - 2 * ld - m[0])
    # Lagrange weights on v = w / delta at v = 0 (xc), 1/2 (xb), 1 (xa), relative to K0
    wc = 2 * mu2 - 3 * mu1 + mu0
    wb = 4 * mu1 - 4 * mu2
    wa = 2 * mu2 - mu1
    base = (a + 1) * np.log(xc) + m[0]
    w = np.concatenate([wc, wb, wa])
    with np.errstate(divide="ignore"):
        logs = np.concatenate([base + gc, base + gb, base + ga]) + np.log(np.abs(w))
    return logs, np.sign(w)


def _n_panels(dl: float, quad: QuadratureSpec) -> int:
    n = quad.refinement * max(1, math.ceil(abs(dl) / quad.log_step))
    if quad.rule == "simpson" and n % 2:
        n += 1
    return n


def log_power_convolution(E: float, pieces, a: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """ln integral_0^inf x**a G(E - x) dx for G given by log-linear pieces.

    ``pieces`` is a sequence of (lo, hi, ln G(lo+), d ln G/du) with G = 0
    outside their union.  Returns -inf for an empty range.
    """
    if not a > -1:
        raise DomainError("power must exceed -1 for integrability")
    logs, signs = [], []
    for lo, hi, l0, beta in pieces:
        if lo >= E:
            break
        u_hi = min(hi, E)
        n = _n_panels(beta * (u_hi - lo), quad)
        u = lo + (u_hi - lo) * np.linspace(0.0, 1.0, n + 1)
        u[-1] = u_hi
        x = (E - u)[::-1]
        if u_hi == E:
            x[0] = 0.0
        lg = (l0 + beta * (u - lo))[::-1]
        lt, st = _panel_terms(a, x, lg, quad.rule)
        logs.append(lt)
        signs.append(st)
    if not logs:
        return -math.inf
    lt, st = np.concatenate(logs), np.concatenate(signs)
    keep = np.isfinite(lt) & (st != 0)
    if not keep.any():
        return -math.inf
    val, sign = logsumexp(lt[keep], b=st[keep], return_sign=True)
    if sign <= 0:
        raise ArithmeticError("quadrature produced a nonpositive integral; refine the grid")
    return float(val)


# ---------------------------------------------------------------------------
# Phase-space volumes and entropies
# ---------------------------------------------------------------------------


def _kinetic_convolution(E, dos: ConfigDoS, order: KineticOrder, quad) -> LogValue:
    n = dos.spec.n_particles
    if E <= dos.effective_ground():
        return LogValue.zero()
    lv = log_power_convolution(E, dos.segments(), kinetic_power(n, order), quad)
    if lv == -math.inf:
        return LogValue.zero()
    return LogValue.from_log(log_kinetic_prefactor(n, order) + lv)


def log_omega_h(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> LogValue:
    """ln Omega_H(E) = ln integral Omega_U(E - x) Omega_K'(x) dx."""
    return _kinetic_convolution(E, dos, KineticOrder.FIRST, quad)


def log_omega_h_prime(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> LogValue:
    """ln of the structure function, as integral Omega_U(E - x) Omega_K''(x) dx."""
    return _kinetic_convolution(E, dos, KineticOrder.SECOND, quad)


def log_unit_sphere_area(dim: int) -> float:
    """ln |S^{dim-1}| = ln 2 + (dim/2) ln pi - ln Gamma(dim/2)."""
    return math.log(2.0) + 0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim)


def log_psi(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> LogValue:
    """ln Psi(E) = ln (3N/2) integral_0 Omega_U(E - x) x**(3N/2 - 1) dx."""
    n = dos.spec.n_particles
    if E <= dos.effective_ground():
        return LogValue.zero()
    half = 1.5 * n
    lv = log_power_convolution(E, dos.segments(), half - 1, quad)
    return LogValue.from_log(math.log(half) + lv)


def log_psi_prime(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> LogValue:
    """ln Psi'(E) = ln (3N/2)(3N/2 - 1) integral_0 Omega_U(E - x) x**(3N/2 - 2) dx."""
    n = dos.spec.n_particles
    if E <= dos.effective_ground():
        return LogValue.zero()
    half = 1.5 * n
    lv = log_power_convolution(E, dos.segments(), half - 2, quad)
    return LogValue.from_log(math.log(half) + math.log(half - 1) + lv)


def _log_momentum_factor(n: int) -> float:
    """ln (2^{3N/2} / 3N) |S^{3N-1}|."""
    return 1.5 * n * math.log(2.0) - math.log(3 * n) + log_unit_sphere_area(3 * n)


def entropy_via_psi_prime(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    lp = log_psi_prime(E, dos, quad)
    if lp.is_zero:
        raise UndefinedEntropyError(f"structure function vanishes at E={E}")
    return _log_momentum_factor(dos.spec.n_particles) + lp.log_magnitude


def quasi_entropy_via_psi(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    lp = log_psi(E, dos, quad)
    if lp.is_zero:
        raise UndefinedEntropyError(f"phase volume vanishes at E={E}")
    return _log_momentum_factor(dos.spec.n_particles) + lp.log_magnitude


def boltzmann_entropy(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD,
                      check_paths: bool = True) -> float:
    """S(E) = ln Omega_H'(E), cross-checked against the Psi' representation."""
    lv = log_omega_h_prime(E, dos, quad)
    if lv.is_zero:
        raise UndefinedEntropyError(f"structure function vanishes at E={E}")
    s = lv.log_magnitude
    if check_paths:
        s_psi = entropy_via_psi_prime(E, dos, quad)
        if abs(s - s_psi) > 1e-8 + quad.tolerance:
            raise PathMismatchError(f"S paths disagree at E={E}: {s} vs {s_psi}")
    return s


def quasi_entropy(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD,
                  delta_e: float | None = None) -> float:
    """ln Omega_H(E), or ln(Omega_H(E) - Omega_H(E - delta_e)) for a shell."""
    hi = log_omega_h(E, dos, quad)
    if delta_e is None:
        if hi.is_zero:
            raise UndefinedEntropyError(f"phase volume vanishes at E={E}")
        return hi.log_magnitude
    if not delta_e > 0:
        raise DomainError("shell width must be positive")
    lo = log_omega_h(E - delta_e, dos, quad)
    if hi.is_zero or (not lo.is_zero and lo.log_magnitude >= hi.log_magnitude):
        raise DegenerateShellError(f"empty energy shell ({E - delta_e}, {E})")
    return hi.sub(lo).log_magnitude


def entropy_gap(E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """S(E) - S^-(E) = ln(Omega_H'(E) / Omega_H(E))."""
    return boltzmann_entropy(E, dos, quad, check_paths=False) - quasi_entropy(E, dos, quad)


# ---------------------------------------------------------------------------
# Integration-by-parts identity
# ---------------------------------------------------------------------------


def log_stieltjes_power(E: float, dos: ConfigDoS, P: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """ln integral (E - u)**P dOmega_U(u) over u < E, summed directly over the table.

    The jump at the effective ground contributes an atom; each log-linear
    piece contributes its density beta * Omega_U.
    """
    eg = dos.effective_ground()
    if E <= eg:
        return -math.inf
    segs = dos.segments()
    terms = [segs[0][2] + P * math.log(E - eg)]
    dens = [(lo, hi, l0 + math.log(beta), beta) for lo, hi, l0, beta in segs if beta > 0]
    if dens:
        terms.append(log_power_convolution(E, dens, P, quad))
    return float(logsumexp(terms))


def log_power_by_parts(E: float, dos: ConfigDoS, P: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """ln P integral_0^{E - E_g} x**(P - 1) Omega_U(E - x) dx."""
    if E <= dos.effective_ground():
        return -math.inf
    return math.log(P) + log_power_convolution(E, dos.segments(), P - 1, quad)


def power_convolution_identity_check(dos: ConfigDoS, E: float, P: float,
                                     quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """|ln LHS - ln RHS| of the power-P integration-by-parts identity."""
    if not P > 0:
        raise DomainError("P must be positive")
    if E <= dos.effective_ground():
        raise DomainError("E must lie above the ground energy")
    return abs(log_stieltjes_power(E, dos, P, quad) - log_power_by_parts(E, dos, P, quad))


def quadrature_error(fn, E: float, dos: ConfigDoS, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Change of a log-valued evaluator when the panels are halved."""
    a, b = fn(E, dos, quad), fn(E, dos, quad.refined(2))
    a = a.log_magnitude if isinstance(a, LogValue) else a
    b = b.log_magnitude if isinstance(b, LogValue) else b
    return abs(a - b)
