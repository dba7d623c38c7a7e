"""Closed-form momentum-space structure functions of N free particles.

All Gamma functions go through ``gammaln`` so N in the millions is fine.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.special import gammaln

from .core import DomainError, LogValue, ThermoPoint


class KineticOrder(enum.Enum):
    PRIMITIVE = 0
    FIRST = 1
    SECOND = 2


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError("particle number must be an integer >= 1")


def log_kinetic_prefactor(n: int, order: KineticOrder) -> float:
    """ln of the coefficient c in c * E**power for the requested derivative order."""
    half = 1.5 * n
    base = half * math.log(2 * math.pi)
    if order is KineticOrder.PRIMITIVE:
        return base - gammaln(half + 1)
    if order is KineticOrder.FIRST:
        return base - gammaln(half)
    return base - gammaln(half) + math.log(half - 1)


def kinetic_power(n: int, order: KineticOrder) -> float:
    return 1.5 * n - order.value


def log_omega_k_order(E: float, n: int, order: KineticOrder) -> LogValue:
    _check_n(n)
    if E <= 0:
        return LogValue.zero()
    return LogValue.from_log(log_kinetic_prefactor(n, order) + kinetic_power(n, order) * math.log(E))


def log_omega_k(E: float, n: int) -> LogValue:
    """Momentum-ball volume {K < E} in 3N dimensions."""
    return log_omega_k_order(E, n, KineticOrder.PRIMITIVE)


def log_omega_k_prime(E: float, n: int) -> LogValue:
    return log_omega_k_order(E, n, KineticOrder.FIRST)


def log_omega_k_double_prime(E: float, n: int) -> LogValue:
    # for N = 1 the power is -1/2: integrable, handled by the convolution weights
    return log_omega_k_order(E, n, KineticOrder.SECOND)


def s_kin(point: ThermoPoint) -> float:
    rho, eps = point.rho, point.eps
    if not (rho > 0 and eps > 0):
        raise DomainError("s_kin needs rho > 0 and eps > 0")
    return 1.5 * rho * math.log(4 * math.pi * math.e / 3 * eps / rho)


def s_kin_array(rho: float, eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    return 1.5 * rho * np.log(4 * np.pi * np.e / 3 * eps / rho)
