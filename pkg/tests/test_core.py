import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microent.core import (
    DomainError,
    HardSphere,
    Ideal,
    LennardJones,
    LogValue,
    PhasePoint,
    SystemSpec,
    config_energies,
    config_energy,
    make_potential,
)

logs = st.floats(min_value=-700, max_value=700, allow_nan=False)


@given(logs, logs)
def test_logvalue_add_commutes_and_matches_logaddexp(a, b):
    x, y = LogValue.from_log(a), LogValue.from_log(b)
    assert (x + y).log_magnitude == pytest.approx(np.logaddexp(a, b), rel=1e-14, abs=1e-12)
    assert (x + y).log_magnitude == (y + x).log_magnitude


@given(logs, logs)
def test_logvalue_sub_inverts_add(a, b):
    x, y = LogValue.from_log(a), LogValue.from_log(b)
    if b - a > 20:
        return
    back = (x + y).sub(y)
    # cancellation amplifies the rounding of ln(e^a + e^b) by e^(b - a)
    tol = 4e-16 * (1 + abs(a) + abs(b)) * (1 + math.exp(b - a)) + 1e-14
    assert back.log_magnitude == pytest.approx(a, abs=tol)


@given(logs)
def test_logvalue_zero_is_identity(a):
    x = LogValue.from_log(a)
    assert (x + LogValue.zero()) == x
    assert (x * LogValue.zero()).is_zero
    assert x.sub(x).is_zero


def test_logvalue_negative_difference_raises():
    with pytest.raises(ValueError):
        LogValue.from_log(1.0).sub(LogValue.from_log(2.0))
    with pytest.raises(ValueError):
        LogValue.from_value(-1.0)


def test_logvalue_scale():
    assert LogValue.from_value(3.0).scale(2.0).value() == pytest.approx(6.0)
    assert LogValue.from_value(3.0).scale(0.0).is_zero


def test_lj_pair_values():
    lj = LennardJones()
    assert lj.pair(2 ** (1 / 6)) == pytest.approx(lj.min_pair_energy)
    assert lj.pair(3.0) == 0.0
    assert lj.pair(lj.cutoff - 1e-12) == pytest.approx(0.0, abs=1e-9)
    assert lj.pair(0.0) == math.inf


def test_hard_sphere_pair():
    hs = HardSphere(1.0)
    assert hs.pair(0.99) == math.inf
    assert hs.pair(1.01) == 0.0


def test_make_potential_rejects_unknown():
    with pytest.raises(Exception):
        make_potential("yukawa")
    with pytest.raises(Exception):
        make_potential("lennard_jones", radius=1.0)


def test_system_validation():
    with pytest.raises(DomainError):
        SystemSpec(0, 1.0)
    with pytest.raises(DomainError):
        SystemSpec(2, -1.0)
    spec = SystemSpec(4, 2.0)
    assert spec.volume() == 8.0
    assert spec.log_box_measure() == pytest.approx(12 * math.log(2) - math.log(24))


def test_packing_certificate_for_pairs():
    assert SystemSpec(2, 1.0, HardSphere(1.7)).packing_feasible()
    assert not SystemSpec(2, 1.0, HardSphere(1.8)).packing_feasible()


def test_positions_outside_box_rejected():
    spec = SystemSpec(2, 1.0, LennardJones())
    with pytest.raises(DomainError):
        config_energy(spec, [[0.5, 0.5, 0.5], [1.2, 0.5, 0.5]])
    with pytest.raises(DomainError):
        PhasePoint(np.zeros(6), [[0.1] * 3, [1.5] * 3], 1.0)


def test_phase_point_energy():
    spec = SystemSpec(2, 5.0, LennardJones())
    q = np.array([[1.0, 1.0, 1.0], [1.0 + 2 ** (1 / 6), 1.0, 1.0]])
    pp = PhasePoint(np.array([1.0, 0, 0, 0, 2.0, 0]), q, 5.0)
    assert pp.energy(spec) == pytest.approx(2.5 + spec.potential.min_pair_energy)


@given(st.integers(0, 2**32 - 1))
def test_energy_permutation_symmetric(seed):
    rng = np.random.default_rng(seed)
    spec = SystemSpec(5, 3.0, LennardJones())
    q = rng.random((5, 3)) * 3.0
    perm = rng.permutation(5)
    assert config_energy(spec, q[perm]) == pytest.approx(config_energy(spec, q), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_lj_stability_bound(seed, n):
    rng = np.random.default_rng(seed)
    spec = SystemSpec(n, 2.0, LennardJones())
    u = config_energies(spec, rng.random((200, n, 3)) * 2.0)
    assert np.all(u >= -n * spec.potential.stability_constant(n))


def test_ideal_energy_zero():
    spec = SystemSpec(3, 1.0, Ideal())
    assert config_energy(spec, np.full((3, 3), 0.5)) == 0.0
