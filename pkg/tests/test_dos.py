import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microent.core import DomainError, HardSphere, LennardJones, SystemSpec, UsageError
from microent.dos import (
    ConfigDoS,
    ConvergenceError,
    SamplerParams,
    build_config_dos,
    estimate_accessible_fraction,
    ground_energy_bound,
    hard_sphere_dos,
    ideal_dos,
    make_monotone,
    uniform_dos,
    wang_landau_dos,
)

LJ2 = SystemSpec(2, 3.0, LennardJones())


def toy_dos():
    grid = np.array([-0.9, -0.5, 0.0, 0.5, 1.0])
    return ConfigDoS(LJ2, grid, np.array([-np.inf, -3.0, -1.0, 0.5, 1.0]), np.full(5, 0.01), -0.9)


def test_interpolation_rules():
    d = toy_dos()
    assert d.effective_ground() == -0.9
    assert d.log_at(-0.9) == -np.inf
    assert d.log_at(-0.75) == -3.0  # constant up to the first nonzero node
    assert d.log_at(-0.25) == pytest.approx(-2.0)
    assert d.log_at(5.0) == 1.0
    assert d.log_at(0.5) == pytest.approx(0.5)


def test_validation():
    g = np.array([-0.9, 0.0, 1.0])
    with pytest.raises(DomainError):
        ConfigDoS(LJ2, g, np.array([-np.inf, 1.0, 0.0]), np.zeros(3), -0.9)
    with pytest.raises(DomainError):
        ConfigDoS(LJ2, g[::-1], np.array([-np.inf, 0.0, 1.0]), np.zeros(3), -0.9)
    with pytest.raises(DomainError):
        ConfigDoS(LJ2, g, np.array([0.0, 0.5, 1.0]), np.zeros(3), -0.9)
    with pytest.raises(DomainError):
        ConfigDoS(LJ2, g, np.array([-np.inf, 0.5, 1.0]), np.zeros(3), -5.0)


def test_arrays_read_only():
    d = toy_dos()
    with pytest.raises(ValueError):
        d.log_omega_u[1] = 0.0


def test_csv_round_trip(tmp_path):
    d = toy_dos()
    d.write(tmp_path / "toy")
    back = ConfigDoS.from_csv(tmp_path / "toy.csv", LJ2, -0.9)
    np.testing.assert_array_equal(back.grid, d.grid)
    np.testing.assert_array_equal(back.log_omega_u, d.log_omega_u)
    assert (tmp_path / "toy.json").exists()


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30))
def test_make_monotone_output_nondecreasing(vals):
    out, _ = make_monotone(np.array(vals))
    assert np.all(np.diff(out) >= -1e-12)


def test_sampler_params_validation():
    with pytest.raises(ValueError):
        SamplerParams(n_samples=0)
    with pytest.raises(ValueError):
        SamplerParams(wl_flatness=1.5)


def test_ground_bound():
    assert ground_energy_bound(SystemSpec(4, 5.0, LennardJones())) == pytest.approx(
        -4 * 1.5 * -LennardJones().min_pair_energy)
    assert ground_energy_bound(SystemSpec(4, 5.0, HardSphere(1.0))) == 0.0


def test_ideal_dos_exact():
    spec = SystemSpec(3, 2.0)
    d = ideal_dos(spec)
    assert d.log_at(0.3) == pytest.approx(9 * math.log(2) - math.log(6))
    assert d.log_at(0.0) == -np.inf


def test_hard_sphere_pair_fraction_matches_overlap_formula():
    # excluded pair volume of a cube of side 2 for sigma = 1, evaluated in closed form
    spec = SystemSpec(2, 2.0, HardSphere(1.0))
    exact = 1 - 17.6940990500857018 / 64
    fe = estimate_accessible_fraction(spec, 1.0, SamplerParams(n_samples=400_000, n_streams=4))
    assert abs(fe.estimate - exact) < 4 * fe.std_err


def test_hard_sphere_dos_two_level():
    spec = SystemSpec(3, 3.0, HardSphere(1.0))
    d = hard_sphere_dos(spec, SamplerParams(n_samples=20_000, n_streams=2))
    assert d.is_zero[0] and not d.is_zero[1]
    assert d.log_at(0.01) == d.log_at(100.0)


def test_uniform_sampling_thread_invariant():
    grid = np.linspace(-0.9, 1.0, 6)
    p = SamplerParams(n_samples=50_000, n_streams=4)
    a = uniform_dos(LJ2, grid, p, threads=1)
    b = uniform_dos(LJ2, grid, p, threads=3)
    np.testing.assert_array_equal(a.log_omega_u, b.log_omega_u)


def test_uniform_records_empty_bins():
    eg = ground_energy_bound(LJ2)
    grid = np.array([eg, eg + 1e-4, 1.0])
    d = uniform_dos(LJ2, grid, SamplerParams(n_samples=1000, n_streams=2))
    assert d.meta["deferred_to_wang_landau"] == [eg + 1e-4]


def test_wang_landau_matches_uniform_for_pair():
    grid = np.linspace(ground_energy_bound(LJ2), 0.5, 16)
    p = SamplerParams(n_samples=400_000, n_streams=4, wl_log_f_final=1e-4)
    wl = wang_landau_dos(LJ2, grid, p, threads=1)
    un = uniform_dos(LJ2, grid, p, threads=1)
    for j in (10, 13, 15):
        s = math.hypot(wl.std_err[j], un.std_err[j])
        assert abs(wl.log_omega_u[j] - un.log_omega_u[j]) < 4 * s + 0.02


def test_wang_landau_reports_nonconvergence():
    grid = np.linspace(ground_energy_bound(LJ2), 0.5, 16)
    p = SamplerParams(n_streams=1, wl_log_f_final=1e-6, wl_max_sweeps=50, wl_check_sweeps=10)
    with pytest.raises(ConvergenceError) as info:
        wang_landau_dos(LJ2, grid, p)
    assert 0 <= info.value.flatness <= 1


def test_build_dispatch():
    assert build_config_dos(SystemSpec(2, 1.0), SamplerParams()).meta["method"] == "exact"
    with pytest.raises(UsageError):
        build_config_dos(LJ2, SamplerParams())
    with pytest.raises(UsageError):
        build_config_dos(LJ2, SamplerParams(), [0.0, 1.0], method="magic")
