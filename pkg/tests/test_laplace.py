import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microent.core import DomainError, ThermoPoint
from microent.kinetic import s_kin
from microent.laplace import (
    FitQualityError,
    SIntModel,
    concavity_check,
    golden_section_max,
    s_int_extrapolate,
    s_tot_sup,
)


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_golden_section_finds_parabola_peak(c, k):
    x, fx = golden_section_max(lambda x: -k * (x - c) ** 2, -10, 10, 1e-10)
    assert x == pytest.approx(c, abs=1e-6)
    assert fx <= 0


def test_ideal_supremum_closed_form():
    res = s_tot_sup(1.0, 1.0, SIntModel.ideal(1.0))
    assert res.value == pytest.approx(1 + 1.5 * math.log(4 * math.pi * math.e / 3), abs=1e-9)
    assert res.boundary_supremum
    assert res.argmax == 1.0


@given(st.floats(0.2, 3), st.floats(0.2, 3))
def test_constant_s_int_pushes_all_energy_to_kinetic(rho, eps):
    res = s_tot_sup(rho, eps, SIntModel.constant(rho, 0.3))
    assert res.value == pytest.approx(s_kin(ThermoPoint(rho, eps)) + 0.3, abs=1e-8)


@given(st.floats(-3, 3))
def test_argmax_invariant_under_constant_shift(shift):
    table = SIntModel.from_table(1.0, [0.0, 1.0, 2.0, 3.0], [0.0, 2.0, 2.5, 2.6], eps_lower=0.0)
    shifted = SIntModel(1.0, lambda e: table(e) + shift, 0.0)
    a = s_tot_sup(1.0, 2.5, table)
    b = s_tot_sup(1.0, 2.5, shifted)
    assert b.argmax == pytest.approx(a.argmax, abs=1e-6)
    assert b.value - a.value == pytest.approx(shift, abs=1e-8)


def test_interior_maximum_for_concave_table():
    # s_int slope 2 near the bottom beats the kinetic slope 1.5/e for e > 0.75
    model = SIntModel.from_table(1.0, [0.0, 1.0, 2.0, 3.0], [0.0, 2.0, 2.5, 2.6], eps_lower=0.0)
    res = s_tot_sup(1.0, 2.5, model)
    assert not res.boundary_supremum
    assert 0 < res.argmax < 2.5


def test_s_tot_sup_rejects_empty_interval():
    with pytest.raises(DomainError):
        s_tot_sup(1.0, -1.0, SIntModel.ideal(1.0))


def test_non_concave_table_is_repaired():
    m = SIntModel.from_table(1.0, [0, 1, 2, 3], [0.0, 0.1, 2.0, 2.1])
    assert m.repaired
    assert m(1.0) == pytest.approx(1.0)


def test_extrapolation_recovers_coefficients():
    ns = np.array([8, 27, 64, 125, 216])
    vol = ns / 0.5
    a = 1.25 + 0.7 / ns - 0.3 * np.log(ns) / ns
    a_inf, diag = s_int_extrapolate(zip(ns, vol, a * vol))
    assert a_inf == pytest.approx(1.25, abs=1e-10)
    assert diag.coefficients[1] == pytest.approx(0.7, abs=1e-8)


def test_extrapolation_rejects_mixed_density_and_bad_fit():
    with pytest.raises(DomainError):
        s_int_extrapolate([(8, 8, 1.0), (27, 20, 1.0), (64, 64, 1.0)])
    ns = [8, 27, 64, 125]
    noisy = [(n, n, n * (1 + (0.5 if i % 2 else -0.5))) for i, n in enumerate(ns)]
    with pytest.raises(FitQualityError) as info:
        s_int_extrapolate(noisy)
    assert info.value.diagnostics.rms_residual > 1e-3


@given(st.lists(st.floats(0.1, 5), min_size=3, max_size=12))
def test_concavity_of_log_curves(xs):
    xs = np.unique(np.round(xs, 6))
    if xs.size < 3:
        return
    assert concavity_check(list(zip(xs, np.log(xs))), tol=1e-12).passed
    assert not concavity_check(list(zip(xs, xs**2)), tol=0.0).passed


def test_concavity_detects_decrease():
    rep = concavity_check([(0, 0.0), (1, -1.0), (2, -2.0)], tol=1e-12)
    assert rep.max_negative_first_difference == pytest.approx(1.0)
    assert not rep.passed
