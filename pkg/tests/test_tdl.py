import math

import pytest

from microent.core import LennardJones, ThermoPoint
from microent.dos import SamplerParams
from microent.tdl import (
    DeltaERule,
    ModelTemplate,
    config_hash,
    fit_power_law,
    gap_per_volume,
    run_tdl_sequence,
    same_limit_constants,
    write_curve,
)
from microent.convolution import DEFAULT_QUAD

POINT = ThermoPoint(1.0, 1.0)


def test_ideal_sequence_ordered_and_threads_agree():
    a = run_tdl_sequence(ModelTemplate(), POINT, [8, 27, 64], SamplerParams(), threads=1)
    b = run_tdl_sequence(ModelTemplate(), POINT, [8, 27, 64], SamplerParams(), threads=3)
    assert [e.n for e in a.entries] == [8, 27, 64]
    assert [e.s_boltzmann for e in a.entries] == [e.s_boltzmann for e in b.entries]


def test_gap_per_volume_ideal():
    curve = run_tdl_sequence(ModelTemplate(), POINT, [8, 27, 64, 125], SamplerParams(), None)
    for vol, g in gap_per_volume(curve):
        assert g == pytest.approx(math.log(1.5) / vol, rel=1e-8)
    k, _ = fit_power_law(*zip(*gap_per_volume(curve)))
    assert k == pytest.approx(-1.0, abs=1e-6)


def test_same_limit_constants_bounded():
    curve = run_tdl_sequence(ModelTemplate(), POINT, [27, 64, 125], SamplerParams())
    c = same_limit_constants(curve)
    assert all(v == pytest.approx(math.log(1.5), rel=1e-6) for v in c["boltzmann-quasi"])


def test_failing_entry_recorded():
    # eps below the Lennard-Jones ground bound: every entry fails but the run completes
    curve = run_tdl_sequence(ModelTemplate(LennardJones(), grid_bins=4), ThermoPoint(0.5, -100.0), [2, 3],
                             SamplerParams(n_streams=1))
    assert all(e.error for e in curve.entries)
    assert curve.ok_entries() == []


def test_delta_rule():
    assert DeltaERule(0.1).width(50.0) == pytest.approx(5.0)
    assert DeltaERule(0.3, "absolute").width(50.0) == 0.3
    with pytest.raises(ValueError):
        DeltaERule(0.1, "relative")
    with pytest.raises(ValueError):
        run_tdl_sequence(ModelTemplate(), POINT, [8, 8], SamplerParams())


def test_write_curve(tmp_path):
    curve = run_tdl_sequence(ModelTemplate(), POINT, [8], SamplerParams())
    csv_path, json_path = write_curve(curve, tmp_path / "c", {"a": 1}, DEFAULT_QUAD, SamplerParams())
    assert csv_path.read_text().splitlines()[0] == "N,volume,s_boltzmann,s_quasi,s_regularized,std_err,error"
    assert config_hash({"a": 1}) in json_path.read_text()
