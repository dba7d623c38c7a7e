import numpy as np
import pytest
from hypothesis import settings

from microent.core import HardSphere, LennardJones, SystemSpec
from microent.dos import SamplerParams, ground_energy_bound, hard_sphere_dos, ideal_dos, wang_landau_dos

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("stress", deadline=None, max_examples=600)
settings.load_profile("default")

# (criterion number, title, passed, detail), filled in by test_acceptance
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    by_id: dict[int, list] = {}
    for cid, title, ok, detail in ACCEPTANCE:
        by_id.setdefault(cid, [title, True, []])
        by_id[cid][1] &= ok
        by_id[cid][2].append(detail)
    for cid in sorted(by_id):
        title, ok, details = by_id[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:>2}. {title:<34} {'; '.join(details)}")


@pytest.fixture(scope="session")
def lj_spec():
    return SystemSpec(3, 4.0, LennardJones())


@pytest.fixture(scope="session")
def lj_dos(lj_spec):
    params = SamplerParams(n_streams=4, wl_log_f_final=1e-4)
    grid = np.linspace(ground_energy_bound(lj_spec), 1.0, 25)
    return wang_landau_dos(lj_spec, grid, params, threads=1)


@pytest.fixture(scope="session")
def hs_dos():
    return hard_sphere_dos(SystemSpec(4, 4.0, HardSphere(1.0)), SamplerParams(n_samples=200_000, n_streams=4))


@pytest.fixture(scope="session")
def ideal3():
    return ideal_dos(SystemSpec(3, 2.0))
