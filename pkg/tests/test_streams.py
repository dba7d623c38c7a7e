import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from microent import streams


@given(st.integers(0, 10**7), st.integers(1, 64))
def test_split_count_conserves_total(total, parts):
    sizes = streams.split_count(total, parts)
    assert sum(sizes) == total
    assert max(sizes) - min(sizes) <= 1


def test_streams_independent_and_reproducible():
    a = [g.random(4) for g in streams.stream_generators(7, 3)]
    b = [g.random(4) for g in streams.stream_generators(7, 3)]
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a[0], a[1])
    assert streams.stream_uint32(7, 3) == streams.stream_uint32(7, 3)


def test_ordered_map_preserves_order():
    assert streams.ordered_map(lambda x: x * x, list(range(20)), threads=4) == [x * x for x in range(20)]


def test_seed_override(monkeypatch):
    monkeypatch.setenv(streams.SEED_ENV, "99")
    assert streams.resolve_seed(1) == 99
    monkeypatch.delenv(streams.SEED_ENV)
    assert streams.resolve_seed(1) == 1
