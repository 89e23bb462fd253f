import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from osram_mttkrp.hypergraph import ModeOrdering, build_hypergraph, compute_count, sort_for_mode, traffic_count
from osram_mttkrp.tensor_io import SparseTensorCOO


def _raw(coords, dims):
    coords = np.array(coords, dtype=np.int64).reshape(-1, len(dims))
    return SparseTensorCOO(dims, coords, np.ones(coords.shape[0]))


def test_nell1_vertex_count():
    # published NELL-1 dims; |E| is checked through compute_count below since the
    # nonzeros themselves are not materialized
    hg = build_hypergraph(_raw([], (2_900_000, 2_100_000, 25_500_000)))
    assert hg.num_vertices == 30_500_000
    assert hg.num_hyperedges == 0


def test_small_hypergraphs():
    hg = build_hypergraph(_raw([], (1, 1, 1)))
    assert (hg.num_vertices, hg.num_hyperedges) == (3, 0)
    assert build_hypergraph(_raw([], (3, 4))).num_vertices == 7
    assert build_hypergraph(_raw([[0, 0], [2, 3]], (3, 4))).num_hyperedges == 2


def test_sort_examples():
    t = _raw([(1, 0, 0), (0, 1, 1), (1, 1, 0), (0, 0, 2)], (2, 2, 3))
    assert sort_for_mode(t, 0).permutation.tolist() == [1, 3, 0, 2]
    t2 = _raw([(0, 5), (0, 2), (0, 9)], (1, 10))
    assert sort_for_mode(t2, 1).permutation.tolist() == [1, 0, 2]
    assert sort_for_mode(t2, 0).permutation.tolist() == [0, 1, 2]


def test_sort_rejects_bad_mode():
    with pytest.raises(ValueError):
        sort_for_mode(_raw([], (2, 2)), 2)


@st.composite
def coo(draw):
    n = draw(st.integers(2, 4))
    dims = tuple(draw(st.lists(st.integers(1, 5), min_size=n, max_size=n)))
    coords = draw(st.lists(st.tuples(*(st.integers(0, d - 1) for d in dims)), max_size=40))
    return _raw(coords, dims)


@given(coo(), st.data())
def test_ordering_groups_output_rows(t, data):
    mode = data.draw(st.integers(0, t.num_modes - 1))
    order = sort_for_mode(t, mode)
    assert order.is_valid_for(t)
    out = t.coords[order.permutation, mode]
    assert np.all(np.diff(out) >= 0)
    # stability: ties keep their original relative order
    for a, b in zip(order.permutation[:-1], order.permutation[1:]):
        if t.coords[a, mode] == t.coords[b, mode]:
            assert a < b


@given(coo())
def test_ordering_text_round_trip(t):
    order = sort_for_mode(t, 0)
    back = ModeOrdering.from_text(0, order.to_text())
    assert back.permutation.tolist() == order.permutation.tolist()


def test_invalid_ordering_detected():
    t = _raw([(1, 0), (0, 0)], (2, 1))
    assert not ModeOrdering(0, np.array([0, 1])).is_valid_for(t)
    assert not ModeOrdering(0, np.array([1, 1])).is_valid_for(t)


def test_compute_count_examples():
    assert compute_count(3, 143_600_000, 16) == 6_892_800_000
    assert compute_count(3, 0, 16) == 0
    assert compute_count(3, 4, 2) == 24


def test_traffic_count_examples():
    assert traffic_count(3, 4, 2, 3) == 26
    assert traffic_count(3, 0, 4, 0) == 0
    assert traffic_count(4, 10, 2, 5) == 80
    with pytest.raises(ValueError):
        traffic_count(1, 1, 1, 1)


@given(st.integers(2, 6), st.integers(0, 10**12), st.integers(0, 10**4))
def test_traffic_with_zero_rank_is_tensor_stream(n, nnz, rows):
    assert traffic_count(n, nnz, 0, rows) == nnz


def test_counts_do_not_overflow():
    assert compute_count(5, 2**40, 2**10) == 5 * 2**50
