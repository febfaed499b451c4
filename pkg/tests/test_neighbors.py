"""Spatial index tests, including oracle equivalence against a linear scan."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from first.dataset import CATEGORICAL, CONTINUOUS, Dataset, encode
from first.neighbors import build_index, within_kth, worker_count
from tests.conftest import brute_within_kth, encoded


def index_1d(values):
    m, _ = encoded(np.asarray(values, dtype=float)[:, None], np.zeros(len(values)), standardize=False)
    return build_index(m, [0])


class TestWithinKth:
    def test_two_nearest_no_tie(self):
        idx = index_1d([0.0, 1.0, 2.0, 5.0])
        assert within_kth(idx, 0, 2) == [0, 1]

    def test_tie_at_kth_distance_includes_both(self):
        idx = index_1d([0.0, 1.0, 1.0, 5.0])
        assert within_kth(idx, 0, 2) == [0, 1, 2]

    def test_k1_includes_self_and_duplicates(self):
        idx = index_1d([3.0, 3.0, 7.0])
        assert within_kth(idx, 0, 1) == [0, 1]
        assert within_kth(idx, 1, 1) == [0, 1]

    def test_ordering_by_distance_then_id(self):
        idx = index_1d([0.0, -1.0, 1.0, 2.0])
        # rows 1 and 2 tie at distance 1 from row 0; id breaks the tie
        assert within_kth(idx, 0, 3) == [0, 1, 2]

    def test_k_equals_n_returns_everything(self):
        idx = index_1d([0.0, 4.0, 9.0])
        assert within_kth(idx, 2, 3) == [2, 1, 0]

    def test_bad_arguments(self):
        idx = index_1d([0.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            within_kth(idx, 0, 0)
        with pytest.raises(ValueError):
            within_kth(idx, 0, 4)
        with pytest.raises(ValueError):
            within_kth(idx, 3, 1)


class TestBuildIndex:
    def test_projection_dimensions(self, rng):
        m, _ = encoded(rng.uniform(size=(10, 3)), np.zeros(10))
        assert build_index(m, [0]).points.shape == (10, 1)
        assert build_index(m, [0, 2]).points.shape == (10, 2)

    def test_categorical_group_expands_columns(self, rng):
        ds = Dataset(
            factor_names=("u", "c"),
            factor_kinds=(CONTINUOUS, CATEGORICAL),
            factors=(rng.uniform(size=9), np.asarray(list("abcabcabc"), dtype=object)),
            response=np.zeros(9),
        )
        idx = build_index(encode(ds), [0, 1])
        assert idx.points.shape == (9, 4)

    def test_empty_factor_set_rejected(self, rng):
        m, _ = encoded(rng.uniform(size=(5, 2)), np.zeros(5))
        with pytest.raises(ValueError, match="non-empty"):
            build_index(m, [])

    def test_out_of_range_factor(self, rng):
        m, _ = encoded(rng.uniform(size=(5, 2)), np.zeros(5))
        with pytest.raises(ValueError, match="out of range"):
            build_index(m, [2])


@st.composite
def point_sets(draw):
    """Random point sets with many exact duplicates to exercise ties."""
    n = draw(st.integers(min_value=2, max_value=40))
    d = draw(st.integers(min_value=1, max_value=3))
    grid = draw(st.booleans())
    if grid:
        cells = draw(st.lists(
            st.tuples(*[st.integers(min_value=0, max_value=3) for _ in range(d)]),
            min_size=n, max_size=n))
        pts = np.array(cells, dtype=float)
    else:
        flat = draw(st.lists(
            st.floats(min_value=-10, max_value=10, allow_nan=False, width=32),
            min_size=n * d, max_size=n * d))
        pts = np.array(flat, dtype=float).reshape(n, d)
    return pts


class TestOracleEquivalence:
    @settings(max_examples=80, deadline=None)
    @given(pts=point_sets(), k=st.sampled_from([1, 2, 3, 5]), row=st.integers(min_value=0, max_value=10 ** 6))
    def test_matches_brute_force(self, pts, k, row):
        n = len(pts)
        if k > n:
            k = n
        row = row % n
        m, _ = encoded(pts, np.zeros(n), standardize=False)
        idx = build_index(m, list(range(pts.shape[1])))
        assert within_kth(idx, row, k) == brute_within_kth(idx.points, row, k)

    def test_monotonic_in_k(self, rng):
        pts = rng.choice([0.0, 1.0, 2.0], size=(30, 2))
        m, _ = encoded(pts, np.zeros(30), standardize=False)
        idx = build_index(m, [0, 1])
        for row in range(0, 30, 5):
            prev: set[int] = set()
            for k in range(1, 8):
                cur = set(within_kth(idx, row, k))
                assert prev <= cur
                assert len(cur) >= k
                prev = cur

    def test_permutation_invariance_of_sets(self, rng):
        pts = rng.uniform(size=(40, 2)).round(1)  # rounding forces ties
        perm = rng.permutation(40)
        m1, _ = encoded(pts, np.zeros(40), standardize=False)
        m2, _ = encoded(pts[perm], np.zeros(40), standardize=False)
        i1 = build_index(m1, [0, 1])
        i2 = build_index(m2, [0, 1])
        inverse = np.empty(40, dtype=int)
        inverse[perm] = np.arange(40)
        for row in range(0, 40, 7):
            direct = set(within_kth(i1, row, 3))
            mapped = {int(perm[j]) for j in within_kth(i2, int(inverse[row]), 3)}
            assert direct == mapped


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("FIRST_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FIRST_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.delenv("FIRST_THREADS")
    assert worker_count() >= 1
