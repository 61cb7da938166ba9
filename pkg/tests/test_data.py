import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dimscope.data import (
    DataSet,
    RngHandle,
    center_and_project,
    centered_gram,
    pairwise_distances,
    projected_distances_from_gram,
)
from dimscope.errors import DegenerateSampleError, InvalidInputError


class TestDataSet:
    def test_shape(self):
        ds = DataSet(np.zeros((4, 3)))
        assert (ds.n_samples, ds.ambient_dim) == (4, 3)

    def test_immutable(self):
        src = np.ones((3, 2))
        ds = DataSet(src)
        src[0, 0] = 5.0
        assert ds.points[0, 0] == 1.0
        with pytest.raises(ValueError):
            ds.points[0, 0] = 2.0

    def test_non_finite_names_row(self):
        pts = np.zeros((5, 2))
        pts[3, 1] = np.inf
        with pytest.raises(InvalidInputError, match="row 3"):
            DataSet(pts)

    def test_labels_length(self):
        with pytest.raises(InvalidInputError):
            DataSet(np.zeros((3, 2)), labels=[0, 1])

    def test_subset_keeps_labels(self):
        ds = DataSet(np.arange(8.0).reshape(4, 2), labels=[0, 1, 2, 3])
        sub = ds.subset([3, 1])
        assert sub.points.tolist() == [[6.0, 7.0], [2.0, 3.0]]
        assert sub.labels.tolist() == [3, 1]


class TestRngHandle:
    def test_replay(self):
        a = RngHandle(9).generator().random(5)
        b = RngHandle(9).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        h = RngHandle(9)
        a = h.substream(0).generator().random(5)
        b = h.substream(1).generator().random(5)
        assert not np.array_equal(a, b)

    def test_substream_order_insensitive(self):
        h = RngHandle(3)
        first = [h.substream(k).generator().random() for k in range(4)]
        second = [h.substream(k).generator().random() for k in reversed(range(4))][::-1]
        assert first == second

    def test_seed_range(self):
        RngHandle(2**64 - 1)
        with pytest.raises(InvalidInputError):
            RngHandle(2**64)
        with pytest.raises(InvalidInputError):
            RngHandle(-1)


class TestPairwiseDistances:
    def test_345(self):
        assert pairwise_distances([[0.0, 0.0], [3.0, 4.0]]).tolist() == [5.0]

    def test_collinear(self):
        assert pairwise_distances([[0.0], [1.0], [2.0]]).tolist() == [1.0, 1.0, 2.0]

    def test_gaussian_count(self, gauss_cloud):
        d = pairwise_distances(gauss_cloud)
        assert d.size == 4950
        assert np.all(np.diff(d) >= 0)
        assert d[0] > 0

    def test_brute_force(self, gauss_cloud):
        x = gauss_cloud[:30]
        ref = sorted(
            math.sqrt(sum((a - b) ** 2 for a, b in zip(x[i], x[j]))) for i in range(30) for j in range(i + 1, 30)
        )
        np.testing.assert_allclose(pairwise_distances(x), ref, rtol=1e-13)

    def test_too_few(self):
        with pytest.raises(InvalidInputError):
            pairwise_distances([[1.0, 2.0]])

    def test_non_finite(self):
        with pytest.raises(InvalidInputError, match="row 1"):
            pairwise_distances(np.array([[0.0, 1.0], [np.nan, 0.0], [1.0, 1.0]]))

    @settings(max_examples=40, deadline=None)
    @given(
        arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 4)), elements=st.floats(-100, 100)),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariant(self, pts, rnd):
        perm = list(range(len(pts)))
        rnd.shuffle(perm)
        np.testing.assert_array_equal(pairwise_distances(pts), pairwise_distances(pts[perm]))


class TestCenterAndProject:
    def test_already_unit(self):
        out = center_and_project([[1.0, 0.0], [-1.0, 0.0]])
        np.testing.assert_allclose(out.points, [[1.0, 0.0], [-1.0, 0.0]])

    def test_square(self):
        out = center_and_project([[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]])
        np.testing.assert_allclose(out.points, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)

    def test_degenerate_row(self):
        with pytest.raises(DegenerateSampleError) as info:
            center_and_project([[1.0, 1.0], [0.0, 0.0], [-1.0, -1.0]])
        assert info.value.row == 1

    def test_shape_kept(self, gauss_cloud):
        out = center_and_project(gauss_cloud)
        assert out.points.shape == gauss_cloud.shape

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(3, 15), st.integers(2, 5)), elements=st.floats(-1e3, 1e3)))
    def test_unit_norm_and_zero_mean(self, pts):
        centered = pts - pts.mean(axis=0)
        norms = np.linalg.norm(centered, axis=1)
        try:
            out = center_and_project(pts)
        except DegenerateSampleError:
            assert norms.min() <= 1e-9 * norms.max()
            return
        np.testing.assert_allclose(np.linalg.norm(out.points, axis=1), 1.0, atol=1e-12)
        # undo the projection to check the centering
        back = out.points * norms[:, None]
        assert np.abs(back.mean(axis=0)).max() <= 1e-12 * max(1.0, np.abs(pts).max())


def test_gram_route_matches_direct(gauss_cloud):
    x = gauss_cloud + 3.0
    gram = centered_gram(x)
    idx = np.arange(5, 60, 2)
    via_gram = projected_distances_from_gram(gram[np.ix_(idx, idx)])
    direct = pairwise_distances(center_and_project(x[idx]))
    np.testing.assert_allclose(via_gram, direct, atol=1e-12)
