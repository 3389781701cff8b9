import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import idim
from idim.geometry import Metric, PointCloud, compute_mus, deduplicate, distance_matrix, knn


DUP_ROWS = np.array(
    [[1, 2, 3], [1, 2, 3], [1, 4, 3], [1, 4, 3], [1, 4, 5]], dtype=float
)


def test_deduplicate_paper_example():
    with pytest.warns(UserWarning, match="Original sample size: 5. New sample size: 3."):
        cloud, removed = deduplicate(DUP_ROWS)
    assert removed == 2
    assert cloud.data.shape == (3, 3)
    np.testing.assert_array_equal(cloud.data, [[1, 2, 3], [1, 4, 3], [1, 4, 5]])


def test_deduplicate_no_duplicates():
    rows = np.array([[0.0], [1.0], [3.0]])
    cloud, removed = deduplicate(rows)
    assert removed == 0
    np.testing.assert_array_equal(cloud.data, rows)


def test_deduplicate_too_few_rows_left():
    rows = np.vstack([np.ones((4, 2)), [[0, 0]], [[2, 2]]])
    with pytest.raises(ValueError, match="at least 3 distinct rows"):
        with pytest.warns(UserWarning):
            deduplicate(rows)


def test_deduplicate_keeps_first_occurrence_order():
    rows = np.array([[5.0], [1.0], [5.0], [2.0]])
    with pytest.warns(UserWarning):
        cloud, removed = deduplicate(rows)
    assert removed == 1
    np.testing.assert_array_equal(cloud.data.ravel(), [5.0, 1.0, 2.0])


def test_distance_matrix_hand_values():
    d = distance_matrix(np.array([[0.0], [3.0]]), "euclidean")
    assert d[0, 1] == pytest.approx(3.0)
    d = distance_matrix(np.array([[0.0, 0.0], [1.0, 1.0]]), "manhattan")
    assert d[0, 1] == pytest.approx(2.0)
    d = distance_matrix(np.array([[1.0], [3.0]]), "canberra")
    assert d[0, 1] == pytest.approx(0.5)


def test_canberra_zero_over_zero_convention():
    d = distance_matrix(np.array([[0.0, 1.0], [0.0, 3.0]]), "canberra")
    assert d[0, 1] == pytest.approx(0.5)


def test_distance_matrix_rejects_nonfinite():
    with pytest.raises(ValueError, match="non-finite"):
        distance_matrix(np.array([[np.nan], [1.0]]))


def test_distance_matrix_rejects_precomputed_metric():
    with pytest.raises(ValueError):
        distance_matrix(np.zeros((3, 2)), "precomputed")


def test_euclidean_matches_gram_formula(rng):
    X = rng.normal(size=(50, 5))
    d = distance_matrix(X, "euclidean")
    sq = (X * X).sum(axis=1)
    gram = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0))
    assert np.max(np.abs(d - gram)) < 1e-9
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0.0)


def test_knn_hand_example():
    d = distance_matrix(np.array([[0.0], [1.0], [3.0]]))
    nn_dist, nn_index = knn(d, 2)
    np.testing.assert_allclose(nn_dist, [[1, 3], [1, 2], [2, 3]])
    np.testing.assert_array_equal(nn_index, [[1, 2], [0, 2], [1, 0]])


def test_knn_k1_is_row_minimum(rng):
    X = rng.normal(size=(20, 4))
    d = distance_matrix(X)
    nn_dist, _ = knn(d, 1)
    masked = d + np.where(np.eye(20) > 0, np.inf, 0.0)
    np.testing.assert_allclose(nn_dist[:, 0], masked.min(axis=1))


def test_knn_equilateral_tie_break():
    # equilateral triangle: all off-diagonal distances equal, indices ascend
    d = np.full((3, 3), 2.5)
    np.fill_diagonal(d, 0.0)
    nn_dist, nn_index = knn(d, 2)
    np.testing.assert_allclose(nn_dist, 2.5)
    np.testing.assert_array_equal(nn_index, [[1, 2], [0, 2], [0, 1]])


def test_knn_zero_offdiagonal_errors():
    d = distance_matrix(np.array([[0.0], [0.0], [3.0]]))
    with pytest.raises(ValueError, match="[Dd]uplicate"):
        knn(d, 1)


def test_knn_k_bounds():
    d = distance_matrix(np.array([[0.0], [1.0], [3.0]]))
    with pytest.raises(ValueError):
        knn(d, 0)
    with pytest.raises(ValueError):
        knn(d, 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_knn_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 3))
    perm = rng.permutation(12)
    d = distance_matrix(X)
    dp = distance_matrix(X[perm])
    nn_dist, nn_index = knn(d, 3)
    nn_dist_p, nn_index_p = knn(dp, 3)
    np.testing.assert_allclose(nn_dist_p, nn_dist[perm])
    inverse = np.empty(12, dtype=int)
    inverse[perm] = np.arange(12)
    np.testing.assert_array_equal(nn_index_p, inverse[nn_index[perm]])


def test_compute_mus_hand_example():
    ratios = compute_mus(np.array([[0.0], [1.0], [3.0]]))
    np.testing.assert_allclose(ratios.mus, [3.0, 2.0, 1.5])
    ratios.validate()


def test_compute_mus_adjacency_hand_example():
    ratios = compute_mus(np.array([[0.0], [1.0], [3.0]]), with_adjacency=True, q=1)
    np.testing.assert_array_equal(
        ratios.adjacency, [[0, 1, 0], [1, 0, 0], [0, 1, 0]]
    )
    ratios.validate()


def test_compute_mus_equal_neighbor_distances_give_mu_one():
    # square: the two nearest neighbors of each corner are equidistant
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    ratios = compute_mus(X)
    np.testing.assert_allclose(ratios.mus, 1.0)


def test_compute_mus_dist_mat_overrides_x(rng):
    X = rng.normal(size=(15, 3))
    other = rng.normal(size=(15, 3))
    d = distance_matrix(X)
    from_matrix = compute_mus(other, dist_mat=d)
    from_points = compute_mus(X)
    np.testing.assert_array_equal(from_matrix.mus, from_points.mus)


def test_compute_mus_matches_precomputed_exactly(rng):
    X = rng.normal(size=(40, 4))
    for metric in ("euclidean", "manhattan", "canberra"):
        direct = compute_mus(X, metric=metric)
        via_matrix = compute_mus(dist_mat=distance_matrix(X, metric))
        np.testing.assert_array_equal(direct.mus, via_matrix.mus)


def test_compute_mus_generalized_orders(rng):
    X = rng.normal(size=(30, 3))
    ratios = compute_mus(X, n1=3, n2=7)
    d = distance_matrix(X)
    nn_dist, _ = knn(d, 7)
    np.testing.assert_allclose(ratios.mus, nn_dist[:, 6] / nn_dist[:, 2])
    assert np.all(ratios.mus >= 1.0)


def test_compute_mus_invalid_orders():
    X = np.array([[0.0], [1.0], [3.0]])
    with pytest.raises(ValueError):
        compute_mus(X, n1=2, n2=2)
    with pytest.raises(ValueError):
        compute_mus(X, n1=1, n2=3)


def test_adjacency_row_sums_and_diagonal(rng):
    X = rng.normal(size=(25, 3))
    ratios = compute_mus(X, with_adjacency=True, q=4)
    assert np.all(ratios.adjacency.sum(axis=1) == 4)
    assert np.all(np.diag(ratios.adjacency) == 0)


def test_precomputed_validation():
    bad = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        compute_mus(dist_mat=bad)
    with pytest.raises(ValueError, match="negative"):
        idim.validate_distance_matrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_pointcloud_validation():
    with pytest.raises(ValueError):
        PointCloud(np.zeros(3))
    with pytest.raises(ValueError):
        PointCloud(np.zeros((3, 2)), col_names=["a"])


def test_metric_coercion():
    assert Metric.coerce("Euclidean") is Metric.EUCLIDEAN
    with pytest.raises(ValueError):
        Metric.coerce("chebyshev")
