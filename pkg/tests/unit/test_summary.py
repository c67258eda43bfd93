import numpy as np
import pytest

# Import models
from app.models import LocalMoments

# Import services
from app.services import features_service, summary_service

# Import Exceptions
from app import exceptions

from tests.conftest import continuous_summary


def test_scalar_moments(rng):
    data = rng.standard_normal((10, 3))
    moments = summary_service.compute_scalar_moments(data)
    assert moments.shape == (3, 3)
    assert np.allclose(moments[:, 0], 10)
    assert np.allclose(moments[:, 1], data.sum(axis=0))
    assert np.allclose(moments[:, 2], (data ** 2).sum(axis=0))


def test_scalar_moments_reject_nan():
    with pytest.raises(exceptions.InputError, match="row 1, column 0"):
        summary_service.compute_scalar_moments(np.array([[1.0, 2.0], [np.nan, 0.0]]))


def test_local_moments_are_raw_feature_sums(rng):
    data = rng.standard_normal((12, 3))
    summary, maps = continuous_summary(data)
    phi = features_service.embed_matrix(data, maps)
    assert summary.n == 12
    assert np.allclose(summary.m1, phi.sum(axis=0))
    assert np.allclose(summary.m2[0, 2], phi[:, 0, :].T @ phi[:, 2, :])


def test_split_summaries_match_pooled(rng):
    data = rng.standard_normal((90, 3))
    pooled, maps = continuous_summary(data)
    parts = [summary_service.compute_local_moments(chunk, maps, client_id=f"c{k}", domain_index=k + 1)
             for k, chunk in enumerate(np.array_split(data, 4))]
    split = summary_service.aggregate(parts)
    assert split.n == pooled.n
    assert split.n_clients == 4
    assert np.allclose(split.m1, pooled.m1, rtol=1e-10, atol=1e-10)
    assert np.allclose(split.centered, pooled.centered, rtol=1e-10, atol=1e-12)


def test_aggregate_ignores_arrival_order(rng):
    _, maps = continuous_summary(rng.standard_normal((4, 2)))
    a = summary_service.compute_local_moments(rng.standard_normal((20, 2)), maps, client_id="a")
    b = summary_service.compute_local_moments(rng.standard_normal((30, 2)), maps, client_id="b", domain_index=2)
    forward, backward = summary_service.aggregate([a, b]), summary_service.aggregate([b, a])
    assert np.array_equal(forward.m1, backward.m1)
    assert np.array_equal(forward.m2, backward.m2)


def test_aggregate_rejects_shape_mismatch():
    a = LocalMoments(client_id="a", domain_index=1, n_k=1, s1=np.zeros((2, 3)), s2=np.zeros((2, 2, 3, 3)))
    b = LocalMoments(client_id="b", domain_index=2, n_k=1, s1=np.zeros((3, 3)), s2=np.zeros((3, 3, 3, 3)))
    with pytest.raises(exceptions.ProtocolError):
        summary_service.aggregate([a, b])


def test_aggregate_rejects_empty():
    with pytest.raises(exceptions.ProtocolError):
        summary_service.aggregate([])


def test_centered_cov_matches_centered_features(rng):
    data = rng.standard_normal((40, 3))
    summary, maps = continuous_summary(data)
    phi = features_service.embed_matrix(data, maps)
    centered = phi - phi.mean(axis=0)
    expected = centered[:, 0, :].T @ (centered[:, 1, :] + centered[:, 2, :]) / 40
    assert np.allclose(summary_service.centered_cov(summary, 0, [1, 2]), expected, rtol=1e-10, atol=1e-12)


def test_kernel_trace_identities(rng):
    # Explicit feature Gram matrices on a tiny instance
    n = 8
    data = rng.standard_normal((n, 2))
    summary, maps = continuous_summary(data, h=3)
    phi = features_service.embed_matrix(data, maps)
    centering = np.eye(n) - np.ones((n, n)) / n
    k_x = centering @ phi[:, 0, :] @ phi[:, 0, :].T @ centering
    k_y = centering @ phi[:, 1, :] @ phi[:, 1, :].T @ centering
    k_xy = centering @ phi[:, 0, :] @ phi[:, 1, :].T @ centering
    c_xy = summary_service.centered_cov(summary, 0, 1)
    c_xx = summary_service.centered_cov(summary, 0, 0)

    assert np.trace(k_x @ k_y) == pytest.approx(n ** 2 * np.sum(c_xy ** 2), rel=1e-8, abs=1e-10)
    assert np.trace(k_x) == pytest.approx(n * np.trace(c_xx), rel=1e-8, abs=1e-10)
    assert np.trace(k_xy) == pytest.approx(n * np.trace(c_xy), rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("a, b", [([], [0]), ([0], [5])])
def test_centered_cov_rejects_bad_sets(rng, a, b):
    summary, _ = continuous_summary(rng.standard_normal((5, 3)))
    with pytest.raises(exceptions.InputError):
        summary_service.centered_cov(summary, a, b)
