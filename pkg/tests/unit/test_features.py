import numpy as np
import pytest

# Import models
from app.models import ContinuousVariable, DiscreteVariable, FeatureSpec

# Import services
from app.services import features_service

# Import Exceptions
from app import exceptions


def spec(h: int = 5, seed: int = 3, k: int = 4, one_hot: bool = False) -> FeatureSpec:
    return FeatureSpec(h=h, seed=seed, one_hot_discrete=one_hot,
                       variables=[ContinuousVariable(sigma=1.5), ContinuousVariable(sigma=0.5), DiscreteVariable(k=k)])


def test_feature_maps_are_deterministic():
    first = features_service.draw_feature_maps(spec())
    second = features_service.draw_feature_maps(spec())
    for a, b in zip(first[:2], second[:2]):
        assert np.array_equal(a.w, b.w)
        assert np.array_equal(a.b, b.b)
    assert np.array_equal(first[2].signs, second[2].signs)


def test_feature_maps_depend_on_seed():
    first = features_service.draw_feature_maps(spec(seed=1))
    second = features_service.draw_feature_maps(spec(seed=2))
    assert not np.array_equal(first[0].w, second[0].w)


def test_bandwidth_scales_frequencies():
    maps = features_service.draw_feature_maps(FeatureSpec(h=5, seed=0, variables=[ContinuousVariable(sigma=2.0)]))
    raw = np.random.default_rng([0, 0]).standard_normal(5)
    assert np.allclose(maps[0].w, raw / 2.0)
    assert np.all((maps[0].b >= 0) & (maps[0].b <= 2 * np.pi))


def test_draw_rejects_wrong_variable_count():
    with pytest.raises(exceptions.InputError):
        features_service.draw_feature_maps(spec(), n_variables=5)


def test_embed_continuous_matches_definition():
    m = features_service.draw_feature_maps(spec())[0]
    expected = np.sqrt(2.0 / 5) * np.cos(m.w * 0.7 + m.b)
    assert np.allclose(features_service.embed_continuous(0.7, m), expected)


def test_embed_continuous_rejects_nan():
    m = features_service.draw_feature_maps(spec())[0]
    with pytest.raises(exceptions.InputError):
        features_service.embed_continuous(float("nan"), m)


def test_embed_discrete_rows_have_unit_norm():
    m = features_service.draw_feature_maps(spec())[2]
    assert set(np.unique(m.signs)) <= {-1.0, 1.0}
    for category in range(1, 5):
        assert np.linalg.norm(features_service.embed_discrete(category, m)) == pytest.approx(1.0)


@pytest.mark.parametrize("category", [0, 5, 2.5])
def test_embed_discrete_rejects_out_of_range(category):
    m = features_service.draw_feature_maps(spec())[2]
    with pytest.raises(exceptions.InputError):
        features_service.embed_discrete(category, m)


def test_adding_categories_keeps_earlier_rows():
    small = features_service.draw_feature_maps(spec(k=3))[2]
    large = features_service.draw_feature_maps(spec(k=6))[2]
    assert np.array_equal(small.signs, large.signs[:3])


def test_one_hot_when_width_allows():
    m = features_service.draw_feature_maps(spec(h=5, k=4, one_hot=True))[2]
    assert m.one_hot
    assert np.array_equal(features_service.embed_discrete(2, m), np.eye(5)[1])


def test_one_hot_ignored_when_too_narrow():
    m = features_service.draw_feature_maps(spec(h=3, k=4, one_hot=True))[2]
    assert not m.one_hot


def test_embed_set_sums_members():
    maps = features_service.draw_feature_maps(spec())
    total = features_service.embed_set([0.2, -1.0, 3], maps)
    expected = sum(features_service.embed_value(v, m) for v, m in zip([0.2, -1.0, 3], maps))
    assert np.allclose(total, expected)


def test_empty_set_embeds_to_zero_vector():
    assert np.array_equal(features_service.embed_set([], [], h=5), np.zeros(5))
    with pytest.raises(exceptions.InputError):
        features_service.embed_set([], [])
    with pytest.raises(exceptions.InputError):
        features_service.embed_set([0.1], features_service.draw_feature_maps(spec(h=4))[:1], h=5)


def test_embed_matrix_matches_scalar_embeddings(rng):
    maps = features_service.draw_feature_maps(spec())
    data = np.column_stack([rng.standard_normal(6), rng.standard_normal(6), rng.integers(1, 5, 6)])
    phi = features_service.embed_matrix(data, maps)
    assert phi.shape == (6, 3, 5)
    for row in range(6):
        for j, m in enumerate(maps):
            assert np.allclose(phi[row, j], features_service.embed_value(data[row, j], m))


def test_embed_column_names_bad_row():
    m = features_service.draw_feature_maps(spec())[0]
    with pytest.raises(exceptions.InputError, match="row 2"):
        features_service.embed_column(np.array([0.0, 1.0, np.inf]), m)


def test_bandwidths_from_moments():
    moments = np.array([[4.0, 4.0, 8.0], [3.0, 6.0, 12.0]])
    sigmas = features_service.bandwidths_from_moments(moments)
    assert sigmas[0] == pytest.approx(1.0)
    # Zero spread falls back to unit bandwidth
    assert sigmas[1] == 1.0


def test_build_feature_spec_appends_surrogate():
    built = features_service.build_feature_spec([1.0, 2.0], n_domains=3, h=4, seed=9)
    assert built.n_variables == 3
    assert isinstance(built.variables[-1], DiscreteVariable)
    assert built.variables[-1].k == 3


# Kernel approximation
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def test_random_features_approximate_gaussian_kernel(rng):
    sigma = 1.5
    points = rng.uniform(-3, 3, size=(20, 2))
    estimates = np.zeros(len(points))
    for seed in range(10):
        m = features_service.draw_feature_maps(FeatureSpec(h=2000, seed=seed, variables=[ContinuousVariable(sigma=sigma)]))[0]
        estimates += [features_service.embed_continuous(x, m) @ features_service.embed_continuous(y, m) for x, y in points]
    estimates /= 10

    exact = np.exp(-(points[:, 0] - points[:, 1]) ** 2 / (2 * sigma ** 2))
    assert np.max(np.abs(estimates - exact)) < 0.05


def test_sign_features_are_unbiased_for_delta_kernel():
    same, cross = [], []
    for seed in range(100):
        m = features_service.draw_feature_maps(FeatureSpec(h=1000, seed=seed, variables=[DiscreteVariable(k=3)]))[0]
        one, two = features_service.embed_discrete(1, m), features_service.embed_discrete(2, m)
        same.append(one @ one)
        cross.append(one @ two)
    assert np.allclose(same, 1.0)
    assert abs(np.mean(cross)) <= 0.1
    assert max(abs(value) for value in cross) <= 1.0
