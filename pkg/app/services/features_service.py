import logging
from typing import List, Optional, Sequence

import numpy as np

# Import models
from app.models import (ContinuousFeatureMap, ContinuousVariable, DiscreteFeatureMap, DiscreteVariable,
                        FeatureMap, FeatureSpec)

# Import Exceptions
from app import exceptions


# Feature Map Draws
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def _continuous_map(seed: int, index: int, h: int, sigma: float) -> ContinuousFeatureMap:
    rng = np.random.default_rng([seed, index])
    w = rng.standard_normal(h) / sigma
    b = rng.uniform(0.0, 2.0 * np.pi, h)
    return ContinuousFeatureMap(w=w, b=b)


def _discrete_map(seed: int, index: int, h: int, k: int, one_hot: bool) -> DiscreteFeatureMap:
    if one_hot and h >= k:
        signs = np.zeros((k, h))
        signs[np.arange(k), np.arange(k)] = 1.0
        return DiscreteFeatureMap(signs=signs, one_hot=True)

    # Each row has its own stream so adding categories never changes earlier rows
    rows = [np.random.default_rng([seed, index, category]).choice([-1.0, 1.0], size=h) for category in range(1, k + 1)]
    return DiscreteFeatureMap(signs=np.vstack(rows))


def draw_feature_maps(spec: FeatureSpec, n_variables: Optional[int] = None) -> List[FeatureMap]:
    """
    One map per variable, fully determined by (spec.seed, variable index[, category]).
    """
    n_variables = spec.n_variables if n_variables is None else n_variables
    if n_variables != spec.n_variables:
        raise exceptions.InputError(f"Feature spec describes {spec.n_variables} variables, {n_variables} requested.")

    maps: List[FeatureMap] = []
    for index, variable in enumerate(spec.variables):
        if isinstance(variable, ContinuousVariable):
            maps.append(_continuous_map(spec.seed, index, spec.h, variable.sigma))
        else:
            maps.append(_discrete_map(spec.seed, index, spec.h, variable.k, spec.one_hot_discrete))
    return maps


def build_feature_spec(sigmas: Sequence[float], n_domains: int, h: int, seed: int, one_hot_discrete: bool = False) -> FeatureSpec:
    """
    Continuous variables with the given bandwidths followed by the discrete surrogate over n_domains categories.
    """
    variables = [ContinuousVariable(sigma=float(sigma)) for sigma in sigmas]
    variables.append(DiscreteVariable(k=n_domains))
    return FeatureSpec(h=h, seed=seed, variables=variables, one_hot_discrete=one_hot_discrete)


def bandwidths_from_moments(scalar_moments: np.ndarray) -> List[float]:
    """
    Global standard deviation per variable from pooled (count, sum, sum of squares) rows.
    """
    sigmas = []
    for index, (count, total, squares) in enumerate(np.asarray(scalar_moments, dtype=float)):
        variance = squares / count - (total / count) ** 2 if count > 0 else np.nan
        sigma = float(np.sqrt(max(variance, 0.0))) if np.isfinite(variance) else np.nan
        if not np.isfinite(sigma) or sigma <= 0:
            logging.warning(f"Variable {index} has zero or undefined spread; using bandwidth 1.0")
            sigma = 1.0
        sigmas.append(sigma)
    return sigmas


# Embeddings
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def embed_continuous(x: float, m: ContinuousFeatureMap) -> np.ndarray:
    if not np.isfinite(x):
        raise exceptions.InputError(f"Cannot embed non-finite value {x}.")
    return np.sqrt(2.0 / m.h) * np.cos(m.w * x + m.b)


def embed_discrete(k: int, m: DiscreteFeatureMap) -> np.ndarray:
    if int(k) != k or not 1 <= k <= m.k:
        raise exceptions.InputError(f"Category {k} is outside 1..{m.k}.")
    row = m.signs[int(k) - 1]
    if m.one_hot:
        return row.copy()
    return row / np.sqrt(m.h)


def embed_value(value: float, m: FeatureMap) -> np.ndarray:
    if isinstance(m, ContinuousFeatureMap):
        return embed_continuous(value, m)
    return embed_discrete(value, m)


def embed_set(values: Sequence[float], maps: Sequence[FeatureMap], h: Optional[int] = None) -> np.ndarray:
    """
    Sum of member embeddings. The empty set embeds to the zero h-vector, so h is required when maps is empty.
    """
    if len(values) != len(maps):
        raise exceptions.InputError(f"Got {len(values)} values for {len(maps)} feature maps.")
    width = maps[0].h if maps else h
    if width is None or width < 1:
        raise exceptions.InputError("The empty set needs the feature width h.")
    if h is not None and any(m.h != h for m in maps):
        raise exceptions.InputError(f"Feature maps do not all have width {h}.")

    total = np.zeros(width)
    for value, m in zip(values, maps):
        total = total + embed_value(value, m)
    return total


def embed_column(column: np.ndarray, m: FeatureMap, column_index: int = 0) -> np.ndarray:
    """
    Vectorized embedding of one sample column, n x h.
    """
    column = np.asarray(column, dtype=float)
    bad = np.flatnonzero(~np.isfinite(column))
    if bad.size:
        raise exceptions.InputError(f"Non-finite value at row {int(bad[0])}, column {column_index}.")

    if isinstance(m, ContinuousFeatureMap):
        return np.sqrt(2.0 / m.h) * np.cos(np.outer(column, m.w) + m.b)

    categories = column.astype(np.int64)
    out_of_range = np.flatnonzero((categories != column) | (categories < 1) | (categories > m.k))
    if out_of_range.size:
        row = int(out_of_range[0])
        raise exceptions.InputError(f"Category {column[row]} at row {row}, column {column_index} is outside 1..{m.k}.")
    table = m.signs if m.one_hot else m.signs / np.sqrt(m.h)
    return table[categories - 1]


def embed_matrix(data: np.ndarray, maps: Sequence[FeatureMap]) -> np.ndarray:
    """
    Embed an n x d' sample matrix into an n x d' x h feature tensor.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(maps):
        raise exceptions.InputError(f"Data of shape {data.shape} does not match {len(maps)} feature maps.")
    return np.stack([embed_column(data[:, j], m, j) for j, m in enumerate(maps)], axis=1)
