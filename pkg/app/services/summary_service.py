import logging
from typing import Iterable, List, Sequence, Union

import numpy as np

# Import models
from app.models import FeatureMap, GlobalSummary, LocalMoments

# Import services
from app.services.features_service import embed_matrix

# Import Exceptions
from app import exceptions


VariableSet = Union[int, Iterable[int]]


def _as_set(a: VariableSet) -> List[int]:
    if isinstance(a, (int, np.integer)):
        return [int(a)]
    return sorted(int(i) for i in a)


def compute_scalar_moments(data: np.ndarray) -> np.ndarray:
    """
    (count, sum, sum of squares) per column, d x 3.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise exceptions.InputError(f"Scalar moments need a nonempty n x d matrix, got shape {data.shape}.")
    _check_finite(data)
    count = np.full(data.shape[1], float(data.shape[0]))
    return np.column_stack([count, data.sum(axis=0), (data ** 2).sum(axis=0)])


def compute_local_moments(data: np.ndarray, maps: Sequence[FeatureMap], client_id: str = "local",
                          domain_index: int = 1) -> LocalMoments:
    """
    Raw first and second feature moments of one client's n_k x d' matrix, surrogate column last.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise exceptions.InputError(f"Client {client_id} has no samples.")
    _check_finite(data)

    phi = embed_matrix(data, maps)
    s1 = phi.sum(axis=0)
    s2 = np.einsum('nah,nbg->abhg', phi, phi)
    scalar = compute_scalar_moments(data[:, :-1]) if data.shape[1] > 1 else None
    return LocalMoments(client_id=client_id, domain_index=domain_index, n_k=data.shape[0],
                        s1=s1, s2=s2, scalar_moments=scalar)


def aggregate(parts: Sequence[LocalMoments]) -> GlobalSummary:
    """
    Sum client moments in ascending client order.
    """
    if not parts:
        raise exceptions.ProtocolError("No client moments to aggregate.")

    ordered = sorted(parts, key=lambda part: (part.client_id, part.domain_index))
    first = ordered[0]
    m1 = np.zeros_like(first.s1)
    m2 = np.zeros_like(first.s2)
    n = 0
    for part in ordered:
        if part.s1.shape != first.s1.shape or part.s2.shape != first.s2.shape:
            raise exceptions.ProtocolError(
                f"Moment shapes {part.s1.shape}/{part.s2.shape} differ from {first.s1.shape}/{first.s2.shape}.",
                client_id=part.client_id)
        m1 = m1 + part.s1
        m2 = m2 + part.s2
        n += part.n_k

    logging.info(f"Aggregated {len(ordered)} client summaries over {n} samples")
    return GlobalSummary(n=n, m1=m1, m2=m2, n_clients=len(ordered))


def centered_cov(s: GlobalSummary, a: VariableSet, b: VariableSet) -> np.ndarray:
    """
    Globally centered covariance between the summed feature embeddings of two variable sets.
    """
    rows, cols = _as_set(a), _as_set(b)
    if not rows or not cols:
        raise exceptions.InputError("centered_cov needs two nonempty variable sets.")
    for index in rows + cols:
        if not 0 <= index < s.n_variables:
            raise exceptions.InputError(f"Variable {index} is outside 0..{s.n_variables - 1}.")
    return s.centered[np.ix_(rows, cols)].sum(axis=(0, 1))


def _check_finite(data: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        row, column = (int(v) for v in bad[0])
        raise exceptions.InputError(f"Non-finite value at row {row}, column {column}.")
