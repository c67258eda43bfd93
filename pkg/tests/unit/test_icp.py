import numpy as np
import pytest

# Import models
from app.models import Direction

# Import services
from app.services import features_service, federation_service, icp_service

# Import Exceptions
from app import exceptions

from tests.conftest import federate


def changing_pair(K: int = 6, n_k: int = 80, seed: int = 0):
    """X -> Y where the cause distribution and the mechanism both vary by domain."""
    rng = np.random.default_rng(seed)
    datasets = []
    for _ in range(K):
        x = rng.uniform(-2, 2) + rng.uniform(0.5, 2) * rng.standard_normal(n_k)
        y = rng.uniform(0.5, 2.5) * x + rng.uniform(0.5, 2) * rng.standard_normal(n_k)
        datasets.append(np.column_stack([x, y]))
    return federate(datasets)


def test_proxy_self_is_symmetric_psd():
    summary = changing_pair()
    proxy = icp_service.proxy_self(summary, 0)
    assert np.allclose(proxy, proxy.T)
    assert np.linalg.eigvalsh(proxy).min() > -1e-10


def test_scores_are_consistent_with_decision():
    score = icp_service.score_direction(changing_pair(), 0, 1)
    assert score.delta_xy >= 0 and score.delta_yx >= 0
    if score.decision == Direction.FORWARD:
        assert score.delta_xy < score.delta_yx
    elif score.decision == Direction.BACKWARD:
        assert score.delta_xy > score.delta_yx


def test_swapping_arguments_swaps_scores():
    summary = changing_pair(seed=3)
    forward = icp_service.score_direction(summary, 0, 1)
    backward = icp_service.score_direction(summary, 1, 0)
    assert forward.delta_xy == pytest.approx(backward.delta_yx)
    assert forward.delta_yx == pytest.approx(backward.delta_xy)


def test_tie_tolerance():
    score = icp_service.score_direction(changing_pair(), 0, 1, tie_tol=1.0)
    assert score.decision == Direction.TIE


def test_trace_line_format():
    line = icp_service.score_direction(changing_pair(), 0, 1).trace_line()
    assert line.startswith("ICP X=0 Y=1 dxy=")
    assert " dyx=" in line


def test_non_changing_module_is_a_precondition_violation(rng):
    # A single client gives a constant surrogate
    summary = federate([rng.standard_normal((60, 2))])
    with pytest.raises(exceptions.PreconditionViolation):
        icp_service.score_direction(summary, 0, 1)


def test_same_variable_is_rejected():
    with pytest.raises(exceptions.InputError):
        icp_service.score_direction(changing_pair(), 1, 1)


# Kernel-side oracle
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def eight_sample_case(gamma: float):
    """
    Two clients of four rows; returns the summary and centered Gram matrices of X, Y, the pair and the surrogate.
    """
    rng = np.random.default_rng(8)
    parts = [np.column_stack([x, 0.7 * x + rng.standard_normal(4)]) for x in (rng.standard_normal(4) + shift for shift in (0.0, 1.5))]
    summary, server = federation_service.simulate(parts, h=4, seed=2)

    labelled = np.vstack([np.column_stack([part, np.full(len(part), k + 1.0)]) for k, part in enumerate(parts)])
    phi = features_service.embed_matrix(labelled, features_service.draw_feature_maps(server.feature_spec()))
    phi = phi - phi.mean(axis=0)
    gram = {name: block @ block.T for name, block in
            (("x", phi[:, 0]), ("y", phi[:, 1]), ("pair", phi[:, 0] + phi[:, 1]), ("u", phi[:, 2]))}

    n = len(labelled)
    m = np.linalg.inv(gram["u"] / n + gamma * np.eye(n))
    weight = m @ gram["u"] @ gram["u"] @ m
    return summary, gram, weight, n


def test_proxy_traces_match_kernel_expression():
    gamma = 1e-2
    summary, gram, weight, n = eight_sample_case(gamma)
    for variables, name in ((0, "x"), (1, "y"), ((0, 1), "pair"), ((1, 0), "pair")):
        expected = np.trace(weight @ gram[name]) / n ** 3
        assert np.trace(icp_service.proxy_self(summary, variables, gamma)) == pytest.approx(expected, rel=1e-9)


def test_direction_scores_match_kernel_expression():
    gamma = 1e-2
    summary, gram, weight, n = eight_sample_case(gamma)
    score = icp_service.score_direction(summary, 0, 1, gamma)

    def delta(name: str) -> float:
        cross = np.trace(weight @ gram["pair"] @ weight @ gram[name])
        return cross / (np.trace(weight @ gram[name]) * np.trace(weight @ gram["pair"]))

    assert score.delta_xy == pytest.approx(delta("x"), rel=1e-8)
    assert score.delta_yx == pytest.approx(delta("y"), rel=1e-8)
