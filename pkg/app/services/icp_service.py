import logging
from typing import Tuple

import numpy as np
from scipy import linalg

# Import models
from app.models import Direction, GlobalSummary, IcpScore

# Import services
from app.services.summary_service import VariableSet, centered_cov

# Import Exceptions
from app import exceptions


TRACE_TOL = 1e-14


def _surrogate_weight(s: GlobalSummary, gamma: float) -> np.ndarray:
    """
    (C_UU + gamma I)^-1 C_UU (C_UU + gamma I)^-1 for the surrogate U.
    """
    u = s.d
    c_uu = centered_cov(s, u, u)
    try:
        inverse = linalg.solve(c_uu + gamma * np.eye(s.h), np.eye(s.h), assume_a='pos')
    except (linalg.LinAlgError, ValueError) as e:
        raise exceptions.NumericError(f"Ridge solve on the surrogate block failed with gamma={gamma}: {str(e)}")
    return inverse @ c_uu @ inverse


def proxy_self(s: GlobalSummary, a: VariableSet, gamma: float = 1e-3) -> np.ndarray:
    weight = _surrogate_weight(s, gamma)
    c_au = centered_cov(s, a, s.d)
    proxy = c_au @ weight @ c_au.T
    return 0.5 * (proxy + proxy.T)


def proxy_cross(s: GlobalSummary, x: int, pair: Tuple[int, int], gamma: float = 1e-3) -> np.ndarray:
    """
    Cross proxy between X and the joint (summed) embedding of the pair.
    """
    weight = _surrogate_weight(s, gamma)
    return centered_cov(s, x, s.d) @ weight @ centered_cov(s, s.d, sorted(pair))


def score_direction(s: GlobalSummary, x: int, y: int, gamma: float = 1e-3, tie_tol: float = 1e-9) -> IcpScore:
    """
    Compare how dependently the two modules change across domains; the smaller score marks the causal direction.
    """
    if x == y:
        raise exceptions.InputError(f"Cannot score a variable against itself: {x}.")

    pair = tuple(sorted((x, y)))
    trace_x = float(np.trace(proxy_self(s, x, gamma)))
    trace_y = float(np.trace(proxy_self(s, y, gamma)))
    trace_pair = float(np.trace(proxy_self(s, pair, gamma)))
    if min(trace_x, trace_y, trace_pair) <= TRACE_TOL:
        raise exceptions.PreconditionViolation(
            f"Variables {x} and {y} are not both changing modules (proxy traces {trace_x:.3e}, {trace_y:.3e}); skip direction scoring.")

    delta_xy = float(np.sum(proxy_cross(s, x, pair, gamma) ** 2) / (trace_x * trace_pair))
    delta_yx = float(np.sum(proxy_cross(s, y, pair, gamma) ** 2) / (trace_y * trace_pair))

    if abs(delta_xy - delta_yx) <= tie_tol * max(delta_xy, delta_yx):
        decision = Direction.TIE
    elif delta_xy < delta_yx:
        decision = Direction.FORWARD
    else:
        decision = Direction.BACKWARD

    logging.debug(f"Direction scores for ({x}, {y}): {delta_xy:.6e} vs {delta_yx:.6e}")
    return IcpScore(x=x, y=y, delta_xy=delta_xy, delta_yx=delta_yx, decision=decision)
