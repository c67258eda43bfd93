import logging
import threading
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, stats
from scipy.spatial.distance import pdist, squareform

# Import models
from app.models import CITestResult, GlobalSummary

# Import services
from app.services.features_service import bandwidths_from_moments
from app.services.summary_service import VariableSet, centered_cov, compute_scalar_moments

# Import Exceptions
from app import exceptions


DEGENERATE_TOL = 1e-14

trace_logger = logging.getLogger("fedcdh.trace")


def _as_tuple(a: VariableSet) -> Tuple[int, ...]:
    if isinstance(a, (int, np.integer)):
        return (int(a),)
    return tuple(sorted(int(i) for i in a))


def _ridge_solve(s: GlobalSummary, z: Tuple[int, ...], rhs: np.ndarray, gamma: float) -> np.ndarray:
    """
    (C_ZZ + gamma I)^-1 rhs.
    """
    c_zz = centered_cov(s, z, z)
    try:
        return linalg.solve(c_zz + gamma * np.eye(s.h), rhs, assume_a='pos')
    except (linalg.LinAlgError, ValueError) as e:
        raise exceptions.NumericError(f"Ridge solve failed for Z={z} with gamma={gamma}: {str(e)}")


def _check_sets(x: Tuple[int, ...], y: Tuple[int, ...], z: Tuple[int, ...]) -> None:
    if not x or not y:
        raise exceptions.InputError("Independence tests need nonempty X and Y.")
    if set(x) & set(y):
        raise exceptions.InputError(f"X={x} and Y={y} overlap.")
    if (set(x) | set(y)) & set(z):
        raise exceptions.InputError(f"Conditioning set Z={z} overlaps X={x} or Y={y}.")


# Partial Covariances
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def partial_cov(s: GlobalSummary, x: VariableSet, y: VariableSet, z: VariableSet = (), gamma: float = 1e-3) -> np.ndarray:
    """
    Ridge partial cross-covariance C_{X''Y|Z} with X'' the set X u Z.
    """
    x, y, z = _as_tuple(x), _as_tuple(y), _as_tuple(z)
    _check_sets(x, y, z)
    if gamma <= 0:
        raise exceptions.InvalidConfiguration(f"Ridge gamma must be positive, got {gamma}.")

    if not z:
        return centered_cov(s, x, y)

    xz = x + z
    correction = centered_cov(s, xz, z) @ _ridge_solve(s, z, centered_cov(s, z, y), gamma)
    return centered_cov(s, xz, y) - correction


def conditional_self_cov(s: GlobalSummary, a: VariableSet, z: VariableSet = (), gamma: float = 1e-3) -> np.ndarray:
    """
    C_AA - C_AZ (C_ZZ + gamma I)^-1 C_ZA, symmetrized.
    """
    a, z = _as_tuple(a), _as_tuple(z)
    if not a:
        raise exceptions.InputError("conditional_self_cov needs a nonempty set.")

    c_aa = centered_cov(s, a, a)
    if z:
        c_az = centered_cov(s, a, z)
        c_aa = c_aa - c_az @ _ridge_solve(s, z, c_az.T, gamma)
    return 0.5 * (c_aa + c_aa.T)


# Independence Test
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def gamma_parameters(mean: float, variance: float) -> Tuple[float, float]:
    """
    Moment-matched Gamma shape and scale.
    """
    return mean ** 2 / variance, variance / mean


def _gamma_decision(x: Tuple[int, ...], y: Tuple[int, ...], z: Tuple[int, ...], statistic: float, mean: float,
                    variance: float, alpha: float) -> CITestResult:
    if mean <= DEGENERATE_TOL or variance <= DEGENERATE_TOL:
        return CITestResult(x=x, y=y, z=z, statistic=statistic, mean=mean, variance=variance, k_hat=0.0,
                            theta_hat=0.0, p_value=1.0, independent=True, degenerate=True)

    k_hat, theta_hat = gamma_parameters(mean, variance)
    p_value = float(np.clip(stats.gamma.sf(statistic, a=k_hat, scale=theta_hat), 0.0, 1.0))
    return CITestResult(x=x, y=y, z=z, statistic=statistic, mean=mean, variance=variance, k_hat=k_hat,
                        theta_hat=theta_hat, p_value=p_value, independent=p_value > alpha)


def _canonical_sets(x: VariableSet, y: VariableSet, z: VariableSet, alpha: float) -> Tuple[Tuple[int, ...], ...]:
    if not 0 < alpha < 1:
        raise exceptions.InvalidConfiguration(f"alpha must lie strictly between 0 and 1, got {alpha}.")

    x, y, z = _as_tuple(x), _as_tuple(y), _as_tuple(z)
    if x == y:
        raise exceptions.InputError(f"Cannot test a variable set against itself: {x}.")
    _check_sets(x, y, z)
    if min(y) < min(x):
        x, y = y, x
    return x, y, z


def test_ci(s: GlobalSummary, x: VariableSet, y: VariableSet, z: VariableSet = (), gamma: float = 1e-3,
            alpha: float = 0.05) -> CITestResult:
    """
    Federated conditional independence test of X and Y given Z from the global summary.
    The set holding the lowest index plays the X'' role so the result does not depend on argument order.
    """
    x, y, z = _canonical_sets(x, y, z, alpha)

    p_cov = partial_cov(s, x, y, z, gamma)
    c_x = conditional_self_cov(s, x + z, z, gamma)
    c_y = conditional_self_cov(s, y, z, gamma)

    statistic = float(s.n * np.sum(p_cov ** 2))
    mean = float(np.trace(c_x) * np.trace(c_y))
    variance = float(2.0 * np.sum(c_x ** 2) * np.sum(c_y ** 2))
    return _gamma_decision(x, y, z, statistic, mean, variance, alpha)


# Centralized Kernel Test
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def gaussian_gram(data: np.ndarray, columns: Sequence[int], sigmas: Sequence[float]) -> np.ndarray:
    """
    Exact product Gaussian kernel exp(-sum_i (a_i - b_i)^2 / 2 sigma_i^2) over the given columns.
    """
    columns = list(columns)
    scaled = np.asarray(data, dtype=float)[:, columns] / np.asarray(sigmas, dtype=float)[columns]
    return np.exp(-0.5 * squareform(pdist(scaled, "sqeuclidean")))


def center_gram(k: np.ndarray) -> np.ndarray:
    return k - k.mean(axis=0, keepdims=True) - k.mean(axis=1, keepdims=True) + k.mean()


def gram_ci(k_x: np.ndarray, k_y: np.ndarray, k_z: Optional[np.ndarray] = None, gamma: float = 1e-3,
            alpha: float = 0.05, sets: Tuple[Tuple[int, ...], ...] = ((0,), (1,), ())) -> CITestResult:
    """
    Kernel-side test from uncentered Gram matrices of X'' = X u Z, Y and Z. The ridge acts through
    R = gamma (K_Z / n + gamma I)^-1, so statistic and null moments share the scaling of test_ci.
    """
    n = k_x.shape[0]
    k_x, k_y = center_gram(k_x), center_gram(k_y)
    if k_z is not None:
        try:
            r = linalg.solve(center_gram(k_z) / n + gamma * np.eye(n), gamma * np.eye(n), assume_a='pos')
        except (linalg.LinAlgError, ValueError) as e:
            raise exceptions.NumericError(f"Kernel ridge solve failed with gamma={gamma}: {str(e)}")
        r = 0.5 * (r + r.T)
    else:
        r = np.eye(n)

    a, b = r @ k_x, r @ k_y
    statistic = float(np.sum((a @ r) * k_y) / n)
    mean = float(np.trace(a) * np.trace(b) / n ** 2)
    variance = float(2.0 * np.sum(a * a.T) * np.sum(b * b.T) / n ** 4)
    return _gamma_decision(*sets, statistic, mean, variance, alpha)


def pooled_kernel_ci(data: np.ndarray, x: VariableSet, y: VariableSet, z: VariableSet = (), gamma: float = 1e-3,
                     alpha: float = 0.05, sigmas: Optional[Sequence[float]] = None) -> CITestResult:
    """
    Centralized counterpart of test_ci on pooled rows with exact Gaussian kernels.
    Bandwidths default to the pooled standard deviation of each column.
    """
    x, y, z = _canonical_sets(x, y, z, alpha)
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise exceptions.InputError(f"Kernel test needs an n x d matrix with n >= 2, got shape {data.shape}.")
    if sigmas is None:
        sigmas = bandwidths_from_moments(compute_scalar_moments(data))

    k_z = gaussian_gram(data, z, sigmas) if z else None
    return gram_ci(gaussian_gram(data, x + z, sigmas), gaussian_gram(data, y, sigmas), k_z, gamma, alpha, (x, y, z))


# Memoizing Tester
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


class IndependenceTester:
    """
    Runs tests against one summary, caching by canonical (X, Y, Z) and keeping an audit trail.
    """

    def __init__(self, summary: GlobalSummary, gamma: float = 1e-3, alpha: float = 0.05):
        self.summary = summary
        self.gamma = gamma
        self.alpha = alpha
        self.cache: Dict[Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]], CITestResult] = {}
        self.trace: List[str] = []
        self.count = 0
        self._lock = threading.Lock()

    @staticmethod
    def key(x: VariableSet, y: VariableSet, z: Iterable[int] = ()) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
        x, y, z = _as_tuple(x), _as_tuple(y), _as_tuple(z)
        if min(y) < min(x):
            x, y = y, x
        return x, y, z

    def evaluate(self, x: VariableSet, y: VariableSet, z: Iterable[int] = ()) -> CITestResult:
        """
        Compute (or fetch) a result without recording it in the trail.
        """
        key = self.key(x, y, z)
        with self._lock:
            cached = self.cache.get(key)
        if cached is not None:
            return cached
        result = test_ci(self.summary, *key, gamma=self.gamma, alpha=self.alpha)
        with self._lock:
            self.cache.setdefault(key, result)
        return result

    def record(self, result: CITestResult) -> None:
        line = result.trace_line()
        self.count += 1
        self.trace.append(line)
        trace_logger.info(line)

    def test(self, x: VariableSet, y: VariableSet, z: Iterable[int] = ()) -> CITestResult:
        result = self.evaluate(x, y, z)
        self.record(result)
        return result
