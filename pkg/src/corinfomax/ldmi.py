"""Log-determinant (correlative) information measures and a small batch solver.

``ld_mutual_info`` omits the additive constant ``(m + n)/2 log(2 pi e)`` that
cancels in optimization; ``ld_entropy`` keeps its constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .domains import DomainSpec, project_columns
from .exceptions import EmptyDataError, NumericalDegeneracyError

_LOG_2PIE = np.log(2.0 * np.pi * np.e)


@dataclass(frozen=True)
class SampleStats:
    R_x: np.ndarray
    R_y: np.ndarray
    R_xy: np.ndarray
    N: int

    def joint(self) -> np.ndarray:
        return np.block([[self.R_x, self.R_xy], [self.R_xy.T, self.R_y]])


def sample_stats(X, Y, centered=False) -> SampleStats:
    """Correlations ``(1/N) X X'``, ``(1/N) Y Y'``, ``(1/N) X Y'`` of column samples."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"X has {X.shape[1]} samples but Y has {Y.shape[1]}")
    N = X.shape[1]
    if N == 0:
        raise EmptyDataError("no samples")
    if centered:
        X = X - X.mean(axis=1, keepdims=True)
        Y = Y - Y.mean(axis=1, keepdims=True)
    R_x = X @ X.T / N
    R_y = Y @ Y.T / N
    return SampleStats(0.5 * (R_x + R_x.T), 0.5 * (R_y + R_y.T), X @ Y.T / N, N)


def logdet_pd(M) -> float:
    """log det of a symmetric positive definite matrix through its Cholesky factor."""
    try:
        c, _ = cho_factor(M, lower=True, check_finite=True)
    except np.linalg.LinAlgError:
        raise NumericalDegeneracyError("matrix is not positive definite") from None
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def _check_psd(R, tol=1e-8):
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[0] != R.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(R)))) if R.size else 1.0
    if np.max(np.abs(R - R.T), initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    if R.size and np.linalg.eigvalsh(R)[0] < -tol * scale:
        raise ValueError("matrix is not positive semidefinite")
    return R


def ld_entropy(R, eps, d=None) -> float:
    """``1/2 log det(R + eps I) + d/2 log(2 pi e)``."""
    R = _check_psd(R)
    d = R.shape[0] if d is None else d
    return 0.5 * logdet_pd(R + eps * np.eye(R.shape[0])) + 0.5 * d * _LOG_2PIE


def ld_joint_entropy(stats: SampleStats, eps) -> float:
    """LD-entropy of the stacked vector [x; y]."""
    return ld_entropy(stats.joint(), eps)


def error_corr(stats: SampleStats, eps=0.0) -> np.ndarray:
    """``R_y - R_xy' (R_x + eps I)^-1 R_xy``: error correlation of the best linear estimate of y from x."""
    m = stats.R_x.shape[0]
    K = np.linalg.solve(stats.R_x + eps * np.eye(m), stats.R_xy)
    Re = stats.R_y - stats.R_xy.T @ K
    return 0.5 * (Re + Re.T)


def _inner_pd(R, eps):
    lam_min = np.linalg.eigvalsh(R)[0]
    if lam_min < -1e-8:
        raise NumericalDegeneracyError(f"conditional correlation is indefinite (min eigenvalue {lam_min:.3e})")
    return logdet_pd(R + eps * np.eye(R.shape[0]))


def ld_mutual_info(stats: SampleStats, eps) -> float:
    """``1/2 log det(R_y + eps I) - 1/2 log det(R_e + eps I)`` with ``R_e = error_corr(stats, eps)``."""
    n = stats.R_y.shape[0]
    return 0.5 * logdet_pd(stats.R_y + eps * np.eye(n)) - 0.5 * _inner_pd(error_corr(stats, eps), eps)


def ld_mutual_info_xform(stats: SampleStats, eps) -> float:
    """The same quantity with the roles of x and y exchanged."""
    swapped = SampleStats(stats.R_y, stats.R_x, stats.R_xy.T, stats.N)
    m = stats.R_x.shape[0]
    return 0.5 * logdet_pd(stats.R_x + eps * np.eye(m)) - 0.5 * _inner_pd(error_corr(swapped, eps), eps)


def weighted_corr(samples, zeta, k=None) -> np.ndarray:
    """Exponentially weighted correlation ``((1-zeta)/(1-zeta^k)) sum_i zeta^(k-i) v_i v_i'``.

    ``samples`` is a (d, K) array of column samples or a sequence of vectors;
    the first ``k`` samples (default all) enter the sum.
    """
    V = np.asarray(samples, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    elif not isinstance(samples, np.ndarray):
        V = V.T  # sequence of vectors
    K = V.shape[1]
    k = K if k is None else int(k)
    if k < 1:
        raise EmptyDataError("k must be at least 1")
    if k > K:
        raise ValueError(f"k = {k} exceeds the {K} available samples")
    if not 0.0 < zeta < 1.0:
        raise ValueError("zeta must lie in (0, 1)")
    w = zeta ** np.arange(k - 1, -1, -1, dtype=float)
    Vk = V[:, :k]
    R = (Vk * w) @ Vk.T * ((1.0 - zeta) / (1.0 - zeta**k))
    return 0.5 * (R + R.T)


def batch_objective(X, Y, eps) -> float:
    return ld_mutual_info(sample_stats(X, Y), eps)


def batch_gradient(X, Y, eps):
    """Gradient of ``batch_objective`` with respect to Y."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    N = Y.shape[1]
    st = sample_stats(X, Y)
    n, m = Y.shape[0], X.shape[0]
    Px = np.linalg.solve(st.R_x + eps * np.eye(m), X)  # (R_x + eps I)^-1 X
    YM = Y - st.R_xy.T @ Px
    Re = error_corr(st, eps)
    Gy = np.linalg.solve(st.R_y + eps * np.eye(n), Y)
    Ge = np.linalg.solve(Re + eps * np.eye(n), YM)
    return (Gy - Ge) / N


def _pca_start(X, domain: DomainSpec):
    n = domain.n
    U, s, _ = np.linalg.svd(X / np.sqrt(X.shape[1]), full_matrices=False)
    Z = (U[:, :n] / s[:n]).T @ X  # unit-power whitened principal components
    lo, hi = domain.box()
    Z = 0.5 * (lo + hi)[:, None] + Z * (0.5 * (hi - lo) / np.sqrt(3.0))[:, None]
    return project_columns(domain, Z)


def batch_solver_oracle(X, domain: DomainSpec, eps=1e-3, iters=5000, step=1.0, Y0=None,
                        max_backtracks=30, tol=1e-12):
    """Projected gradient ascent on the batch LD-MI objective over outputs in ``domain``.

    Each step tries ``Y + t G`` projected column-wise, halving ``t`` until the
    objective does not decrease.  Returns ``(Y, trace)``; the trace is nondecreasing.
    """
    X = np.asarray(X, dtype=float)
    Y = _pca_start(X, domain) if Y0 is None else project_columns(domain, np.asarray(Y0, dtype=float))
    f = batch_objective(X, Y, eps)
    trace = [f]
    t = float(step)
    for _ in range(iters):
        G = batch_gradient(X, Y, eps)
        for _ in range(max_backtracks):
            Y_new = project_columns(domain, Y + t * G)
            try:
                f_new = batch_objective(X, Y_new, eps)
            except NumericalDegeneracyError:
                f_new = -np.inf
            if f_new >= f:
                break
            t *= 0.5
        else:
            warnings.warn("batch oracle stalled: no ascent step found", RuntimeWarning, stacklevel=2)
            break
        gain = f_new - f
        Y, f = Y_new, f_new
        trace.append(f)
        t *= 2.0
        if gain <= tol * max(1.0, abs(f)):
            break
    return Y, np.array(trace)
