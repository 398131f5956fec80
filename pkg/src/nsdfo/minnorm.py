"""Minimum-norm point of a convex hull in the metric induced by B^{-1}.

Solves

    min_xi  xi^T B^{-1} xi   subject to  xi in conv(v_1, ..., v_p)

by projected gradient on the weight simplex. With B = I this is the
nonsmooth steepest-descent subproblem; with a general SPD ``B`` it is the
Newton-type one, and ``-B^{-1} xi*`` is the corresponding direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

__all__ = ["SpdMetric", "MinNormResult", "min_norm_point", "project_onto_simplex"]


class SpdMetric:
    """Symmetric positive definite matrix with a cached Cholesky factor.

    Construction fails for non-symmetric or non-positive-definite input, so a
    solve never has to deal with a bad metric.
    """

    def __init__(self, B):
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError(f"metric must be a square matrix, got shape {B.shape}")
        scale = max(1.0, float(np.max(np.abs(B))))
        if np.max(np.abs(B - B.T)) > 1e-12 * scale:
            raise ValueError("metric is not symmetric")
        try:
            self._chol = linalg.cho_factor(B)
        except linalg.LinAlgError as exc:
            raise ValueError("metric is not positive definite") from exc
        self.matrix = B

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def n(self):
        return self.matrix.shape[0]

    def solve(self, X):
        """Return B^{-1} X."""
        return linalg.cho_solve(self._chol, X)


@dataclass
class MinNormResult:
    weights: np.ndarray
    point: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int


def _simplex_threshold(w):
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, w.size + 1)
    rho = np.count_nonzero(u - css / k > 0)
    return np.maximum(w - css[rho - 1] / rho, 0.0)


def project_onto_simplex(w):
    """Euclidean projection onto {lam >= 0, sum(lam) = 1} (sort-and-threshold)."""
    w = np.asarray(w, dtype=float)
    # the second pass removes cancellation error when the entries of w are large
    return _simplex_threshold(_simplex_threshold(w))


def _kkt_residual(lam, grad):
    # Variational inequality on vertices: grad_j >= lam . grad for every j.
    return max(0.0, float(lam @ grad - np.min(grad)))


def min_norm_point(V, metric=None, tol=1e-8, max_iter=None):
    """Minimum B^{-1}-norm point of the convex hull of the columns of ``V``.

    Parameters
    ----------
    V : array, shape (n, p)
        Generators as columns.
    metric : SpdMetric, optional
        Defaults to the identity.
    tol : float
        Target for the KKT residual ``max_j (lam^T Q lam - (Q lam)_j)``
        with ``Q = V^T B^{-1} V``; half of this quantity is exactly
        ``-min_j xi^T B^{-1} (v_j - xi)``.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    n, p = V.shape
    if p == 0:
        raise ValueError("at least one generator is required")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if metric is None:
        metric = SpdMetric.identity(n)
    if metric.n != n:
        raise ValueError(f"metric is {metric.n}x{metric.n} but generators live in R^{n}")

    W = metric.solve(V)
    Q = V.T @ W
    Q = 0.5 * (Q + Q.T)
    if max_iter is None:
        max_iter = 10 * p * n

    lam = np.full(p, 1.0 / p)
    step = 1.0 / max(float(np.max(np.abs(np.diag(Q)))), 1e-300)
    it = 0
    g = 2 * Q @ lam
    obj = float(lam @ Q @ lam)
    res = _kkt_residual(lam, g)
    while res > tol and it < max_iter:
        it += 1
        # Armijo backtracking along the projection arc.
        t = step
        while True:
            trial = project_onto_simplex(lam - t * g)
            diff = trial - lam
            trial_obj = float(trial @ Q @ trial)
            if trial_obj <= obj + g @ diff + diff @ diff / (2 * t) or t < 1e-30:
                break
            t *= 0.5
        if np.array_equal(trial, lam):
            break
        lam, obj = trial, trial_obj
        step = 2 * t
        g = 2 * Q @ lam
        res = _kkt_residual(lam, g)

    if res > tol:
        lam, obj, res = _active_set_polish(Q, lam, tol)

    point = V @ lam
    return MinNormResult(lam, point, float(point @ metric.solve(point)), res, it)


def _affine_minimizer(Q, idx):
    """Minimizer of lam^T Q lam over {sum(lam) = 1} restricted to ``idx``."""
    k = len(idx)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2 * Q[np.ix_(idx, idx)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    return np.linalg.lstsq(K, rhs, rcond=None)[0][:k]


def _active_set_polish(Q, lam, tol):
    """Wolfe-type major/minor cycles warm-started from ``lam``.

    Used when projected gradient stalls on a rank-deficient ``Q``; the
    active-set iteration terminates finitely on the exact face.
    """
    p = lam.size
    lam = lam.copy()
    lam[lam < 1e-14] = 0.0
    lam /= lam.sum()
    for _ in range(10 * p + 10):
        g = 2 * Q @ lam
        j = int(np.argmin(g))
        if _kkt_residual(lam, g) <= tol:
            break
        support = np.flatnonzero(lam > 0).tolist()
        if j not in support:
            support.append(j)
        # minor cycles: move toward the affine minimizer, dropping vertices that hit zero
        while True:
            idx = np.array(support)
            alpha = _affine_minimizer(Q, idx)
            cur = lam[idx]
            if np.all(alpha > 0):
                lam = np.zeros(p)
                lam[idx] = alpha
                break
            d = alpha - cur
            neg = d < 0
            t = min(1.0, float(np.min(cur[neg] / -d[neg])))
            new = np.maximum(cur + t * d, 0.0)
            lam = np.zeros(p)
            lam[idx] = new
            lam[lam < 1e-14] = 0.0
            lam /= lam.sum()
            support = np.flatnonzero(lam > 0).tolist()
            if len(support) <= 1:
                break
    return lam, float(lam @ Q @ lam), _kkt_residual(lam, 2 * Q @ lam)
