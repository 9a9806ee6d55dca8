"""Principal component analysis on top of an in-repo Jacobi eigensolver.

Feature dimensions here are small (at most a few hundred), so a cyclic
Jacobi sweep over the sample covariance is both simple and fast enough.
Component signs are fixed deterministically: the largest-magnitude entry of
each component is made positive, because downstream per-class statistics
depend on signs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PcaModel:
    """Fitted projection: ``project(x) = components @ (x - mean)``."""

    mean: np.ndarray                # (d,)
    components: np.ndarray          # (k, d), rows orthonormal
    explained_variance: np.ndarray  # (k,), non-increasing


def _jacobi_eigh(a: np.ndarray, max_sweeps: int = 64):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors as columns,
    unsorted. Converges to machine precision for the symmetric matrices that
    arise as sample covariances.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    vecs = np.eye(n)
    if n == 1:
        return np.array([a[0, 0]]), vecs
    scale = np.sqrt(np.sum(a * a))
    if scale == 0.0:
        return np.zeros(n), vecs
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J and V <- V J for the (p, q) rotation
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = vecs[:, p].copy(), vecs[:, q].copy()
                vecs[:, p] = c * vp - s * vq
                vecs[:, q] = s * vp + c * vq
    return np.diag(a).copy(), vecs


def fit_pca(X, k: int) -> PcaModel:
    """Fit the top-k principal components of the rows of X.

    Sample covariance uses 1/(n-1) normalization; components are ordered by
    descending eigenvalue. Rank-deficient covariances are fine (trailing
    eigenvalues clip to zero).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d sample matrix")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least two samples to fit PCA")
    if not 1 <= k <= d:
        raise ValueError(f"k={k} must be in [1, {d}]")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = _jacobi_eigh(cov)
    order = np.argsort(-eigvals, kind="stable")[:k]
    components = eigvecs[:, order].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0
    variance = np.maximum(eigvals[order], 0.0)
    return PcaModel(mean=mean, components=components, explained_variance=variance)


def pca_project(model: PcaModel, x) -> np.ndarray:
    """Project a vector (d,) or batch (n, d) onto the fitted components."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.mean.shape[0]:
        raise ValueError(
            f"input dimension {x.shape[-1]} does not match fitted dimension "
            f"{model.mean.shape[0]}"
        )
    proj = (x - model.mean) @ model.components.T
    return proj[0] if single else proj
