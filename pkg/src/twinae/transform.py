"""Per-class translation operator that spreads latent class means apart.

The plan is computed once from PCA-projected training data: per-class means,
a global center, per-class sign directions, scaled target means, and the
translation vector that carries each class mean onto its target. Applying
the plan is a rigid per-class translation, so within-class geometry is
preserved exactly while classes move to well-separated positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TransformPlan:
    """Frozen per-class translation statistics.

    Rows of the per-class arrays follow ``class_ids`` (ascending). Entries of
    ``t`` are +-1; ``mu_hat == scale[c] * t[c]`` and ``v == mu_hat - mu``.
    """

    class_ids: tuple
    mu: np.ndarray          # (m, k) class means in projected space
    mu_bar: np.ndarray      # (k,) center of the class means
    t: np.ndarray           # (m, k) sign directions
    scale_base: float
    scale: np.ndarray       # (m,) per-class scales
    mu_hat: np.ndarray      # (m, k) transformed means
    v: np.ndarray           # (m, k) translation vectors

    @property
    def latent_dim(self) -> int:
        return self.mu.shape[1]

    def index_of(self, class_id) -> int:
        try:
            return self.class_ids.index(class_id)
        except ValueError:
            raise ValueError(f"unknown class {class_id!r}; plan covers {self.class_ids}") from None

    def rows_for(self, class_ids) -> np.ndarray:
        """Map an array of class ids to plan row indices."""
        return np.array([self.index_of(c) for c in np.asarray(class_ids).ravel()])


def compute_class_means(xr, labels):
    """Arithmetic mean per class plus the mean of those class means.

    Returns ``(class_ids, mu, mu_bar)`` with classes in ascending id order.
    """
    xr = np.atleast_2d(np.asarray(xr, dtype=np.float64))
    labels = np.asarray(labels)
    if xr.shape[0] != labels.shape[0]:
        raise ValueError("sample and label counts differ")
    if labels.size == 0:
        raise ValueError("no samples: every class needs at least one sample")
    class_ids = np.unique(labels)
    mu = np.stack([xr[labels == c].mean(axis=0) for c in class_ids])
    mu_bar = mu.mean(axis=0)
    return class_ids, mu, mu_bar


def compute_directions(mu, mu_bar) -> np.ndarray:
    """Sign of each mean coordinate relative to the center; ties map to +1."""
    mu = np.asarray(mu, dtype=np.float64)
    return np.where(mu >= np.asarray(mu_bar, dtype=np.float64), 1.0, -1.0)


def compute_transformed_means(t, scale_base: float):
    """Scaled target means: class c (1-based row order) gets scale_base * (c + 2).

    Returns ``(scale, mu_hat)``.
    """
    if scale_base <= 0.0:
        raise ValueError("scale_base must be positive")
    t = np.asarray(t, dtype=np.float64)
    scale = scale_base * (np.arange(1, t.shape[0] + 1, dtype=np.float64) + 2.0)
    return scale, scale[:, None] * t


def compute_translation_vectors(mu, mu_hat) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64)
    mu_hat = np.asarray(mu_hat, dtype=np.float64)
    if mu.shape != mu_hat.shape:
        raise ValueError("mu and mu_hat shapes differ")
    return mu_hat - mu


def build_plan(xr, labels, scale_base: float, center: str = "class-means") -> TransformPlan:
    """Assemble the full plan from projected samples and their labels.

    ``center`` picks the reference point for the sign directions: the mean of
    the class means (default) or the mean of all projected samples.
    """
    class_ids, mu, mu_bar = compute_class_means(xr, labels)
    if center == "samples":
        mu_bar = np.atleast_2d(np.asarray(xr, dtype=np.float64)).mean(axis=0)
    elif center != "class-means":
        raise ValueError(f"center must be 'class-means' or 'samples', got {center!r}")
    t = compute_directions(mu, mu_bar)
    scale, mu_hat = compute_transformed_means(t, scale_base)
    v = compute_translation_vectors(mu, mu_hat)
    return TransformPlan(
        class_ids=tuple(class_ids.tolist()),
        mu=mu,
        mu_bar=mu_bar,
        t=t,
        scale_base=float(scale_base),
        scale=scale,
        mu_hat=mu_hat,
        v=v,
    )


def apply_transform(plan: TransformPlan, e, class_id) -> np.ndarray:
    """Translate latent vectors by their class's plan vector: ``z = e + v``.

    ``e`` may be a single vector or a batch; ``class_id`` a scalar or one id
    per row.
    """
    e = np.asarray(e, dtype=np.float64)
    single = e.ndim == 1
    if single:
        e = e[None, :]
    if e.shape[1] != plan.latent_dim:
        raise ValueError(f"latent dimension {e.shape[1]} does not match plan ({plan.latent_dim})")
    if np.isscalar(class_id) or np.asarray(class_id).ndim == 0:
        rows = np.full(e.shape[0], plan.index_of(class_id))
    else:
        rows = plan.rows_for(class_id)
        if rows.shape[0] != e.shape[0]:
            raise ValueError("one class id per row is required")
    z = e + plan.v[rows]
    return z[0] if single else z
