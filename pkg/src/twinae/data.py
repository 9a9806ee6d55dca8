"""Dataset container, CSV ingest, min-max normalization, stratified splits,
and a synthetic overlapping-blobs generator for desk-scale experiments."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class NormStats:
    """Per-feature training min/max used for min-max scaling."""

    feature_min: np.ndarray
    feature_max: np.ndarray


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with dense integer labels and a class-name catalogue."""

    X: np.ndarray            # (n, d) float64
    labels: np.ndarray       # (n,) int
    class_names: tuple
    norm_stats: NormStats | None = None

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return replace(self, X=self.X[indices], labels=self.labels[indices])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def load_csv(path, label_column, header: bool = True) -> Dataset:
    """Load a comma-separated dataset.

    With ``header=True`` the label column is selected by name (an integer
    index also works); without a header it must be an index. Features are
    parsed as float64; labels are interned to dense ids in first-appearance
    order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if header:
        if not rows:
            raise ValueError(f"{path}: empty file, expected a header row")
        names, rows = rows[0], rows[1:]
        if isinstance(label_column, int):
            label_idx = label_column
        else:
            if label_column not in names:
                raise ValueError(f"{path}: label column {label_column!r} not in header {names}")
            label_idx = names.index(label_column)
    else:
        if not isinstance(label_column, int):
            raise ValueError("label_column must be an index when the file has no header")
        label_idx = label_column
        names = None

    n_cols = None
    feats, raw_labels = [], []
    first_line = 2 if header else 1
    for offset, row in enumerate(rows):
        line = first_line + offset
        if not row:
            continue
        if n_cols is None:
            n_cols = len(row)
            if not -n_cols <= label_idx < n_cols:
                raise ValueError(f"{path}: label column index {label_idx} out of range for {n_cols} columns")
        if len(row) != n_cols:
            raise ValueError(f"{path}:{line}: expected {n_cols} fields, found {len(row)}")
        values = []
        for j, field in enumerate(row):
            if j == label_idx % n_cols:
                continue
            try:
                values.append(float(field))
            except ValueError:
                col = names[j] if names else f"column {j}"
                raise ValueError(f"{path}:{line}: non-numeric value {field!r} in feature {col}") from None
        feats.append(values)
        raw_labels.append(row[label_idx])
    if not feats:
        raise ValueError(f"{path}: no data rows")

    catalogue: list = []
    ids = []
    for lab in raw_labels:
        if lab not in catalogue:
            catalogue.append(lab)
        ids.append(catalogue.index(lab))
    return Dataset(
        X=np.asarray(feats, dtype=np.float64),
        labels=np.asarray(ids, dtype=np.int64),
        class_names=tuple(catalogue),
    )


def minmax_fit(train: Dataset) -> NormStats:
    """Per-feature min/max from the training split only."""
    return NormStats(train.X.min(axis=0), train.X.max(axis=0))


def minmax_apply(stats: NormStats, data: Dataset) -> Dataset:
    """Scale features to ``(x - min) / (max - min)``.

    Constant training features map to 0. Values outside the training range
    are left unclipped, so test data can fall outside [0, 1].
    """
    span = stats.feature_max - stats.feature_min
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (data.X - stats.feature_min) / safe
    scaled[:, span == 0.0] = 0.0
    return replace(data, X=scaled, norm_stats=stats)


def stratified_split(data: Dataset, fraction: float, seed: int):
    """Split into ``(part_a, part_b)`` with ``fraction`` of each class in part_b.

    Classes with at least two samples appear in both parts; singleton classes
    go to part_a with a warning.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    a_parts, b_parts = [], []
    for c in range(data.n_classes):
        idx = np.flatnonzero(data.labels == c)
        if idx.size == 0:
            continue
        if idx.size == 1:
            warnings.warn(f"class {data.class_names[c]!r} has one sample; kept in part_a")
            a_parts.append(idx)
            continue
        idx = rng.permutation(idx)
        n_b = int(round(fraction * idx.size))
        n_b = min(max(n_b, 1), idx.size - 1)
        b_parts.append(idx[:n_b])
        a_parts.append(idx[n_b:])
    a_idx = rng.permutation(np.concatenate(a_parts)) if a_parts else np.array([], dtype=int)
    b_idx = rng.permutation(np.concatenate(b_parts)) if b_parts else np.array([], dtype=int)
    return data.subset(a_idx), data.subset(b_idx)


def blob_means(m_classes: int, dims: int, radius: float, seed: int) -> np.ndarray:
    """Deterministic class-mean layout for the synthetic generator.

    Means start on a flattened ellipse in the first two coordinates, rescaled
    so every mean is exactly ``radius`` from the origin, then the whole
    configuration is turned by a seeded random rotation so the class
    structure is not axis-aligned. The angular offset and unequal semi-axes
    keep the layout away from equal-eigenvalue degeneracies, so a PCA of the
    pooled data is stable.
    """
    angles = 2.0 * np.pi * (np.arange(m_classes) + 0.3) / m_classes
    means = np.zeros((m_classes, dims))
    means[:, 0] = 1.25 * np.cos(angles)
    means[:, 1] = 0.8 * np.sin(angles)
    norms = np.linalg.norm(means, axis=1, keepdims=True)
    return radius * (means / norms) @ _rotation(dims, seed).T


def _rotation(dims: int, seed: int) -> np.ndarray:
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((dims, dims)))
    return q * np.sign(np.diag(r))


def _noise_profile(dims: int, sigma: float) -> np.ndarray:
    """Per-feature noise scales with root-mean-square ``sigma``.

    Mimics heterogeneous traffic features: the two coordinates carrying the
    class-mean layout are somewhat quieter than the rest. For dims == 2 the
    noise is isotropic.
    """
    if dims == 2:
        return np.full(2, sigma)
    plane = 0.85
    rest = math.sqrt((dims - 2.0 * plane * plane) / (dims - 2))
    return sigma * np.array([plane, plane] + [rest] * (dims - 2))


def synth_blobs(m_classes: int, n_per_class: int, dims: int,
                radius: float, sigma: float, seed: int) -> Dataset:
    """Gaussian blobs with overlapping, non-axis-aligned classes.

    ``sigma`` comparable to ``radius`` produces heavy class overlap (raw-data
    classifiers stay well below perfect accuracy); tiny ``sigma`` makes the
    classes trivially separable.
    """
    if m_classes < 2:
        raise ValueError("need at least two classes")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    if dims < 2:
        raise ValueError("need at least two feature dimensions")
    if n_per_class < 1:
        raise ValueError("need at least one sample per class")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(m_classes), n_per_class)
    noise = _noise_profile(dims, sigma) * rng.standard_normal((labels.size, dims))
    means = blob_means(m_classes, dims, radius, seed)
    X = means[labels] + noise @ _rotation(dims, seed).T
    return Dataset(
        X=X,
        labels=labels.astype(np.int64),
        class_names=tuple(f"c{i}" for i in range(m_classes)),
    )
