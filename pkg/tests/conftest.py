"""Shared fixtures: the frozen synthetic instance and models trained on it.

The overlapping-blobs instance (4 classes, 6 features, 400 samples per
class, noise spread equal to the class-mean radius) is the desk-scale
stand-in for entangled traffic data. Seeds are frozen so every derived
number in the suite is reproducible.
"""

import numpy as np
import pytest

import twinae as t
from twinae.cli import RunConfig, _select_tree
from twinae.tree import tree_predict

BLOBS = dict(m_classes=4, n_per_class=400, dims=6, radius=1.0, sigma=1.0, seed=7)
SPLIT_SEED = 11
TRAIN_SEED = 4

MAIN_CONFIG = dict(
    learning_rate=0.01,
    epochs=300,
    batch_size=100,
    early_stop_threshold=0.0,   # |delta| < 0 never holds: early stop disabled
    activation="tanh",
    d_z=2,
    hidden=16,
    seed=TRAIN_SEED,
)


def dt_accuracy(train_X, train_y, test_X, test_y, seed=0):
    """Grid-searched decision-tree test accuracy (the evaluation protocol)."""
    tree, _, _ = _select_tree(train_X, train_y, RunConfig(seed=seed))
    return float(np.mean(tree_predict(tree, test_X) == test_y))


@pytest.fixture(scope="session")
def blobs_split():
    data = t.synth_blobs(**BLOBS)
    return t.stratified_split(data, 0.3, seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def tae_main(blobs_split):
    """The main trained twin model (transformation scale 10)."""
    train, _ = blobs_split
    config = t.TrainConfig(scale=10.0, **MAIN_CONFIG)
    model, history = t.train_tae(train, config)
    return model, history


@pytest.fixture(scope="session")
def tae_sweep(blobs_split, tae_main):
    """Models across the transformation-scale grid, keyed by scale."""
    train, _ = blobs_split
    models = {10.0: tae_main[0]}
    for scale in (0.0001, 0.1):
        config = t.TrainConfig(scale=scale, **MAIN_CONFIG)
        model, _ = t.train_tae(train, config)
        models[scale] = model
    return models


@pytest.fixture(scope="session")
def ae_baseline(blobs_split):
    """Plain auto-encoder trained under identical optimization conditions."""
    train, _ = blobs_split
    config = t.TrainConfig(scale=0.5, **MAIN_CONFIG)
    model, history = t.train_ae(train, config)
    return model, history
