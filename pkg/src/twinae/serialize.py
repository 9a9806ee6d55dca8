"""Lossless JSON model files.

One self-describing document per model: format version, variant tag, layer
weights and biases as full-precision decimal arrays, the frozen plan (twin
models), the class catalogue, and optional normalization statistics. Python
floats serialize via ``repr``, which round-trips float64 exactly, and keys
are sorted so identical models produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .autoencoder import AeModel
from .data import NormStats
from .nn import DenseLayer, Mlp
from .tae import TaeModel
from .transform import TransformPlan

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LoadedModel:
    kind: str                      # "tae" or "ae"
    model: object                  # TaeModel | AeModel
    norm_stats: NormStats | None


def _net_doc(net: Mlp) -> list:
    return [
        {
            "activation": layer.activation,
            "weights": layer.weights.tolist(),
            "bias": layer.bias.tolist(),
        }
        for layer in net.layers
    ]


def _net_from_doc(doc) -> Mlp:
    return Mlp([
        DenseLayer(np.array(d["weights"], dtype=np.float64),
                   np.array(d["bias"], dtype=np.float64),
                   d["activation"])
        for d in doc
    ])


def _plan_doc(plan: TransformPlan) -> dict:
    return {
        "class_ids": list(plan.class_ids),
        "mu": plan.mu.tolist(),
        "mu_bar": plan.mu_bar.tolist(),
        "t": plan.t.tolist(),
        "scale_base": plan.scale_base,
        "scale": plan.scale.tolist(),
        "mu_hat": plan.mu_hat.tolist(),
        "v": plan.v.tolist(),
    }


def _plan_from_doc(doc) -> TransformPlan:
    return TransformPlan(
        class_ids=tuple(doc["class_ids"]),
        mu=np.array(doc["mu"], dtype=np.float64),
        mu_bar=np.array(doc["mu_bar"], dtype=np.float64),
        t=np.array(doc["t"], dtype=np.float64),
        scale_base=float(doc["scale_base"]),
        scale=np.array(doc["scale"], dtype=np.float64),
        mu_hat=np.array(doc["mu_hat"], dtype=np.float64),
        v=np.array(doc["v"], dtype=np.float64),
    )


def save_model(model, path, norm_stats: NormStats | None = None) -> None:
    """Write a model document; ``model`` is a TaeModel or AeModel."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "class_names": list(model.classes),
        "dims": {"d_x": model.d_x, "d_z": model.d_z},
        "normalization": None if norm_stats is None else {
            "feature_min": norm_stats.feature_min.tolist(),
            "feature_max": norm_stats.feature_max.tolist(),
        },
    }
    if isinstance(model, TaeModel):
        doc["kind"] = "tae"
        doc["networks"] = {
            "encoder": _net_doc(model.encoder),
            "hermaphrodite": _net_doc(model.hermaphrodite),
            "decoder": _net_doc(model.decoder),
        }
        doc["plan"] = None if model.plan is None else _plan_doc(model.plan)
    elif isinstance(model, AeModel):
        doc["kind"] = "ae"
        doc["networks"] = {
            "encoder": _net_doc(model.encoder),
            "decoder": _net_doc(model.decoder),
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> LoadedModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {version!r}")
    norm = doc.get("normalization")
    stats = None if norm is None else NormStats(
        np.array(norm["feature_min"], dtype=np.float64),
        np.array(norm["feature_max"], dtype=np.float64),
    )
    classes = tuple(doc.get("class_names", ()))
    kind = doc.get("kind")
    nets = doc["networks"]
    if kind == "tae":
        model = TaeModel(
            _net_from_doc(nets["encoder"]),
            _net_from_doc(nets["hermaphrodite"]),
            _net_from_doc(nets["decoder"]),
            classes=classes,
            plan=None if doc.get("plan") is None else _plan_from_doc(doc["plan"]),
        )
    elif kind == "ae":
        model = AeModel(
            _net_from_doc(nets["encoder"]),
            _net_from_doc(nets["decoder"]),
            classes=classes,
        )
    else:
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    return LoadedModel(kind=kind, model=model, norm_stats=stats)
