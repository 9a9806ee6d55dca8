"""Twin auto-encoder toolkit.

Learns a class-separable latent representation by translating each class's
latent region to a well-separated target, reconstructs that separable
representation through a twin decoder path, and hands the reconstruction to
downstream classifiers for attack detection.
"""

from .autoencoder import AeModel, ae_encode, build_ae, train_ae
from .data import (Dataset, NormStats, load_csv, minmax_apply, minmax_fit,
                   stratified_split, synth_blobs)
from .metrics import (ConfusionMatrix, QualityReport, accuracy, f_score, far,
                      mdr, representation_quality)
from .nn import (Adam, DenseLayer, ForwardPass, Mlp, TrainingError, dense,
                 glorot_init, minibatch_iter, mlp_backward, mlp_forward)
from .pca import PcaModel, fit_pca, pca_project
from .serialize import LoadedModel, load_model, save_model
from .tae import (LossBreakdown, TaeForward, TaeModel, TrainConfig,
                  TrainingHistory, build_tae, fit_plan, infer_representation,
                  tae_forward, tae_loss, train_tae)
from .transform import (TransformPlan, apply_transform, build_plan,
                        compute_class_means, compute_directions,
                        compute_transformed_means, compute_translation_vectors)
from .tree import TreeNode, fit_tree, tree_predict

__version__ = "0.1.0"

__all__ = [
    "Adam", "AeModel", "ConfusionMatrix", "Dataset", "DenseLayer",
    "ForwardPass", "LoadedModel", "LossBreakdown", "Mlp", "NormStats",
    "PcaModel", "QualityReport", "TaeForward", "TaeModel", "TrainConfig",
    "TrainingError", "TrainingHistory", "TransformPlan", "TreeNode",
    "accuracy", "ae_encode", "apply_transform", "build_ae", "build_plan",
    "build_tae", "compute_class_means", "compute_directions",
    "compute_transformed_means", "compute_translation_vectors", "dense",
    "f_score", "far", "fit_pca", "fit_plan", "fit_tree", "glorot_init",
    "infer_representation", "load_csv", "load_model", "mdr", "minibatch_iter",
    "minmax_apply", "minmax_fit", "mlp_backward", "mlp_forward",
    "pca_project", "representation_quality", "save_model",
    "stratified_split", "synth_blobs", "tae_forward", "tae_loss",
    "train_ae", "train_tae", "tree_predict",
]
