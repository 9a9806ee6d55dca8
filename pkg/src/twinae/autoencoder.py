"""Plain auto-encoder baseline trained unsupervised on the same machinery.

Its latent vector is the comparison representation: same optimizer, batch
schedule, early stopping, and snapshotting as the twin model, with a single
reconstruction loss.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, stratified_split
from .nn import Adam, Mlp, TrainingError, dense, mlp_backward, mlp_forward
from .tae import TrainConfig
from .training import run_training_loop


class AeModel:
    """Encoder plus mirrored decoder."""

    def __init__(self, encoder: Mlp, decoder: Mlp, classes=()):
        if decoder.input_dim != encoder.output_dim or decoder.output_dim != encoder.input_dim:
            raise ValueError("decoder must mirror the encoder dimensions")
        self.encoder = encoder
        self.decoder = decoder
        self.classes = tuple(classes)

    @property
    def d_x(self) -> int:
        return self.encoder.input_dim

    @property
    def d_z(self) -> int:
        return self.encoder.output_dim


def build_ae(d_x: int, config: TrainConfig, class_catalogue=(), rng=None) -> AeModel:
    if rng is None:
        rng = np.random.default_rng(config.seed)
    d_z = config.resolve_d_z(d_x)
    if d_z > d_x:
        raise ValueError(f"d_z={d_z} cannot exceed the input dimension {d_x}")
    hidden = config.resolve_hidden(d_x, d_z)
    act = config.activation
    encoder = Mlp([dense(d_x, hidden, act, rng), dense(hidden, d_z, "identity", rng)])
    decoder = Mlp([dense(d_z, hidden, act, rng), dense(hidden, d_x, "identity", rng)])
    return AeModel(encoder, decoder, classes=class_catalogue)


def _parameters(model: AeModel) -> list:
    params = []
    for net in (model.encoder, model.decoder):
        for layer in net.layers:
            params.append(layer.weights)
            params.append(layer.bias)
    return params


def _recon_loss(model: AeModel, X) -> float:
    latent = mlp_forward(model.encoder, X).activations[-1]
    x_hat = mlp_forward(model.decoder, latent).activations[-1]
    return float(np.mean(np.sum((X - x_hat) ** 2, axis=1)))


def _loss_and_gradients(model: AeModel, X):
    n = X.shape[0]
    enc = mlp_forward(model.encoder, X)
    dec = mlp_forward(model.decoder, enc.activations[-1])
    x_hat = dec.activations[-1]
    loss = float(np.mean(np.sum((X - x_hat) ** 2, axis=1)))
    dec_grads, g_latent = mlp_backward(model.decoder, dec, 2.0 * (x_hat - X) / n)
    enc_grads, _ = mlp_backward(model.encoder, enc, g_latent)
    grads = []
    for layer_grads in (enc_grads, dec_grads):
        for dw, db in layer_grads:
            grads.append(dw)
            grads.append(db)
    return loss, grads


def train_ae(data: Dataset, config: TrainConfig):
    """Unsupervised training; labels are only used to stratify the validation
    split so the baseline sees the same data conditions as the twin model.

    Returns ``(model, history)`` where history is the per-epoch training
    reconstruction loss.
    """
    train_part, val_part = stratified_split(data, config.validation_fraction, config.seed)
    rng = np.random.default_rng(config.seed)
    model = build_ae(data.n_features, config, class_catalogue=data.class_names, rng=rng)
    if config.epochs == 0:
        return model, []

    params = _parameters(model)
    adam = Adam(params, learning_rate=config.learning_rate)

    def batch_step(idx):
        loss, grads = _loss_and_gradients(model, train_part.X[idx])
        if not np.isfinite(loss):
            raise TrainingError("training loss is not finite")
        adam.step(params, grads)

    result = run_training_loop(
        n_train=train_part.n_samples, config=config, rng=rng, params=params,
        batch_step=batch_step,
        train_eval=lambda: _recon_loss(model, train_part.X),
        val_eval=lambda: _recon_loss(model, val_part.X),
    )
    return model, result.history


def ae_encode(model: AeModel, x) -> np.ndarray:
    """Latent representation: the encoder forward pass."""
    return mlp_forward(model.encoder, x).output
