"""Twin auto-encoder: encoder -> per-class translation -> hermaphrodite ->
twin decoder.

The encoder maps an input to a latent vector e, the frozen plan translates
it to the separable vector z = e + v(class), the hermaphrodite maps z back
to input space (x_hat), and the decoder reproduces z from both x_hat and the
raw input. At inference the decoder alone turns an unlabeled input into the
reconstruction representation that downstream classifiers consume.

The training objective sums four mean-squared terms per batch (each summed
over coordinates, averaged over samples):

* input reconstruction            |x - x_hat|^2
* twin reconstruction from x_hat  |z - decoder(x_hat)|^2
* twin reconstruction from x      |z - decoder(x)|^2
* latent shrink toward class mean |e - mu(class)|^2

Feeding the decoder with the raw input during training is what makes the
label-free inference path work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, stratified_split
from .nn import Adam, Mlp, TrainingError, dense, mlp_backward, mlp_forward
from .pca import fit_pca, pca_project
from .training import LoopResult, run_training_loop
from .transform import TransformPlan, build_plan


@dataclass
class TrainConfig:
    """Hyper-parameters shared by the twin model and the baseline."""

    learning_rate: float = 1e-4
    epochs: int = 5000
    batch_size: int = 100
    early_stop_window: int = 10
    early_stop_threshold: float = 1.0
    validation_fraction: float = 0.30
    scale: float = 0.5            # transformation scale S
    d_z: int | None = None        # defaults to round(sqrt(d_x))
    hidden: int | None = None     # defaults to round(1.5 * sqrt(d_x * d_z))
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")
        for name in ("epochs", "batch_size", "early_stop_window"):
            if getattr(self, name) < (0 if name == "epochs" else 1):
                raise ValueError(f"{name} must be >= {0 if name == 'epochs' else 1}")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")

    def resolve_d_z(self, d_x: int) -> int:
        d_z = self.d_z if self.d_z is not None else max(1, round(math.sqrt(d_x)))
        if d_z < 1:
            raise ValueError("d_z must be >= 1")
        return d_z

    def resolve_hidden(self, d_x: int, d_z: int) -> int:
        if self.hidden is not None:
            if self.hidden < 1:
                raise ValueError("hidden width must be >= 1")
            return self.hidden
        return max(d_z, round(1.5 * math.sqrt(d_x * d_z)))


@dataclass
class LossBreakdown:
    """Per-component training loss; ``total`` is their sum."""

    recon_x: float
    recon_z_from_xhat: float
    recon_z_from_x: float
    shrink: float

    @property
    def total(self) -> float:
        return self.recon_x + self.recon_z_from_xhat + self.recon_z_from_x + self.shrink

    def as_dict(self) -> dict:
        return {
            "recon_x": self.recon_x,
            "recon_z_from_xhat": self.recon_z_from_xhat,
            "recon_z_from_x": self.recon_z_from_x,
            "shrink": self.shrink,
            "total": self.total,
        }


@dataclass
class TaeForward:
    """All intermediate vectors of one supervised forward pass."""

    e: np.ndarray
    z: np.ndarray
    x_hat: np.ndarray
    z_hat_from_xhat: np.ndarray
    z_hat_from_x: np.ndarray


@dataclass
class TrainingHistory:
    """Per-epoch training loss breakdowns plus the validation-loss curve."""

    epochs: list = field(default_factory=list)       # list[LossBreakdown]
    val_total: list = field(default_factory=list)    # list[float]
    best_epoch: int = 0
    stopped_early: bool = False


class TaeModel:
    """Encoder, hermaphrodite, and decoder networks plus the frozen plan."""

    def __init__(self, encoder: Mlp, hermaphrodite: Mlp, decoder: Mlp,
                 classes=(), plan: TransformPlan | None = None):
        d_x, d_z = encoder.input_dim, encoder.output_dim
        if hermaphrodite.input_dim != d_z or hermaphrodite.output_dim != d_x:
            raise ValueError("hermaphrodite must map the latent space back to input space")
        if decoder.input_dim != d_x or decoder.output_dim != d_z:
            raise ValueError("decoder must map input space to the latent space")
        if plan is not None and plan.latent_dim != d_z:
            raise ValueError("plan dimension does not match the latent space")
        self.encoder = encoder
        self.hermaphrodite = hermaphrodite
        self.decoder = decoder
        self.classes = tuple(classes)
        self.plan = plan

    @property
    def d_x(self) -> int:
        return self.encoder.input_dim

    @property
    def d_z(self) -> int:
        return self.encoder.output_dim


def build_tae(d_x: int, config: TrainConfig, class_catalogue=(), rng=None) -> TaeModel:
    """Construct an untrained model (plan unset).

    Each subnetwork has one hidden layer with the configured activation and
    an identity output layer; weights are Glorot-initialized from ``rng``.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    d_z = config.resolve_d_z(d_x)
    if d_z > d_x:
        raise ValueError(f"d_z={d_z} cannot exceed the input dimension {d_x}")
    hidden = config.resolve_hidden(d_x, d_z)
    act = config.activation
    encoder = Mlp([dense(d_x, hidden, act, rng), dense(hidden, d_z, "identity", rng)])
    hermaphrodite = Mlp([dense(d_z, hidden, act, rng), dense(hidden, d_x, "identity", rng)])
    decoder = Mlp([dense(d_x, hidden, act, rng), dense(hidden, d_z, "identity", rng)])
    return TaeModel(encoder, hermaphrodite, decoder, classes=class_catalogue)


def fit_plan(model: TaeModel, X, labels, scale_base: float,
             center: str = "class-means") -> TaeModel:
    """Fit PCA at the latent dimension and freeze the translation plan."""
    pca = fit_pca(X, model.d_z)
    projected = pca_project(pca, X)
    model.plan = build_plan(projected, labels, scale_base, center=center)
    return model


def _require_plan(model: TaeModel) -> TransformPlan:
    if model.plan is None:
        raise ValueError("model has no transformation plan; call fit_plan first")
    return model.plan


def _plan_rows(plan: TransformPlan, class_id, n: int) -> np.ndarray:
    if np.isscalar(class_id) or np.asarray(class_id).ndim == 0:
        return np.full(n, plan.index_of(class_id))
    rows = plan.rows_for(class_id)
    if rows.shape[0] != n:
        raise ValueError("one class id per sample is required")
    return rows


def tae_forward(model: TaeModel, x, class_id) -> TaeForward:
    """Supervised forward pass through all three subnetworks."""
    plan = _require_plan(model)
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    rows = _plan_rows(plan, class_id, batch.shape[0])
    enc = mlp_forward(model.encoder, batch)
    e = enc.activations[-1]
    z = e + plan.v[rows]
    herm = mlp_forward(model.hermaphrodite, z)
    x_hat = herm.activations[-1]
    dec_xhat = mlp_forward(model.decoder, x_hat)
    dec_x = mlp_forward(model.decoder, batch)
    out = TaeForward(
        e=e, z=z, x_hat=x_hat,
        z_hat_from_xhat=dec_xhat.activations[-1],
        z_hat_from_x=dec_x.activations[-1],
    )
    if single:
        for name in ("e", "z", "x_hat", "z_hat_from_xhat", "z_hat_from_x"):
            setattr(out, name, getattr(out, name)[0])
    return out


def tae_loss(x, fwd: TaeForward, plan: TransformPlan, class_id) -> LossBreakdown:
    """Loss components for a batch of forward results.

    Squared errors are summed over coordinates and averaged over the batch.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    e = np.atleast_2d(fwd.e)
    z = np.atleast_2d(fwd.z)
    x_hat = np.atleast_2d(fwd.x_hat)
    zh1 = np.atleast_2d(fwd.z_hat_from_xhat)
    zh2 = np.atleast_2d(fwd.z_hat_from_x)
    rows = _plan_rows(plan, class_id, x.shape[0])
    mu = plan.mu[rows]

    def mse(a, b):
        return float(np.mean(np.sum((a - b) ** 2, axis=1)))

    return LossBreakdown(
        recon_x=mse(x, x_hat),
        recon_z_from_xhat=mse(z, zh1),
        recon_z_from_x=mse(z, zh2),
        shrink=mse(e, mu),
    )


def model_parameters(model: TaeModel) -> list:
    """Flat list of live parameter arrays (weights then bias per layer)."""
    params = []
    for net in (model.encoder, model.hermaphrodite, model.decoder):
        for layer in net.layers:
            params.append(layer.weights)
            params.append(layer.bias)
    return params


def _flatten_grads(layer_grads) -> list:
    flat = []
    for dw, db in layer_grads:
        flat.append(dw)
        flat.append(db)
    return flat


def loss_and_gradients(model: TaeModel, X, labels):
    """Batch loss breakdown and its analytic gradient for every parameter.

    Gradient order matches ``model_parameters``. The chain runs backwards
    through both decoder paths (accumulated), the hermaphrodite, and the
    encoder; z and e also receive the direct contributions of the loss terms
    they appear in.
    """
    plan = _require_plan(model)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    rows = _plan_rows(plan, labels, n)

    enc = mlp_forward(model.encoder, X)
    e = enc.activations[-1]
    z = e + plan.v[rows]
    herm = mlp_forward(model.hermaphrodite, z)
    x_hat = herm.activations[-1]
    dec_xhat = mlp_forward(model.decoder, x_hat)
    zh1 = dec_xhat.activations[-1]
    dec_x = mlp_forward(model.decoder, X)
    zh2 = dec_x.activations[-1]
    mu = plan.mu[rows]

    breakdown = LossBreakdown(
        recon_x=float(np.mean(np.sum((X - x_hat) ** 2, axis=1))),
        recon_z_from_xhat=float(np.mean(np.sum((z - zh1) ** 2, axis=1))),
        recon_z_from_x=float(np.mean(np.sum((z - zh2) ** 2, axis=1))),
        shrink=float(np.mean(np.sum((e - mu) ** 2, axis=1))),
    )

    dec_grads1, g_xhat_dec = mlp_backward(model.decoder, dec_xhat, 2.0 * (zh1 - z) / n)
    dec_grads2, _ = mlp_backward(model.decoder, dec_x, 2.0 * (zh2 - z) / n)
    g_xhat = g_xhat_dec + 2.0 * (x_hat - X) / n
    herm_grads, g_z_herm = mlp_backward(model.hermaphrodite, herm, g_xhat)
    g_z = g_z_herm + 2.0 * (z - zh1) / n + 2.0 * (z - zh2) / n
    g_e = g_z + 2.0 * (e - mu) / n
    enc_grads, _ = mlp_backward(model.encoder, enc, g_e)

    dec_total = [(dw1 + dw2, db1 + db2)
                 for (dw1, db1), (dw2, db2) in zip(dec_grads1, dec_grads2)]
    grads = _flatten_grads(enc_grads) + _flatten_grads(herm_grads) + _flatten_grads(dec_total)
    return breakdown, grads


def train_tae(data: Dataset, config: TrainConfig):
    """Train on a labeled dataset; returns the model and its history.

    A stratified validation share is held out for early stopping and for the
    best-epoch snapshot that is restored before returning. The plan is fit on
    the training share only.
    """
    counts = data.class_counts()
    if (counts < 2).any():
        small = [data.class_names[c] for c in np.flatnonzero(counts < 2)]
        raise ValueError(f"every class needs at least two samples; offending: {small}")
    train_part, val_part = stratified_split(data, config.validation_fraction, config.seed)
    rng = np.random.default_rng(config.seed)
    model = build_tae(data.n_features, config, class_catalogue=data.class_names, rng=rng)
    fit_plan(model, train_part.X, train_part.labels, config.scale)

    history = TrainingHistory()
    if config.epochs == 0:
        return model, history

    params = model_parameters(model)
    adam = Adam(params, learning_rate=config.learning_rate)

    def batch_step(idx):
        breakdown, grads = loss_and_gradients(model, train_part.X[idx], train_part.labels[idx])
        if not np.isfinite(breakdown.total):
            raise TrainingError("training loss is not finite")
        adam.step(params, grads)

    def train_eval():
        fwd = tae_forward(model, train_part.X, train_part.labels)
        return tae_loss(train_part.X, fwd, model.plan, train_part.labels)

    def val_eval():
        fwd = tae_forward(model, val_part.X, val_part.labels)
        return tae_loss(val_part.X, fwd, model.plan, val_part.labels).total

    result: LoopResult = run_training_loop(
        n_train=train_part.n_samples, config=config, rng=rng, params=params,
        batch_step=batch_step, train_eval=train_eval, val_eval=val_eval,
    )
    history.epochs = result.history
    history.val_total = result.val_history
    history.best_epoch = result.best_epoch
    history.stopped_early = result.stopped_early
    return model, history


def infer_representation(model: TaeModel, x) -> np.ndarray:
    """Label-free inference: the decoder applied directly to the raw input.

    This is the reconstruction representation handed to downstream
    classifiers; it never touches the plan.
    """
    return mlp_forward(model.decoder, x).output
