"""Shared mini-batch training loop.

Runs seeded Adam epochs, records an evaluation per epoch, snapshots the
parameters at the best validation loss, and stops early when the validation
loss changes by less than a threshold across a window of epochs. Both the
twin model and the plain auto-encoder baseline train through this loop so
their optimization conditions are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import TrainingError, minibatch_iter


@dataclass
class LoopResult:
    history: list = field(default_factory=list)
    val_history: list = field(default_factory=list)
    best_epoch: int = 0          # 1-based; 0 when no epoch ran
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.history)


def run_training_loop(*, n_train, config, rng, params, batch_step,
                      train_eval, val_eval) -> LoopResult:
    """Drive epochs of mini-batch updates with early stopping.

    ``batch_step(indices)`` performs one optimizer update; ``train_eval()``
    produces the per-epoch history record; ``val_eval()`` returns the scalar
    validation loss. On return the parameters hold the best-validation
    snapshot.
    """
    result = LoopResult()
    best_val = np.inf
    best_params = None
    for epoch in range(1, config.epochs + 1):
        for idx in minibatch_iter(n_train, config.batch_size, rng):
            batch_step(idx)
        result.history.append(train_eval())
        val_loss = float(val_eval())
        if not np.isfinite(val_loss):
            raise TrainingError(f"validation loss is not finite at epoch {epoch}")
        result.val_history.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_params = [p.copy() for p in params]
            result.best_epoch = epoch
        window = config.early_stop_window
        if epoch > window and abs(result.val_history[-1] - result.val_history[-1 - window]) \
                < config.early_stop_threshold:
            result.stopped_early = True
            break
    if best_params is not None:
        for p, snap in zip(params, best_params):
            np.copyto(p, snap)
    return result
