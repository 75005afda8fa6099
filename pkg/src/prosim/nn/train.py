"""Mini-batch training: MAE loss, Nadam updates, early stopping.

The optimizer is Adam with Nesterov momentum (Nadam) including the momentum
schedule mu_t = beta1 * (1 - 0.5 * 0.96^(t * 0.004)) from its published
formulation.  The MAE subgradient at zero residual is defined as 0 for
determinism.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError
from .core import TrainedModel, network_backward_batch, network_forward_batch


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    loss: str = "mae"
    patience: int = 10
    seed: int = 0
    learning_rate: float = 0.002

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.loss != "mae":
            raise ValueError(f"unsupported loss '{self.loss}'")
        if not 1 <= self.patience <= self.epochs:
            raise ValueError("patience must be in [1, epochs]")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def mae(pred, target):
    return float(np.mean(np.abs(pred - target)))


def mae_grad(pred, target):
    return np.sign(pred - target) / pred.size


class Nadam:
    def __init__(self, n_params, learning_rate, beta1=0.9, beta2=0.999,
                 epsilon=1e-8, schedule_decay=0.004):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.schedule_decay = schedule_decay
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0
        self.mu_product = 1.0

    def step(self, params, grads):
        self.t += 1
        t = self.t
        mu_t = self.beta1 * (1.0 - 0.5 * 0.96 ** (t * self.schedule_decay))
        mu_next = self.beta1 * (1.0 - 0.5 * 0.96 ** ((t + 1) * self.schedule_decay))
        self.mu_product *= mu_t
        mu_product_next = self.mu_product * mu_next
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grads
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grads * grads
        m_hat = (mu_next * self.m / (1.0 - mu_product_next)
                 + (1.0 - mu_t) * grads / (1.0 - self.mu_product))
        v_hat = self.v / (1.0 - self.beta2 ** t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


def _as_arrays(pairs, spec):
    if pairs is None:
        return None, None
    if isinstance(pairs, tuple) and len(pairs) == 2 \
            and isinstance(pairs[0], np.ndarray):
        return pairs
    windows = [w for w, _ in pairs]
    targets = [t for _, t in pairs]
    if spec.layers[0].kind == "embedding":
        X = np.asarray(windows, dtype=np.int64)
    else:
        X = np.asarray(windows, dtype=np.float64)
    Y = np.asarray(targets, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    return X, Y


def evaluate(model, X, Y):
    """Mean absolute error with dropout disabled."""
    out, _ = network_forward_batch(model, X, train=False)
    return mae(out, Y)


def train(model, dataset, config, validation=None):
    """Mini-batch backprop-through-time minimizing MAE with Nadam updates.

    Stops early when the validation loss has not improved for
    config.patience consecutive epochs and returns the weights of the best
    validation epoch (final weights when no validation set is given).
    Raises TrainingError on NaN loss, reporting epoch and batch.
    """
    X, Y = _as_arrays(dataset, model.spec)
    if X is None or len(X) == 0:
        raise TrainingError("training dataset is empty")
    Xv, Yv = _as_arrays(validation, model.spec)
    params = model.params.copy()
    work = TrainedModel(model.spec, params)
    optimizer = Nadam(params.size, config.learning_rate)
    rng = np.random.default_rng(config.seed)
    history = {"train": [], "val": []}
    best_val = math.inf
    best_params = params.copy()
    bad_epochs = 0
    n = len(X)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for batch_no, lo in enumerate(range(0, n, config.batch_size)):
            idx = order[lo:lo + config.batch_size]
            out, caches = network_forward_batch(
                work, X[idx], train=True, dropout_rng=rng)
            loss = mae(out, Y[idx])
            if math.isnan(loss):
                raise TrainingError(
                    f"NaN loss at epoch {epoch}, batch {batch_no}")
            epoch_loss += loss * len(idx)
            grads = network_backward_batch(
                work, mae_grad(out, Y[idx]), caches)
            optimizer.step(params, grads)
        history["train"].append(epoch_loss / n)
        if Xv is not None and len(Xv):
            val_loss = evaluate(work, Xv, Yv)
            history["val"].append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_params = params.copy()
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= config.patience:
                    break
    if Xv is not None and len(Xv):
        final = best_params
    else:
        final = params
    return TrainedModel(model.spec, final, train_history=history)
