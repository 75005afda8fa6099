"""Central-finite-difference verification of the analytic gradients."""

import numpy as np

from .core import network_backward_batch, network_forward_batch
from .train import mae, mae_grad


def _loss(model, X, Y):
    out, _ = network_forward_batch(model, X, train=False)
    return mae(out, Y)


def gradient_check(model, sample, epsilon=1e-5):
    """Max relative error between analytic and numeric gradients.

    Relative error per parameter is |a - n| / max(|a|, |n|, 1e-12), which
    stays defined for dead units with zero gradient.  epsilon must be in
    [1e-7, 1e-3].
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError("epsilon must be in [1e-7, 1e-3]")
    window, target = sample
    window = np.asarray(window)
    if model.spec.layers[0].kind == "embedding":
        X = window[None, :].astype(np.int64)
    else:
        X = window[None, :, :].astype(np.float64)
    Y = np.asarray(target, dtype=np.float64)[None, :]
    out, caches = network_forward_batch(model, X, train=False)
    analytic = network_backward_batch(model, mae_grad(out, Y), caches)
    params = model.params
    worst = 0.0
    for i in range(params.size):
        saved = params[i]
        params[i] = saved + epsilon
        up = _loss(model, X, Y)
        params[i] = saved - epsilon
        down = _loss(model, X, Y)
        params[i] = saved
        numeric = (up - down) / (2.0 * epsilon)
        err = abs(analytic[i] - numeric) / max(abs(analytic[i]),
                                               abs(numeric), 1e-12)
        worst = max(worst, err)
    return worst
