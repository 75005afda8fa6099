"""Network specification, initialization, forward and backward passes.

Layer kinds: dense, gru, lstm, embedding.  Recurrent layers run over full
sequences; the first dense layer consumes the final timestep's hidden state.
Parameters live in one flat float64 vector with per-layer offsets; gradients
are accumulated into a same-shaped vector.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NetworkSpecError

_SELU_LAMBDA = 1.0507009873554805
_SELU_ALPHA = 1.6732632423543772


def _activate(name, x):
    if name == "tanh":
        return np.tanh(x)
    if name == "selu":
        return np.where(x > 0, _SELU_LAMBDA * x,
                        _SELU_LAMBDA * _SELU_ALPHA * (np.exp(x) - 1.0))
    if name == "linear":
        return x
    raise NetworkSpecError(f"unknown activation '{name}'")


def _activate_grad(name, x, y):
    """d activation / d pre-activation, given pre-activation x and output y."""
    if name == "tanh":
        return 1.0 - y * y
    if name == "selu":
        return np.where(x > 0, _SELU_LAMBDA,
                        _SELU_LAMBDA * _SELU_ALPHA * np.exp(x))
    if name == "linear":
        return np.ones_like(x)
    raise NetworkSpecError(f"unknown activation '{name}'")


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # dense | gru | lstm | embedding
    units: int
    activation: str = "tanh"
    dropout_rate: float = 0.0
    vocab_size: int | None = None

    def __post_init__(self):
        if self.kind not in ("dense", "gru", "lstm", "embedding"):
            raise NetworkSpecError(f"unknown layer kind '{self.kind}'")
        if self.units < 1:
            raise NetworkSpecError("layer units must be at least 1")
        if not 0 <= self.dropout_rate < 1:
            raise NetworkSpecError("dropout_rate must be in [0, 1)")
        if self.kind == "embedding" and (self.vocab_size or 0) < 1:
            raise NetworkSpecError("embedding layers need a vocab_size")
        if self.activation not in ("tanh", "selu", "linear"):
            raise NetworkSpecError(f"unknown activation '{self.activation}'")


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple
    input_dim: int
    output_dim: int

    def __post_init__(self):
        if not self.layers:
            raise NetworkSpecError("network needs at least one layer")
        seen_dense = False
        for i, layer in enumerate(self.layers):
            if layer.kind == "embedding" and i != 0:
                raise NetworkSpecError("embedding must be the first layer")
            if layer.kind in ("gru", "lstm") and seen_dense:
                raise NetworkSpecError("recurrent layers cannot follow dense")
            if layer.kind == "dense":
                seen_dense = True
        if self.layers[-1].units != self.output_dim:
            raise NetworkSpecError(
                f"output_dim {self.output_dim} != last layer units "
                f"{self.layers[-1].units}")

    def layer_input_dims(self):
        dims = []
        d = self.input_dim
        for layer in self.layers:
            dims.append(d)
            d = layer.units
        return dims

    def to_json(self):
        return {
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "layers": [{"kind": l.kind, "units": l.units,
                        "activation": l.activation,
                        "dropout_rate": l.dropout_rate,
                        "vocab_size": l.vocab_size} for l in self.layers],
        }

    @classmethod
    def from_json(cls, doc):
        layers = tuple(LayerSpec(**d) for d in doc["layers"])
        return cls(layers, doc["input_dim"], doc["output_dim"])


def _param_count(layer, d_in):
    u = layer.units
    if layer.kind == "dense":
        return d_in * u + u
    if layer.kind == "gru":
        return 3 * (d_in * u + u * u + u)
    if layer.kind == "lstm":
        return 4 * (d_in * u + u * u + u)
    if layer.kind == "embedding":
        return layer.vocab_size * u
    raise NetworkSpecError(layer.kind)


def parameter_count(spec):
    return sum(_param_count(l, d)
               for l, d in zip(spec.layers, spec.layer_input_dims()))


def _layer_views(layer, d_in, flat):
    """Reshape a layer's parameter slice into its weight matrices."""
    u = layer.units
    if layer.kind == "dense":
        W = flat[: d_in * u].reshape(d_in, u)
        b = flat[d_in * u:]
        return {"W": W, "b": b}
    if layer.kind == "gru":
        k = 3
    elif layer.kind == "lstm":
        k = 4
    elif layer.kind == "embedding":
        return {"E": flat.reshape(layer.vocab_size, u)}
    else:
        raise NetworkSpecError(layer.kind)
    n_w = d_in * k * u
    n_u = u * k * u
    W = flat[:n_w].reshape(d_in, k * u)
    U = flat[n_w:n_w + n_u].reshape(u, k * u)
    b = flat[n_w + n_u:]
    return {"W": W, "U": U, "b": b}


@dataclass
class TrainedModel:
    spec: NetworkSpec
    params: np.ndarray
    train_history: dict = field(default_factory=dict)

    def layer_params(self):
        views = []
        offset = 0
        for layer, d_in in zip(self.spec.layers, self.spec.layer_input_dims()):
            n = _param_count(layer, d_in)
            views.append(_layer_views(layer, d_in, self.params[offset:offset + n]))
            offset += n
        return views


def init_network(spec, seed):
    """Glorot-style uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    params = np.zeros(parameter_count(spec), dtype=np.float64)
    model = TrainedModel(spec, params)
    for views in model.layer_params():
        for name, mat in views.items():
            if name == "b":
                continue
            fan_in, fan_out = mat.shape
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            mat[...] = rng.uniform(-limit, limit, size=mat.shape)
    return model


# --- forward / backward ------------------------------------------------------

def _dense_forward(X, views, activation):
    pre = X @ views["W"] + views["b"]
    out = _activate(activation, pre)
    return out, (X, pre, out)


def _dense_backward(dout, cache, views, gviews, activation):
    X, pre, out = cache
    dpre = dout * _activate_grad(activation, pre, out)
    gviews["W"] += X.T @ dpre
    gviews["b"] += dpre.sum(axis=0)
    return dpre @ views["W"].T


def _gru_forward(X, views, activation):
    B, T, _ = X.shape
    u = views["b"].shape[0] // 3
    W, U, b = views["W"], views["U"], views["b"]
    XW = X @ W
    Uzr, Uc = U[:, :2 * u], U[:, 2 * u:]
    H = np.empty((B, T, u))
    h = np.zeros((B, u))
    steps = []
    for t in range(T):
        azr = XW[:, t, :2 * u] + h @ Uzr + b[:2 * u]
        z = _sigmoid(azr[:, :u])
        r = _sigmoid(azr[:, u:])
        ac = XW[:, t, 2 * u:] + (r * h) @ Uc + b[2 * u:]
        c = _activate(activation, ac)
        h_new = (1.0 - z) * h + z * c
        steps.append((h, z, r, ac, c))
        h = h_new
        H[:, t, :] = h
    return H, (X, steps, u)


def _gru_backward(dH, cache, views, gviews, activation):
    X, steps, u = cache
    B, T, d = X.shape
    W, U = views["W"], views["U"]
    Uzr, Uc = U[:, :2 * u], U[:, 2 * u:]
    gW, gU, gb = gviews["W"], gviews["U"], gviews["b"]
    gUzr, gUc = gU[:, :2 * u], gU[:, 2 * u:]
    dXW = np.zeros((B, T, 3 * u))
    dh = np.zeros((B, u))
    for t in range(T - 1, -1, -1):
        h_prev, z, r, ac, c = steps[t]
        dh = dh + dH[:, t, :]
        dc = dh * z
        dz = dh * (c - h_prev)
        dh_prev = dh * (1.0 - z)
        dac = dc * _activate_grad(activation, ac, c)
        gb[2 * u:] += dac.sum(axis=0)
        gUc += (r * h_prev).T @ dac
        drh = dac @ Uc.T
        dr = drh * h_prev
        dh_prev = dh_prev + drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dazr = np.concatenate([daz, dar], axis=1)
        gb[:2 * u] += dazr.sum(axis=0)
        gUzr += h_prev.T @ dazr
        dh_prev = dh_prev + dazr @ Uzr.T
        dXW[:, t, :2 * u] = dazr
        dXW[:, t, 2 * u:] = dac
        dh = dh_prev
    gW += X.reshape(B * T, d).T @ dXW.reshape(B * T, 3 * u)
    return (dXW.reshape(B * T, 3 * u) @ W.T).reshape(B, T, d)


def _lstm_forward(X, views, activation):
    B, T, _ = X.shape
    u = views["b"].shape[0] // 4
    W, U, b = views["W"], views["U"], views["b"]
    XW = X @ W
    H = np.empty((B, T, u))
    h = np.zeros((B, u))
    c = np.zeros((B, u))
    steps = []
    for t in range(T):
        a = XW[:, t, :] + h @ U + b
        i = _sigmoid(a[:, :u])
        f = _sigmoid(a[:, u:2 * u])
        ag = a[:, 2 * u:3 * u]
        g = _activate(activation, ag)
        o = _sigmoid(a[:, 3 * u:])
        c_new = f * c + i * g
        cc = _activate(activation, c_new)
        h_new = o * cc
        steps.append((h, c, i, f, ag, g, o, c_new, cc))
        h, c = h_new, c_new
        H[:, t, :] = h
    return H, (X, steps, u)


def _lstm_backward(dH, cache, views, gviews, activation):
    X, steps, u = cache
    B, T, d = X.shape
    W, U = views["W"], views["U"]
    gW, gU, gb = gviews["W"], gviews["U"], gviews["b"]
    dXW = np.zeros((B, T, 4 * u))
    dh = np.zeros((B, u))
    dc = np.zeros((B, u))
    for t in range(T - 1, -1, -1):
        h_prev, c_prev, i, f, ag, g, o, c_new, cc = steps[t]
        dh = dh + dH[:, t, :]
        do = dh * cc
        dc = dc + dh * o * _activate_grad(activation, c_new, cc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_prev = dc * f
        da = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * _activate_grad(activation, ag, g),
            do * o * (1.0 - o),
        ], axis=1)
        gb += da.sum(axis=0)
        gU += h_prev.T @ da
        dh = da @ U.T
        dc = dc_prev
        dXW[:, t, :] = da
    gW += X.reshape(B * T, d).T @ dXW.reshape(B * T, 4 * u)
    return (dXW.reshape(B * T, 4 * u) @ W.T).reshape(B, T, d)


def _embedding_forward(ids, views):
    ids = ids.astype(np.int64)
    return views["E"][ids], ids


def _embedding_backward(dH, ids, gviews):
    np.add.at(gviews["E"], ids, dH)
    return None


def network_forward_batch(model, X, train=False, dropout_rng=None):
    """Forward a batch of windows; returns (outputs, caches for backward).

    X is (B, T, input_dim) float, or (B, T) integer ids when the first layer
    is an embedding.  Dropout masks are drawn when train=True.
    """
    spec = model.spec
    views = model.layer_params()
    caches = []
    H = np.asarray(X)
    is_sequence = True
    for layer, v in zip(spec.layers, views):
        if layer.kind == "embedding":
            H, cache = _embedding_forward(H, v)
        elif layer.kind == "gru":
            H, cache = _gru_forward(H, v, layer.activation)
        elif layer.kind == "lstm":
            H, cache = _lstm_forward(H, v, layer.activation)
        else:  # dense
            if is_sequence:
                caches_take_last = H.shape[1]
                H = H[:, -1, :]
                is_sequence = False
                cache_prefix = caches_take_last
            else:
                cache_prefix = None
            H, cache = _dense_forward(H, v, layer.activation)
            cache = (cache_prefix, cache)
        mask = None
        if train and layer.dropout_rate > 0.0:
            keep = 1.0 - layer.dropout_rate
            mask = (dropout_rng.random(H.shape) < keep) / keep
            H = H * mask
        caches.append((cache, mask))
    return H, caches


def network_backward_batch(model, dout, caches):
    """Backpropagate dout through cached activations; returns flat gradients."""
    spec = model.spec
    views = model.layer_params()
    grads = np.zeros_like(model.params)
    gmodel = TrainedModel(spec, grads)
    gviews = gmodel.layer_params()
    dH = dout
    for layer, v, g, (cache, mask) in zip(
            reversed(spec.layers), reversed(views), reversed(gviews),
            reversed(caches)):
        if mask is not None:
            dH = dH * mask
        if layer.kind == "dense":
            cache_prefix, dense_cache = cache
            dH = _dense_backward(dH, dense_cache, v, g, layer.activation)
            if cache_prefix is not None:
                full = np.zeros((dH.shape[0], cache_prefix, dH.shape[1]))
                full[:, -1, :] = dH
                dH = full
        elif layer.kind == "gru":
            dH = _gru_backward(dH, cache, v, g, layer.activation)
        elif layer.kind == "lstm":
            dH = _lstm_backward(dH, cache, v, g, layer.activation)
        else:  # embedding
            dH = _embedding_backward(dH, cache, g)
    return grads


def forward(model, window):
    """Inference on a single window; dropout disabled.

    window is (T, input_dim) float (or length-T int ids for embedding-first
    networks); returns the output vector of length output_dim.
    """
    window = np.asarray(window)
    first = model.spec.layers[0]
    if first.kind == "embedding":
        if window.ndim != 1:
            raise NetworkSpecError("embedding network expects a 1-D id window")
        batch = window[None, :]
    else:
        if window.ndim != 2 or window.shape[1] != model.spec.input_dim:
            raise NetworkSpecError(
                f"window must be (steps, {model.spec.input_dim}), "
                f"got {window.shape}")
        batch = window[None, :, :].astype(np.float64)
    out, _ = network_forward_batch(model, batch, train=False)
    return out[0]
