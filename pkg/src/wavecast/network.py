"""Bidirectional LSTM built from scratch: gated cell forward, sequence-to-one
model with a dense head, exact backpropagation through time (both directions),
inverted dropout, and the Adam/RMSprop optimizers.

Everything runs in 64-bit numpy; model sizes here are desk scale, and the
gradient checks need the precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError, ShapeError, StateError

ACTIVATIONS = ("relu", "elu", "tanh", "identity")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
RMSPROP_RHO = 0.9
EPSILON = 1e-8

GATES = "fioc"  # stacking order of the gate blocks


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _activation(name: str, x: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "elu":
        return np.where(x > 0, x, np.expm1(x))
    if name == "tanh":
        return np.tanh(x)
    if name == "identity":
        return x
    raise DataError(f"unknown activation {name!r}")


def _activation_grad(name: str, pre: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (pre > 0).astype(float)
    if name == "elu":
        return np.where(pre > 0, 1.0, np.exp(pre))
    if name == "tanh":
        t = np.tanh(pre)
        return 1.0 - t * t
    if name == "identity":
        return np.ones_like(pre)
    raise DataError(f"unknown activation {name!r}")


@dataclass
class LstmCellParams:
    """Per-gate weight matrices [hidden, input], recurrent matrices
    [hidden, hidden] and bias vectors [hidden]."""

    W_f: np.ndarray
    W_i: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    U_f: np.ndarray
    U_i: np.ndarray
    U_o: np.ndarray
    U_c: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1]

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = np.concatenate([self.W_f, self.W_i, self.W_o, self.W_c], axis=0)
        u = np.concatenate([self.U_f, self.U_i, self.U_o, self.U_c], axis=0)
        b = np.concatenate([self.b_f, self.b_i, self.b_o, self.b_c])
        return w, u, b

    def arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for kind in ("W", "U", "b"):
            for gate in GATES:
                name = f"{kind}_{gate}"
                out.append((name, getattr(self, name)))
        return out


@dataclass
class BdLstmLayer:
    forward_cell: LstmCellParams
    backward_cell: LstmCellParams
    dropout_rate: float = 0.0

    @property
    def hidden_size(self) -> int:
        return self.forward_cell.hidden_size

    @property
    def output_size(self) -> int:
        return 2 * self.hidden_size


@dataclass
class DenseLayer:
    W: np.ndarray  # [out, in]
    b: np.ndarray  # [out]
    activation: str = "identity"


@dataclass
class BdLstmModel:
    bdlstm_layers: list[BdLstmLayer]
    dense_layers: list[DenseLayer]
    output_layer: DenseLayer
    l2: float = 0.0

    @property
    def num_features(self) -> int:
        return self.bdlstm_layers[0].forward_cell.input_size

    @property
    def horizon(self) -> int:
        return self.output_layer.W.shape[0]

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Deterministic (name, array) walk over every trainable tensor."""
        out = []
        for li, layer in enumerate(self.bdlstm_layers):
            for dname, cell in (("fw", layer.forward_cell), ("bw", layer.backward_cell)):
                for name, arr in cell.arrays():
                    out.append((f"bdlstm{li}.{dname}.{name}", arr))
        for di, layer in enumerate(self.dense_layers):
            out.append((f"dense{di}.W", layer.W))
            out.append((f"dense{di}.b", layer.b))
        out.append(("out.W", self.output_layer.W))
        out.append(("out.b", self.output_layer.b))
        return out

    def weight_matrices(self) -> list[tuple[str, np.ndarray]]:
        """The L2-penalized tensors: every W and U, biases excluded."""
        return [(n, a) for n, a in self.parameters() if not n.split(".")[-1].startswith("b")]


def _uniform_init(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = np.sqrt(1.0 / cols)
    return rng.uniform(-bound, bound, size=(rows, cols))


def init_lstm_cell(input_size: int, hidden_size: int, rng: np.random.Generator) -> LstmCellParams:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights; the forget-gate bias
    starts at 1 so early training does not flush the cell state."""
    weights = {}
    for gate in GATES:
        weights[f"W_{gate}"] = _uniform_init(rng, hidden_size, input_size)
    for gate in GATES:
        weights[f"U_{gate}"] = _uniform_init(rng, hidden_size, hidden_size)
    for gate in GATES:
        weights[f"b_{gate}"] = np.ones(hidden_size) if gate == "f" else np.zeros(hidden_size)
    return LstmCellParams(**weights)


def init_dense(input_size: int, output_size: int, activation: str,
               rng: np.random.Generator) -> DenseLayer:
    if activation not in ACTIVATIONS:
        raise DataError(f"unknown activation {activation!r}")
    return DenseLayer(_uniform_init(rng, output_size, input_size),
                      np.zeros(output_size), activation)


def init_model(num_features: int, bdlstm_sizes: tuple[int, ...],
               fc_sizes: tuple[int, ...], horizon: int,
               rng: np.random.Generator, activation: str = "tanh",
               dropout_rates: tuple[float, ...] = (), l2: float = 0.0) -> BdLstmModel:
    if not bdlstm_sizes:
        raise DataError("need at least one BDLSTM layer")
    layers = []
    width = num_features
    for li, hidden in enumerate(bdlstm_sizes):
        rate = dropout_rates[li] if li < len(dropout_rates) else 0.0
        if not 0.0 <= rate < 1.0:
            raise DataError(f"dropout rate must be in [0, 1), got {rate}")
        layers.append(BdLstmLayer(
            forward_cell=init_lstm_cell(width, hidden, rng),
            backward_cell=init_lstm_cell(width, hidden, rng),
            dropout_rate=rate,
        ))
        width = 2 * hidden
    dense = []
    for size in fc_sizes:
        dense.append(init_dense(width, size, activation, rng))
        width = size
    output = init_dense(width, horizon, "identity", rng)
    return BdLstmModel(layers, dense, output, l2=l2)


def lstm_cell_step(params: LstmCellParams, x_t: np.ndarray, h_prev: np.ndarray,
                   C_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    """One gated cell update; the cache keeps the gate values for backprop."""
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    C_prev = np.asarray(C_prev, dtype=float)
    hidden = params.hidden_size
    if x_t.shape[-1] != params.input_size or h_prev.shape[-1] != hidden \
            or C_prev.shape[-1] != hidden:
        raise ShapeError(
            f"cell expects input {params.input_size}, state {hidden}; got "
            f"x {x_t.shape}, h {h_prev.shape}, C {C_prev.shape}"
        )
    w, u, b = params.stacked()
    a = x_t @ w.T + h_prev @ u.T + b
    f = _sigmoid(a[..., :hidden])
    i = _sigmoid(a[..., hidden:2 * hidden])
    o = _sigmoid(a[..., 2 * hidden:3 * hidden])
    g = np.tanh(a[..., 3 * hidden:])
    C_t = f * C_prev + i * g
    tanh_c = np.tanh(C_t)
    h_t = o * tanh_c
    if not (np.all(np.isfinite(h_t)) and np.all(np.isfinite(C_t))):
        raise NumericError("non-finite cell state")
    cache = {"f": f, "i": i, "o": o, "g": g, "C_prev": C_prev, "C": C_t,
             "tanh_c": tanh_c, "h_prev": h_prev, "x": x_t}
    return h_t, C_t, cache


def _scan_direction(cell: LstmCellParams, inputs: np.ndarray, reverse: bool) -> tuple[np.ndarray, dict]:
    """Run one cell over [batch, T, features] in scan order; outputs and cache
    stay in scan order (callers flip the reverse direction back)."""
    batch, steps, _ = inputs.shape
    hidden = cell.hidden_size
    xd = inputs[:, ::-1] if reverse else inputs
    w, u, b = cell.stacked()
    pre_in = xd @ w.T + b

    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    shape = (steps, batch, hidden)
    cache = {k: np.empty(shape) for k in ("f", "i", "o", "g", "C_prev", "tanh_c", "h_prev")}
    out = np.empty((batch, steps, hidden))
    for t in range(steps):
        a = pre_in[:, t] + h @ u.T
        f = _sigmoid(a[:, :hidden])
        i = _sigmoid(a[:, hidden:2 * hidden])
        o = _sigmoid(a[:, 2 * hidden:3 * hidden])
        g = np.tanh(a[:, 3 * hidden:])
        cache["f"][t] = f
        cache["i"][t] = i
        cache["o"][t] = o
        cache["g"][t] = g
        cache["C_prev"][t] = c
        cache["h_prev"][t] = h
        c = f * c + i * g
        h = o * np.tanh(c)
        cache["tanh_c"][t] = np.tanh(c)
        out[:, t] = h
    cache["xd"] = xd
    cache["stacked"] = (w, u, b)
    return out, cache


def _scan_backward(cell: LstmCellParams, cache: dict, d_out_scan: np.ndarray) -> tuple[np.ndarray, dict]:
    """BPTT through one scan direction; d_out_scan is [T, batch, hidden] in
    scan order. Returns (d_inputs in scan order, per-gate gradient dict)."""
    w, u, _ = cache["stacked"]
    steps, batch, hidden = d_out_scan.shape
    da_all = np.empty((steps, batch, 4 * hidden))
    dh = np.zeros((batch, hidden))
    dc = np.zeros((batch, hidden))
    for t in range(steps - 1, -1, -1):
        f, i, o, g = cache["f"][t], cache["i"][t], cache["o"][t], cache["g"][t]
        tanh_c = cache["tanh_c"][t]
        dh = dh + d_out_scan[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        df = dc * cache["C_prev"][t]
        di = dc * g
        dg = dc * i
        dc = dc * f
        da = da_all[t]
        da[:, :hidden] = df * f * (1.0 - f)
        da[:, hidden:2 * hidden] = di * i * (1.0 - i)
        da[:, 2 * hidden:3 * hidden] = do * o * (1.0 - o)
        da[:, 3 * hidden:] = dg * (1.0 - g * g)
        dh = da @ u

    xd = cache["xd"]
    dw = np.einsum("tbg,btf->gf", da_all, xd)
    du = np.einsum("tbg,tbh->gh", da_all, cache["h_prev"])
    db = da_all.sum(axis=(0, 1))
    dx = np.einsum("tbg,gf->btf", da_all, w)
    grads = {}
    for gi, gate in enumerate(GATES):
        grads[f"W_{gate}"] = dw[gi * hidden:(gi + 1) * hidden]
        grads[f"U_{gate}"] = du[gi * hidden:(gi + 1) * hidden]
        grads[f"b_{gate}"] = db[gi * hidden:(gi + 1) * hidden]
    return dx, grads


@dataclass
class ForwardCache:
    inputs: np.ndarray
    layer_inputs: list[np.ndarray]
    direction_caches: list[tuple[dict, dict]]
    masks: list[np.ndarray | None]
    dense_inputs: list[np.ndarray]
    dense_pres: list[np.ndarray]
    predictions: np.ndarray
    training: bool


def forward_pass(model: BdLstmModel, inputs: np.ndarray, training: bool = False,
                 rng: np.random.Generator | None = None,
                 masks: list[np.ndarray | None] | None = None) -> ForwardCache:
    """Run the full model on [batch, T, features] inputs.

    When training, inverted-dropout masks are drawn from ``rng`` (or taken
    from ``masks``) and applied to each BDLSTM layer's output sequence.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 3:
        raise ShapeError(f"expected [batch, T, features] inputs, got {inputs.shape}")
    if inputs.shape[1] < 1:
        raise ShapeError("empty sequence")
    if inputs.shape[2] != model.num_features:
        raise ShapeError(
            f"model expects {model.num_features} features, got {inputs.shape[2]}"
        )
    if training and rng is None and masks is None:
        raise StateError("training forward pass needs an rng (or explicit masks)")

    x = inputs
    layer_inputs = []
    direction_caches = []
    used_masks: list[np.ndarray | None] = []
    for li, layer in enumerate(model.bdlstm_layers):
        layer_inputs.append(x)
        fwd_out, fwd_cache = _scan_direction(layer.forward_cell, x, reverse=False)
        bwd_out, bwd_cache = _scan_direction(layer.backward_cell, x, reverse=True)
        out = np.concatenate([fwd_out, bwd_out[:, ::-1]], axis=2)
        mask = None
        if training and layer.dropout_rate > 0.0:
            if masks is not None:
                mask = masks[li]
            else:
                keep = 1.0 - layer.dropout_rate
                mask = (rng.random(out.shape) < keep) / keep
            out = out * mask
        used_masks.append(mask)
        direction_caches.append((fwd_cache, bwd_cache))
        x = out

    z = x[:, -1, :]  # sequence-to-one: only the last step feeds the head
    dense_inputs = []
    dense_pres = []
    for layer in model.dense_layers:
        dense_inputs.append(z)
        pre = z @ layer.W.T + layer.b
        dense_pres.append(pre)
        z = _activation(layer.activation, pre)
    dense_inputs.append(z)
    pred = z @ model.output_layer.W.T + model.output_layer.b
    dense_pres.append(pred)

    if not np.all(np.isfinite(pred)):
        raise NumericError("non-finite prediction")
    return ForwardCache(inputs, layer_inputs, direction_caches, used_masks,
                        dense_inputs, dense_pres, pred, training)


def model_forward(model: BdLstmModel, sequence: np.ndarray, training: bool = False,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Prediction vector [horizon] for one [T, features] sequence."""
    sequence = np.asarray(sequence, dtype=float)
    if sequence.ndim != 2:
        raise ShapeError(f"expected [T, features], got {sequence.shape}")
    cache = forward_pass(model, sequence[None], training=training, rng=rng)
    return cache.predictions[0]


def bdlstm_forward(layer: BdLstmLayer, sequence: np.ndarray) -> np.ndarray:
    """Output sequence [T, 2*hidden] of one bidirectional layer: the forward
    scan concatenated with the time-realigned backward scan."""
    sequence = np.asarray(sequence, dtype=float)
    if sequence.ndim != 2 or sequence.shape[0] < 1:
        raise ShapeError(f"expected a non-empty [T, features] sequence, got {sequence.shape}")
    x = sequence[None]
    fwd_out, _ = _scan_direction(layer.forward_cell, x, reverse=False)
    bwd_out, _ = _scan_direction(layer.backward_cell, x, reverse=True)
    return np.concatenate([fwd_out[0], bwd_out[0, ::-1]], axis=1)


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ShapeError(f"prediction shape {predictions.shape} != target {targets.shape}")
    return float(np.mean((predictions - targets) ** 2))


def loss(predictions: np.ndarray, targets: np.ndarray, model: BdLstmModel) -> float:
    """Mean squared error plus l2 * sum of squared weight-matrix entries."""
    penalty = 0.0
    if model.l2 > 0.0:
        penalty = model.l2 * sum(float(np.sum(a * a)) for _, a in model.weight_matrices())
    return mse_loss(predictions, targets) + penalty


def backward(model: BdLstmModel, cache: ForwardCache | None,
             targets: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Exact loss gradients for every parameter from the cached forward pass."""
    if cache is None:
        raise StateError("backward needs the ForwardCache of a prior forward_pass")
    targets = np.asarray(targets, dtype=float)
    pred = cache.predictions
    if targets.shape != pred.shape:
        raise ShapeError(f"target shape {targets.shape} != prediction {pred.shape}")

    total = loss(pred, targets, model)
    grads: dict[str, np.ndarray] = {}
    d_pred = 2.0 * (pred - targets) / pred.size

    # dense head, output layer first
    grads["out.W"] = d_pred.T @ cache.dense_inputs[-1]
    grads["out.b"] = d_pred.sum(axis=0)
    dz = d_pred @ model.output_layer.W
    for di in range(len(model.dense_layers) - 1, -1, -1):
        layer = model.dense_layers[di]
        dpre = dz * _activation_grad(layer.activation, cache.dense_pres[di])
        grads[f"dense{di}.W"] = dpre.T @ cache.dense_inputs[di]
        grads[f"dense{di}.b"] = dpre.sum(axis=0)
        dz = dpre @ layer.W

    # spread the head gradient onto the last time step of the BDLSTM stack
    last = model.bdlstm_layers[-1]
    batch, steps, _ = cache.layer_inputs[-1].shape
    d_out = np.zeros((batch, steps, last.output_size))
    d_out[:, -1, :] = dz

    for li in range(len(model.bdlstm_layers) - 1, -1, -1):
        layer = model.bdlstm_layers[li]
        hidden = layer.hidden_size
        mask = cache.masks[li]
        if mask is not None:
            d_out = d_out * mask
        fwd_cache, bwd_cache = cache.direction_caches[li]
        d_fwd = np.ascontiguousarray(d_out[:, :, :hidden].transpose(1, 0, 2))
        d_bwd = np.ascontiguousarray(d_out[:, ::-1, hidden:].transpose(1, 0, 2))
        dx_fwd, g_fwd = _scan_backward(layer.forward_cell, fwd_cache, d_fwd)
        dx_bwd, g_bwd = _scan_backward(layer.backward_cell, bwd_cache, d_bwd)
        for name, arr in g_fwd.items():
            grads[f"bdlstm{li}.fw.{name}"] = arr
        for name, arr in g_bwd.items():
            grads[f"bdlstm{li}.bw.{name}"] = arr
        d_out = dx_fwd + dx_bwd[:, ::-1]

    if model.l2 > 0.0:
        penalized = dict(model.weight_matrices())
        for name, w in penalized.items():
            grads[name] = grads[name] + 2.0 * model.l2 * w
    return total, grads


@dataclass
class OptimizerState:
    kind: str
    learning_rate: float
    decay: float = 0.0
    step: int = 0
    slots: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("adam", "rmsprop"):
            raise DataError(f"unknown optimizer {self.kind!r}")


def init_optimizer(kind: str, learning_rate: float, decay: float = 0.0) -> OptimizerState:
    return OptimizerState(kind=kind, learning_rate=learning_rate, decay=decay)


def optimizer_step(state: OptimizerState, model: BdLstmModel,
                   grads: dict[str, np.ndarray]) -> None:
    """Apply one update in place. The effective learning rate at step k is
    lr / (1 + decay * k); a non-finite gradient aborts before touching params."""
    params = model.parameters()
    for name, _ in params:
        if name not in grads:
            raise StateError(f"missing gradient for parameter {name!r}")
        if not np.all(np.isfinite(grads[name])):
            raise NumericError(f"non-finite gradient for {name!r}")

    lr = state.learning_rate / (1.0 + state.decay * state.step)
    t = state.step + 1
    for name, param in params:
        g = grads[name]
        slot = state.slots.setdefault(name, {})
        if state.kind == "adam":
            m = slot.setdefault("m", np.zeros_like(param))
            v = slot.setdefault("v", np.zeros_like(param))
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            m_hat = m / (1.0 - ADAM_BETA1 ** t)
            v_hat = v / (1.0 - ADAM_BETA2 ** t)
            param -= lr * m_hat / (np.sqrt(v_hat) + EPSILON)
        else:
            acc = slot.setdefault("acc", np.zeros_like(param))
            acc *= RMSPROP_RHO
            acc += (1.0 - RMSPROP_RHO) * g * g
            param -= lr * g / (np.sqrt(acc) + EPSILON)
    state.step = t


def train_step(model: BdLstmModel, optimizer: OptimizerState, inputs: np.ndarray,
               targets: np.ndarray, rng: np.random.Generator | None = None) -> float:
    """One full forward/backward/update on a batch; returns the batch loss."""
    cache = forward_pass(model, inputs, training=True, rng=rng)
    value, grads = backward(model, cache, targets)
    optimizer_step(optimizer, model, grads)
    return value


# --- checkpointing -----------------------------------------------------------

def _array_to_json(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": arr.ravel().tolist()}


def _array_from_json(obj: dict) -> np.ndarray:
    return np.array(obj["data"], dtype=float).reshape(obj["shape"])


def save_checkpoint(model: BdLstmModel, optimizer: OptimizerState | None = None,
                    rng: np.random.Generator | None = None,
                    extra: dict | None = None) -> str:
    """Serialize topology, parameters, optimizer state and RNG state to JSON.

    Floats go through repr-exact JSON encoding, so reloading reproduces the
    next training step bit for bit.
    """
    doc: dict = {
        "topology": {
            "num_features": model.num_features,
            "bdlstm": [{"hidden": layer.hidden_size, "dropout": layer.dropout_rate}
                       for layer in model.bdlstm_layers],
            "dense": [{"width": layer.W.shape[0], "activation": layer.activation}
                      for layer in model.dense_layers],
            "horizon": model.horizon,
            "l2": model.l2,
        },
        "params": {name: _array_to_json(arr) for name, arr in model.parameters()},
    }
    if optimizer is not None:
        doc["optimizer"] = {
            "kind": optimizer.kind,
            "learning_rate": optimizer.learning_rate,
            "decay": optimizer.decay,
            "step": optimizer.step,
            "slots": {name: {k: _array_to_json(v) for k, v in slot.items()}
                      for name, slot in optimizer.slots.items()},
        }
    if rng is not None:
        doc["rng_state"] = rng.bit_generator.state
    if extra:
        doc["extra"] = extra
    return json.dumps(doc, sort_keys=True)


def load_checkpoint(text: str) -> tuple[BdLstmModel, OptimizerState | None,
                                        np.random.Generator | None, dict]:
    doc = json.loads(text)
    topo = doc["topology"]
    rng0 = np.random.default_rng(0)  # placeholder weights, overwritten below
    model = init_model(
        num_features=topo["num_features"],
        bdlstm_sizes=tuple(entry["hidden"] for entry in topo["bdlstm"]),
        fc_sizes=tuple(entry["width"] for entry in topo["dense"]),
        horizon=topo["horizon"],
        rng=rng0,
        dropout_rates=tuple(entry["dropout"] for entry in topo["bdlstm"]),
        l2=topo["l2"],
    )
    for di, entry in enumerate(topo["dense"]):
        model.dense_layers[di].activation = entry["activation"]
    for name, arr in model.parameters():
        arr[...] = _array_from_json(doc["params"][name])

    optimizer = None
    if "optimizer" in doc:
        opt = doc["optimizer"]
        optimizer = OptimizerState(
            kind=opt["kind"], learning_rate=opt["learning_rate"],
            decay=opt["decay"], step=opt["step"],
            slots={name: {k: _array_from_json(v) for k, v in slot.items()}
                   for name, slot in opt["slots"].items()},
        )
    rng = None
    if "rng_state" in doc:
        bg = np.random.PCG64()
        bg.state = doc["rng_state"]
        rng = np.random.Generator(bg)
    return model, optimizer, rng, doc.get("extra", {})
