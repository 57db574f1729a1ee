"""Message-passing networks predicting QAOA angles, trained with reverse-mode gradients.

Four layer families over a shared skeleton: per-layer node updates, dropout
between layers while training, arithmetic mean pooling per graph, then a small
MLP head emitting 2p values wrapped to the canonical angle ranges.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .dataset import DatasetRecord, node_features
from .graphs import Graph
from .simulator import QaoaParams, wrap_canonical

LAYER_TYPES = ("gcn", "sage", "gat", "gin")
GAT_VARIANTS = ("mean", "sum")
LEAKY_SLOPE = 0.2
FORMAT_VERSION = 1


@dataclass
class GnnModel:
    layer_type: str
    p: int = 1
    input_dim: int = 15
    hidden_dim: int = 32
    num_layers: int = 2
    dropout: float = 0.5
    gat_aggregation: str = "mean"
    weights: dict[str, ad.Tensor] = dc_field(default_factory=dict)

    def angle_periods(self) -> np.ndarray:
        return np.array([2.0 * math.pi] * self.p + [math.pi] * self.p)


@dataclass
class TrainConfig:
    epochs: int = 100
    lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    scheduler_factor: float = 0.5
    scheduler_patience: int = 5
    min_lr: float = 1e-5
    seed: int = 0
    batch_size: int | None = None

    def __post_init__(self):
        if not 0.0 < self.scheduler_factor < 1.0:
            raise ValueError(f"scheduler factor must be in (0, 1), got {self.scheduler_factor}")
        if self.min_lr <= 0.0:
            raise ValueError(f"min_lr must be > 0, got {self.min_lr}")


def _weight_spec(layer_type: str, p: int, input_dim: int, hidden_dim: int, num_layers: int) -> dict[str, tuple[int, ...]]:
    """Name -> shape map; single source of truth for init, checkpoints, and loading."""
    if layer_type not in LAYER_TYPES:
        raise ValueError(f"unknown layer_type {layer_type!r}, expected one of {LAYER_TYPES}")
    spec: dict[str, tuple[int, ...]] = {}
    for layer in range(num_layers):
        din = input_dim if layer == 0 else hidden_dim
        dout = hidden_dim
        prefix = f"layers.{layer}"
        if layer_type == "gcn":
            spec[f"{prefix}.W"] = (din, dout)
        elif layer_type == "sage":
            spec[f"{prefix}.W_agg"] = (din, dout)
            spec[f"{prefix}.W_comb"] = (din + dout, dout)
        elif layer_type == "gat":
            spec[f"{prefix}.W"] = (din, dout)
            spec[f"{prefix}.a"] = (2 * dout, 1)
        else:
            spec[f"{prefix}.eps"] = ()
            spec[f"{prefix}.mlp.W1"] = (din, dout)
            spec[f"{prefix}.mlp.b1"] = (dout,)
            spec[f"{prefix}.mlp.W2"] = (dout, dout)
            spec[f"{prefix}.mlp.b2"] = (dout,)
    spec["head.W1"] = (hidden_dim, hidden_dim)
    spec["head.b1"] = (hidden_dim,)
    spec["head.W2"] = (hidden_dim, 2 * p)
    spec["head.b2"] = (2 * p,)
    return spec


def init_model(
    layer_type: str,
    seed: int,
    p: int = 1,
    input_dim: int = 15,
    hidden_dim: int = 32,
    num_layers: int = 2,
    dropout: float = 0.5,
    gat_aggregation: str = "mean",
) -> GnnModel:
    """Glorot-uniform weight matrices, zero biases, zero GIN epsilon; seeded."""
    if gat_aggregation not in GAT_VARIANTS:
        raise ValueError(f"gat_aggregation must be one of {GAT_VARIANTS}, got {gat_aggregation!r}")
    rng = np.random.default_rng(seed)
    weights: dict[str, ad.Tensor] = {}
    for name, shape in _weight_spec(layer_type, p, input_dim, hidden_dim, num_layers).items():
        if len(shape) == 2:
            limit = math.sqrt(6.0 / (shape[0] + shape[1]))
            weights[name] = ad.parameter(rng.uniform(-limit, limit, size=shape))
        else:
            weights[name] = ad.parameter(np.zeros(shape))
    return GnnModel(layer_type, p, input_dim, hidden_dim, num_layers, dropout, gat_aggregation, weights)


@dataclass
class GraphBatch:
    """Block-diagonal packing of several graphs for one forward pass."""

    features: np.ndarray
    node_seg: np.ndarray
    num_graphs: int
    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    closed_src: np.ndarray
    closed_dst: np.ndarray
    inv_closed_deg: np.ndarray
    gat_src: np.ndarray
    gat_dst: np.ndarray
    inv_gat_deg: np.ndarray


def build_batch(graphs: list[Graph]) -> GraphBatch:
    if not graphs:
        raise ValueError("empty graph batch")
    feats = []
    seg = []
    src: list[int] = []
    dst: list[int] = []
    offset = 0
    degrees = []
    for gi, g in enumerate(graphs):
        feats.append(node_features(g))
        seg.extend([gi] * g.n)
        for u, v, _ in g.edges:
            src.extend((offset + u, offset + v))
            dst.extend((offset + v, offset + u))
        degrees.append(g.degrees())
        offset += g.n
    num_nodes = offset
    deg = np.concatenate(degrees).astype(np.float64)
    src_a = np.array(src, dtype=np.int64)
    dst_a = np.array(dst, dtype=np.int64)
    loops = np.arange(num_nodes, dtype=np.int64)
    isolated = loops[deg == 0]
    return GraphBatch(
        features=np.vstack(feats),
        node_seg=np.array(seg, dtype=np.int64),
        num_graphs=len(graphs),
        num_nodes=num_nodes,
        src=src_a,
        dst=dst_a,
        closed_src=np.concatenate([src_a, loops]),
        closed_dst=np.concatenate([dst_a, loops]),
        inv_closed_deg=(1.0 / (deg + 1.0))[:, None],
        gat_src=np.concatenate([src_a, isolated]),
        gat_dst=np.concatenate([dst_a, isolated]),
        inv_gat_deg=(1.0 / np.maximum(deg, 1.0))[:, None],
    )


def gcn_layer(h: ad.Tensor, batch: GraphBatch, W: ad.Tensor) -> ad.Tensor:
    """h_v <- ReLU(W applied to the mean over the closed neighborhood of v)."""
    summed = ad.scatter_sum_rows(ad.gather_rows(h, batch.closed_src), batch.closed_dst, batch.num_nodes)
    mean = ad.mul(summed, ad.constant(batch.inv_closed_deg))
    return ad.relu(ad.matmul(mean, W))


def sage_layer(h: ad.Tensor, batch: GraphBatch, W_agg: ad.Tensor, W_comb: ad.Tensor) -> ad.Tensor:
    """Elementwise-max of ReLU-transformed neighbors, concatenated with self, then combined.

    Vertices with no neighbors get a zero aggregate.
    """
    pre = ad.relu(ad.matmul(h, W_agg))
    agg = ad.neighbor_max_rows(ad.gather_rows(pre, batch.src), batch.dst, batch.num_nodes)
    return ad.matmul(ad.concat_cols(h, agg), W_comb)


def gat_layer(
    h: ad.Tensor,
    batch: GraphBatch,
    W: ad.Tensor,
    a: ad.Tensor,
    aggregation: str = "mean",
    return_attention: bool = False,
):
    """Single-head attention over neighborhoods.

    Attention logits use LeakyReLU(a^T [W h_v || W h_u]) for target v and
    source u, normalized by softmax over each target's neighbors. Isolated
    vertices attend to themselves. The "mean" aggregation divides the attended
    sum by the neighbor count; "sum" leaves it as is.
    """
    if aggregation not in GAT_VARIANTS:
        raise ValueError(f"aggregation must be one of {GAT_VARIANTS}, got {aggregation!r}")
    wh = ad.matmul(h, W)
    wh_dst = ad.gather_rows(wh, batch.gat_dst)
    wh_src = ad.gather_rows(wh, batch.gat_src)
    logits = ad.leaky_relu(ad.matmul(ad.concat_cols(wh_dst, wh_src), a), LEAKY_SLOPE)
    alpha = ad.segment_softmax(ad.reshape(logits, (len(batch.gat_dst),)), batch.gat_dst, batch.num_nodes)
    alpha_col = ad.reshape(alpha, (len(batch.gat_dst), 1))
    attended = ad.scatter_sum_rows(ad.mul(alpha_col, wh_src), batch.gat_dst, batch.num_nodes)
    if aggregation == "mean":
        attended = ad.mul(attended, ad.constant(batch.inv_gat_deg))
    if return_attention:
        return attended, alpha
    return attended


def gin_layer(h: ad.Tensor, batch: GraphBatch, eps: ad.Tensor, W1, b1, W2, b2) -> ad.Tensor:
    """h_v <- MLP((1 + eps) * h_v + sum of neighbor embeddings)."""
    neigh = ad.scatter_sum_rows(ad.gather_rows(h, batch.src), batch.dst, batch.num_nodes)
    pre = ad.add(ad.mul(h, ad.add(eps, ad.constant(1.0))), neigh)
    hidden = ad.relu(ad.add(ad.matmul(pre, W1), b1))
    return ad.add(ad.matmul(hidden, W2), b2)


def mean_pool(h: ad.Tensor, batch: GraphBatch) -> ad.Tensor:
    return ad.segment_mean_rows(h, batch.node_seg, batch.num_graphs)


def _layer_forward(model: GnnModel, layer: int, h: ad.Tensor, batch: GraphBatch) -> ad.Tensor:
    w = model.weights
    prefix = f"layers.{layer}"
    if model.layer_type == "gcn":
        return gcn_layer(h, batch, w[f"{prefix}.W"])
    if model.layer_type == "sage":
        return sage_layer(h, batch, w[f"{prefix}.W_agg"], w[f"{prefix}.W_comb"])
    if model.layer_type == "gat":
        return gat_layer(h, batch, w[f"{prefix}.W"], w[f"{prefix}.a"], model.gat_aggregation)
    return gin_layer(
        h, batch,
        w[f"{prefix}.eps"],
        w[f"{prefix}.mlp.W1"], w[f"{prefix}.mlp.b1"],
        w[f"{prefix}.mlp.W2"], w[f"{prefix}.mlp.b2"],
    )


def forward(model: GnnModel, batch: GraphBatch, training: bool = False, rng: np.random.Generator | None = None) -> ad.Tensor:
    """Predicted angles, one row per graph: p gammas then p betas, canonically wrapped."""
    if training and model.dropout > 0.0 and rng is None:
        raise ValueError("training forward with dropout needs an rng")
    h = ad.constant(batch.features)
    for layer in range(model.num_layers):
        h = _layer_forward(model, layer, h, batch)
        if training and model.dropout > 0.0 and layer < model.num_layers - 1:
            h = ad.dropout(h, model.dropout, rng)
    pooled = mean_pool(h, batch)
    if training and model.dropout > 0.0:
        pooled = ad.dropout(pooled, model.dropout, rng)
    hidden = ad.relu(ad.add(ad.matmul(pooled, model.weights["head.W1"]), model.weights["head.b1"]))
    out = ad.add(ad.matmul(hidden, model.weights["head.W2"]), model.weights["head.b2"])
    return ad.wrap_columns(out, model.angle_periods())


def predict_params(model: GnnModel, g: Graph) -> QaoaParams:
    """Inference-mode prediction; dropout off, deterministic."""
    row = forward(model, build_batch([g]), training=False).values[0]
    return QaoaParams(tuple(row[: model.p]), tuple(row[model.p :]))


def mse_loss(pred: QaoaParams, target: QaoaParams) -> float:
    if pred.p != target.p:
        raise ValueError(f"depth mismatch: {pred.p} vs {target.p}")
    a = wrap_canonical(pred).flat()
    b = wrap_canonical(target).flat()
    return float(np.mean((a - b) ** 2))


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = dc_field(default_factory=dict)
    v: dict[str, np.ndarray] = dc_field(default_factory=dict)
    t: int = 0


def adam_step(
    weights: dict[str, ad.Tensor],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected adaptive-moment descent step, in place."""
    state.t += 1
    for name, tensor in weights.items():
        g = grads[name]
        if g.shape != tensor.values.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m = state.m.setdefault(name, np.zeros_like(tensor.values))
        v = state.v.setdefault(name, np.zeros_like(tensor.values))
        m[...] = beta1 * m + (1.0 - beta1) * g
        v[...] = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** state.t)
        v_hat = v / (1.0 - beta2 ** state.t)
        # asarray: 0-d arrays would otherwise decay to immutable numpy scalars
        tensor.values = np.asarray(tensor.values - lr * m_hat / (np.sqrt(v_hat) + eps))


@dataclass
class PlateauState:
    lr: float
    factor: float = 0.5
    patience: int = 5
    min_lr: float = 1e-5
    best: float = math.inf
    bad_epochs: int = 0


def plateau_step(state: PlateauState, metric: float) -> float:
    """Reduce lr once the metric fails to improve for patience+1 consecutive epochs."""
    if metric < state.best:
        state.best = metric
        state.bad_epochs = 0
    else:
        state.bad_epochs += 1
        if state.bad_epochs > state.patience:
            state.lr = max(state.lr * state.factor, state.min_lr)
            state.bad_epochs = 0
    return state.lr


def _records_batch(records: list[DatasetRecord]) -> tuple[GraphBatch, np.ndarray]:
    batch = build_batch([r.graph for r in records])
    targets = np.array([wrap_canonical(QaoaParams(r.gamma, r.beta)).flat() for r in records])
    return batch, targets


def _loss_tensor(model: GnnModel, batch: GraphBatch, targets: np.ndarray, training: bool, rng) -> ad.Tensor:
    pred = forward(model, batch, training=training, rng=rng)
    diff = ad.sub(pred, ad.constant(targets))
    return ad.mean_all(ad.mul(diff, diff))


def train(
    model: GnnModel,
    train_records: list[DatasetRecord],
    val_records: list[DatasetRecord],
    config: TrainConfig,
) -> tuple[GnnModel, list[dict]]:
    """Full training loop; returns the model at its best validation loss.

    Without validation records the best training loss decides. One optimizer
    step per epoch by default (the whole dataset fits in one batch); set
    config.batch_size for seeded mini-batches. History rows carry per-epoch
    train loss, validation loss, and the learning rate in effect. Deterministic
    for fixed seeds and inputs.
    """
    if not train_records:
        raise ValueError("empty training set")
    full_batch, full_targets = _records_batch(train_records)
    val_data = _records_batch(val_records) if val_records else None
    adam = AdamState()
    sched = PlateauState(
        lr=config.lr,
        factor=config.scheduler_factor,
        patience=config.scheduler_patience,
        min_lr=config.min_lr,
    )
    best_loss = math.inf
    best_weights = {name: t.values.copy() for name, t in model.weights.items()}
    history: list[dict] = []
    lr = config.lr
    for epoch in range(config.epochs):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, epoch]))
        if config.batch_size is None:
            chunks = [(full_batch, full_targets, len(train_records))]
        else:
            order = rng.permutation(len(train_records))
            chunks = []
            for lo in range(0, len(order), config.batch_size):
                part = [train_records[i] for i in order[lo : lo + config.batch_size]]
                cb, ct = _records_batch(part)
                chunks.append((cb, ct, len(part)))
        total = 0.0
        for cb, ct, size in chunks:
            loss = _loss_tensor(model, cb, ct, training=True, rng=rng)
            loss.backward()
            grads = {name: t.grad for name, t in model.weights.items()}
            adam_step(
                model.weights, grads, adam, lr,
                config.adam_beta1, config.adam_beta2, config.adam_eps,
            )
            total += float(loss.values) * size
        train_loss = total / len(train_records)
        lr = plateau_step(sched, train_loss)
        if val_data is not None:
            val_loss = float(_loss_tensor(model, val_data[0], val_data[1], training=False, rng=None).values)
            monitored = val_loss
        else:
            val_loss = None
            monitored = train_loss
        if monitored < best_loss:
            best_loss = monitored
            best_weights = {name: t.values.copy() for name, t in model.weights.items()}
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss, "lr": lr})
    for name, tensor in model.weights.items():
        tensor.values = best_weights[name]
    return model, history


def save_model(model: GnnModel, path: str | Path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "layer_type": model.layer_type,
        "p": model.p,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "num_layers": model.num_layers,
        "dropout": model.dropout,
        "gat_aggregation": model.gat_aggregation,
        "weights": {
            name: {"shape": list(t.values.shape), "values": t.values.ravel().tolist()}
            for name, t in model.weights.items()
        },
    }
    Path(path).write_text(json.dumps(payload), encoding="ascii")


def load_model(path: str | Path) -> GnnModel:
    """Rebuild a model from its JSON checkpoint, validating names and shapes."""
    try:
        payload = json.loads(Path(path).read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"checkpoint is not valid JSON: {exc}") from None
    if payload.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format_version {payload.get('format_version')!r}")
    layer_type = payload.get("layer_type")
    if layer_type not in LAYER_TYPES:
        raise ValueError(f"unknown layer_type {layer_type!r} in checkpoint")
    gat_aggregation = payload.get("gat_aggregation", "mean")
    if gat_aggregation not in GAT_VARIANTS:
        raise ValueError(f"unknown gat_aggregation {gat_aggregation!r} in checkpoint")
    try:
        p = int(payload["p"])
        input_dim = int(payload["input_dim"])
        hidden_dim = int(payload["hidden_dim"])
        num_layers = int(payload["num_layers"])
        dropout = float(payload["dropout"])
        stored = payload["weights"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed checkpoint field: {exc}") from None
    spec = _weight_spec(layer_type, p, input_dim, hidden_dim, num_layers)
    if set(stored) != set(spec):
        missing = sorted(set(spec) - set(stored))
        extra = sorted(set(stored) - set(spec))
        raise ValueError(f"checkpoint weights mismatch: missing {missing}, unexpected {extra}")
    weights: dict[str, ad.Tensor] = {}
    for name, shape in spec.items():
        entry = stored[name]
        if tuple(entry["shape"]) != shape:
            raise ValueError(f"weight {name} has shape {entry['shape']}, expected {list(shape)}")
        values = np.array(entry["values"], dtype=np.float64).reshape(shape)
        if values.size != int(np.prod(shape, dtype=np.int64)) or not np.isfinite(values).all():
            raise ValueError(f"weight {name} has invalid values")
        weights[name] = ad.parameter(values)
    return GnnModel(layer_type, p, input_dim, hidden_dim, num_layers, dropout, gat_aggregation, weights)
