"""Minimal reverse-mode differentiation over float64 numpy arrays.

Covers exactly the operations the message-passing networks need: dense matmul,
broadcast add/sub/mul, ReLU and LeakyReLU, row gather/scatter, per-segment
softmax/mean/max, concatenation, angle wrapping, and full-mean reduction.
Backward walks the recorded graph in reverse topological order; gradients are
freshly allocated per backward call, so nothing accumulates across steps.
"""
from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, values, requires_grad: bool = False):
        self.values = np.asarray(values, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self):
        return self.values.shape

    def __repr__(self):
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"

    def backward(self) -> None:
        """Gradient of a scalar output with respect to every tensor upstream."""
        if self.values.size != 1:
            raise ValueError(f"backward requires a scalar, got shape {self.values.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        for node in order:
            node.grad = np.zeros_like(node.values)
        self.grad = np.ones_like(self.values)
        for node in reversed(order):
            if node._backward is not None:
                node._backward()


def _track(out: Tensor, parents: tuple[Tensor, ...], backward) -> Tensor:
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def constant(values) -> Tensor:
    return Tensor(values, requires_grad=False)


def parameter(values) -> Tensor:
    return Tensor(values, requires_grad=True)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.values + b.values)

    def backward():
        a.grad += _unbroadcast(out.grad, a.values.shape)
        b.grad += _unbroadcast(out.grad, b.values.shape)

    return _track(out, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.values - b.values)

    def backward():
        a.grad += _unbroadcast(out.grad, a.values.shape)
        b.grad -= _unbroadcast(out.grad, b.values.shape)

    return _track(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.values * b.values)

    def backward():
        a.grad += _unbroadcast(out.grad * b.values, a.values.shape)
        b.grad += _unbroadcast(out.grad * a.values, b.values.shape)

    return _track(out, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.values @ b.values)

    def backward():
        a.grad += out.grad @ b.values.T
        b.grad += a.values.T @ out.grad

    return _track(out, (a, b), backward)


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.values, 0.0))

    def backward():
        a.grad += out.grad * (a.values > 0.0)

    return _track(out, (a,), backward)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    out = Tensor(np.where(a.values > 0.0, a.values, slope * a.values))

    def backward():
        a.grad += out.grad * np.where(a.values > 0.0, 1.0, slope)

    return _track(out, (a,), backward)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(np.concatenate([a.values, b.values], axis=1))
    k = a.values.shape[1]

    def backward():
        a.grad += out.grad[:, :k]
        b.grad += out.grad[:, k:]

    return _track(out, (a, b), backward)


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    out = Tensor(a.values[index])

    def backward():
        np.add.at(a.grad, index, out.grad)

    return _track(out, (a,), backward)


def scatter_sum_rows(a: Tensor, index: np.ndarray, num_rows: int) -> Tensor:
    """out[r] = sum of a's rows whose index equals r; rows never hit stay zero."""
    acc = np.zeros((num_rows, a.values.shape[1]))
    np.add.at(acc, index, a.values)
    out = Tensor(acc)

    def backward():
        a.grad += out.grad[index]

    return _track(out, (a,), backward)


def segment_mean_rows(a: Tensor, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Arithmetic mean of a's rows per segment; every segment must be nonempty."""
    counts = np.bincount(segment_ids, minlength=num_segments).astype(np.float64)
    if (counts == 0).any():
        raise ValueError("empty segment in mean reduction")
    acc = np.zeros((num_segments, a.values.shape[1]))
    np.add.at(acc, segment_ids, a.values)
    out = Tensor(acc / counts[:, None])

    def backward():
        a.grad += (out.grad / counts[:, None])[segment_ids]

    return _track(out, (a,), backward)


def segment_softmax(logits: Tensor, segment_ids: np.ndarray, num_segments: int) -> Tensor:
    """Softmax of a flat logit vector within each segment (max-shifted for stability)."""
    x = logits.values
    seg_max = np.full(num_segments, -np.inf)
    np.maximum.at(seg_max, segment_ids, x)
    shifted = np.exp(x - seg_max[segment_ids])
    denom = np.zeros(num_segments)
    np.add.at(denom, segment_ids, shifted)
    soft = shifted / denom[segment_ids]
    out = Tensor(soft)

    def backward():
        weighted = out.grad * soft
        seg_dot = np.zeros(num_segments)
        np.add.at(seg_dot, segment_ids, weighted)
        logits.grad += weighted - soft * seg_dot[segment_ids]

    return _track(out, (logits,), backward)


def neighbor_max_rows(a: Tensor, index: np.ndarray, num_rows: int) -> Tensor:
    """out[r, j] = max over a's rows with index r of column j; rows never hit get 0.

    Gradient flows to one argmax contributor per (row, column); exact ties pick
    the contributor that appears first in `index`.
    """
    cols = a.values.shape[1]
    acc = np.full((num_rows, cols), -np.inf)
    np.maximum.at(acc, index, a.values)
    hit = np.zeros(num_rows, dtype=bool)
    hit[index] = True
    result = np.where(hit[:, None], acc, 0.0)
    # first argmax contributor per (row, col), resolved by a stable scan
    argmax = np.full((num_rows, cols), -1, dtype=np.int64)
    for pos in range(len(index) - 1, -1, -1):
        r = index[pos]
        is_max = a.values[pos] == acc[r]
        argmax[r] = np.where(is_max, pos, argmax[r])
    out = Tensor(result)

    def backward():
        flat = argmax.ravel()
        valid = flat >= 0
        rows = flat[valid]
        col_idx = np.tile(np.arange(cols), num_rows)[valid]
        np.add.at(a.grad, (rows, col_idx), out.grad.ravel()[valid])

    return _track(out, (a,), backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = Tensor(a.values.reshape(shape))

    def backward():
        a.grad += out.grad.reshape(a.values.shape)

    return _track(out, (a,), backward)


def mean_all(a: Tensor) -> Tensor:
    out = Tensor(a.values.mean())

    def backward():
        a.grad += out.grad / a.values.size

    return _track(out, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(a.values.sum())

    def backward():
        a.grad += out.grad

    return _track(out, (a,), backward)


def wrap_columns(a: Tensor, periods: np.ndarray) -> Tensor:
    """Wrap column j of a into [-periods[j]/2, periods[j]/2).

    Piecewise-constant shift, so the gradient is 1 almost everywhere.
    """
    half = periods / 2.0
    out = Tensor((a.values + half) % periods - half)

    def backward():
        a.grad += out.grad

    return _track(out, (a,), backward)


def dropout(a: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: zero entries with probability `rate`, scale the rest by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return a
    mask = (rng.random(a.values.shape) >= rate) / (1.0 - rate)
    return mul(a, constant(mask))
