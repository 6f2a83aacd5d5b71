"""Minimal reverse-mode automatic differentiation on float64 numpy arrays.

A ``Tensor`` wraps a dense array and remembers the operation that produced it;
``Tensor.backward()`` traces the graph into a ``Tape`` (reverse topological
order, each node once) and accumulates gradients additively into ``.grad``.
Just enough primitives for small MLPs: elementwise math, matmul/affine,
log_softmax, gather, concat, reductions — plus Adam and a Kaiming-style
uniform initializer. Everything is float64 and deterministic given the rng.
"""

from __future__ import annotations

import numpy as np

from .validation import DimensionMismatchError

__all__ = [
    "Tensor",
    "Tape",
    "Adam",
    "affine",
    "leaky_relu",
    "log_softmax",
    "softplus",
    "gather",
    "concat",
    "kaiming_uniform",
]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (undo numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._bwd = None

    # ---- graph construction -------------------------------------------

    @staticmethod
    def _op(data, parents, bwd) -> "Tensor":
        out = Tensor(data)
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = tuple(parents)
            out._bwd = bwd
        return out

    @staticmethod
    def _accum(t: "Tensor", g: np.ndarray) -> None:
        if not t.requires_grad:
            return
        t.grad = g if t.grad is None else t.grad + g

    @staticmethod
    def _coerce(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # ---- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        try:
            np.broadcast_shapes(self.data.shape, other.data.shape)
        except ValueError as exc:
            raise DimensionMismatchError(
                f"add: {self.data.shape} vs {other.data.shape}"
            ) from exc
        out_data = self.data + other.data

        def bwd(g):
            Tensor._accum(self, _unbroadcast(g, self.data.shape))
            Tensor._accum(other, _unbroadcast(g, other.data.shape))

        return Tensor._op(out_data, (self, other), bwd)

    __radd__ = __add__

    def __neg__(self):
        def bwd(g):
            Tensor._accum(self, -g)

        return Tensor._op(-self.data, (self,), bwd)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        try:
            np.broadcast_shapes(self.data.shape, other.data.shape)
        except ValueError as exc:
            raise DimensionMismatchError(
                f"mul: {self.data.shape} vs {other.data.shape}"
            ) from exc
        out_data = self.data * other.data

        def bwd(g):
            Tensor._accum(self, _unbroadcast(g * other.data, self.data.shape))
            Tensor._accum(other, _unbroadcast(g * self.data, other.data.shape))

        return Tensor._op(out_data, (self, other), bwd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        out_data = self.data / other.data

        def bwd(g):
            Tensor._accum(self, _unbroadcast(g / other.data, self.data.shape))
            Tensor._accum(
                other,
                _unbroadcast(-g * self.data / other.data**2, other.data.shape),
            )

        return Tensor._op(out_data, (self, other), bwd)

    def __matmul__(self, other):
        other = self._coerce(other)
        if self.data.shape[-1] != other.data.shape[0]:
            raise DimensionMismatchError(
                f"matmul: {self.data.shape} vs {other.data.shape}"
            )
        out_data = self.data @ other.data

        def bwd(g):
            Tensor._accum(self, g @ other.data.T)
            Tensor._accum(other, self.data.T @ g)

        return Tensor._op(out_data, (self, other), bwd)

    # ---- elementwise nonlinearities -------------------------------------

    def exp(self):
        out_data = np.exp(self.data)

        def bwd(g):
            Tensor._accum(self, g * out_data)

        return Tensor._op(out_data, (self,), bwd)

    def log(self):
        def bwd(g):
            Tensor._accum(self, g / self.data)

        return Tensor._op(np.log(self.data), (self,), bwd)

    def tanh(self):
        out_data = np.tanh(self.data)

        def bwd(g):
            Tensor._accum(self, g * (1.0 - out_data**2))

        return Tensor._op(out_data, (self,), bwd)

    def sigmoid(self):
        out_data = 0.5 * (1.0 + np.tanh(0.5 * self.data))  # stable logistic

        def bwd(g):
            Tensor._accum(self, g * out_data * (1.0 - out_data))

        return Tensor._op(out_data, (self,), bwd)

    # ---- reductions ------------------------------------------------------

    def reshape(self, *shape):
        out_data = self.data.reshape(shape)

        def bwd(g):
            Tensor._accum(self, g.reshape(self.data.shape))

        return Tensor._op(out_data, (self,), bwd)

    @property
    def T(self):
        def bwd(g):
            Tensor._accum(self, g.T)

        return Tensor._op(self.data.T, (self,), bwd)

    def sum(self, axis=None):
        out_data = self.data.sum(axis=axis)

        def bwd(g):
            if axis is None:
                Tensor._accum(self, np.broadcast_to(g, self.data.shape).copy())
            else:
                Tensor._accum(
                    self,
                    np.broadcast_to(
                        np.expand_dims(g, axis), self.data.shape
                    ).copy(),
                )

        return Tensor._op(out_data, (self,), bwd)

    def mean(self, axis=None):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    def backward(self) -> None:
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        Tape.trace(self).run_backward(self)


class Tape:
    """Reverse topological ordering of the graph reachable from a root."""

    def __init__(self, nodes):
        self.nodes = nodes  # parents before children

    @classmethod
    def trace(cls, root: Tensor) -> "Tape":
        order = []
        seen = {id(root)}
        stack = [(root, iter(root._parents))]
        while stack:
            node, parents = stack[-1]
            advanced = False
            for p in parents:
                if id(p) not in seen and p.requires_grad:
                    seen.add(id(p))
                    stack.append((p, iter(p._parents)))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
        return cls(order)

    def run_backward(self, root: Tensor) -> None:
        for node in self.nodes:
            node.grad = None
        root.grad = np.ones_like(root.data)
        for node in reversed(self.nodes):
            if node._bwd is not None and node.grad is not None:
                node._bwd(node.grad)


# ---- free-function primitives ------------------------------------------


def affine(x: Tensor, W: Tensor, b: Tensor) -> Tensor:
    """x @ W + b with the bias broadcast over rows."""
    return (x @ W) + b


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    mask = np.where(x.data > 0.0, 1.0, slope)

    def bwd(g):
        Tensor._accum(x, g * mask)

    return Tensor._op(x.data * mask, (x,), bwd)


def softplus(x: Tensor) -> Tensor:
    out_data = np.logaddexp(0.0, x.data)
    sig = 0.5 * (1.0 + np.tanh(0.5 * x.data))

    def bwd(g):
        Tensor._accum(x, g * sig)

    return Tensor._op(out_data, (x,), bwd)


def log_softmax(x: Tensor) -> Tensor:
    """Log-softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    out_data = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

    def bwd(g):
        soft = np.exp(out_data)
        Tensor._accum(x, g - soft * g.sum(axis=-1, keepdims=True))

    return Tensor._op(out_data, (x,), bwd)


def gather(x: Tensor, indices) -> Tensor:
    """Select one entry along the last axis per leading position."""
    idx = np.asarray(indices, dtype=np.int64)
    out_data = np.take_along_axis(x.data, idx[..., None], axis=-1)[..., 0]

    def bwd(g):
        full = np.zeros_like(x.data)
        np.put_along_axis(full, idx[..., None], g[..., None], axis=-1)
        Tensor._accum(x, full)

    return Tensor._op(out_data, (x,), bwd)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [Tensor._coerce(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        for t, piece in zip(tensors, np.split(g, splits, axis=axis)):
            Tensor._accum(t, piece)

    return Tensor._op(out_data, tuple(tensors), bwd)


# ---- optimization ---------------------------------------------------------


class Adam:
    """Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8."""

    def __init__(self, params, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            if p.grad.shape != p.data.shape:
                raise DimensionMismatchError(
                    f"grad shape {p.grad.shape} vs param {p.data.shape}"
                )
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad**2
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


def kaiming_uniform(rng: np.random.Generator, fan_in: int, fan_out: int):
    """Uniform fan-in init: W ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in))."""
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))
