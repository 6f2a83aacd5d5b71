"""Shared MLP plumbing: affine layers, a plain leaky-ReLU stack, and
parameter (de)serialization used by every learned component."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, affine, kaiming_uniform, leaky_relu
from .validation import SnapshotFormatError


def leaky_relu_np(h, slope: float = 0.01):
    return np.where(h > 0.0, h, slope * h)


class Affine:
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.W = Tensor(kaiming_uniform(rng, in_dim, out_dim), requires_grad=True)
        self.b = Tensor(np.zeros(out_dim), requires_grad=True)

    def __call__(self, h: Tensor) -> Tensor:
        return affine(h, self.W, self.b)

    def forward_np(self, h: np.ndarray) -> np.ndarray:
        return h @ self.W.data + self.b.data

    @property
    def params(self):
        return [self.W, self.b]


class Mlp:
    """Affine stack for ``sizes`` with leaky-ReLU hidden activations.

    The output layer is linear unless ``activate_last`` (trunk use).
    """

    def __init__(self, sizes, rng: np.random.Generator, activate_last=False):
        self.sizes = list(sizes)
        self.activate_last = activate_last
        self.layers = [Affine(a, b, rng) for a, b in zip(sizes, sizes[1:])]

    def __call__(self, X) -> Tensor:
        h = X if isinstance(X, Tensor) else Tensor(X)
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if i < last or self.activate_last:
                h = leaky_relu(h)
        return h

    def forward_np(self, X: np.ndarray) -> np.ndarray:
        h = np.asarray(X, dtype=np.float64)
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = layer.forward_np(h)
            if i < last or self.activate_last:
                h = leaky_relu_np(h)
        return h

    @property
    def params(self):
        return [p for layer in self.layers for p in layer.params]


def copy_params(src_params, dst_params) -> None:
    """Copy parameter values between two identically-shaped networks."""
    if len(src_params) != len(dst_params):
        raise SnapshotFormatError(
            f"parameter count mismatch: {len(src_params)} vs {len(dst_params)}"
        )
    for ps, pd in zip(src_params, dst_params):
        if ps.data.shape != pd.data.shape:
            raise SnapshotFormatError(
                f"parameter shape mismatch: {ps.data.shape} vs {pd.data.shape}"
            )
        pd.data[...] = ps.data


def params_to_lists(params) -> dict:
    """Row-major flat serialization of a parameter list."""
    return {
        "shapes": [list(p.data.shape) for p in params],
        "weights": [p.data.ravel().tolist() for p in params],
    }


def load_param_lists(params, blob: dict) -> None:
    shapes = blob.get("shapes")
    weights = blob.get("weights")
    if shapes is None or weights is None or len(shapes) != len(params):
        raise SnapshotFormatError(
            f"expected {len(params)} weight arrays, got "
            f"{None if shapes is None else len(shapes)}"
        )
    for p, shape, flat in zip(params, shapes, weights):
        if tuple(shape) != p.data.shape:
            raise SnapshotFormatError(
                f"weight shape {shape} does not match expected {p.data.shape}"
            )
        p.data[...] = np.asarray(flat, dtype=np.float64).reshape(shape)
