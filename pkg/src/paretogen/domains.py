"""Design-space descriptors shared by benchmarks, the optimizer, and serving.

A domain knows how to validate a batch of designs, encode them as float
features for the classifiers, build a matching generative backbone, and
convert designs to and from JSON-friendly values.  Two concrete spaces are
supported: the unit box ``[0, 1]^n`` and fixed-length token sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generative import CategoricalSequence, ConditionalGaussian
from .validation import ConfigError, DimensionMismatchError


@dataclass(frozen=True)
class ContinuousDomain:
    """Continuous design space: the unit box ``[0, 1]^n_dims``."""

    n_dims: int

    kind = "continuous"

    def validate(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_dims:
            raise DimensionMismatchError(
                f"expected designs of shape (n, {self.n_dims}), got {X.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("designs must be finite")
        return X

    def encode(self, X) -> np.ndarray:
        """Float feature matrix for classifier inputs (already continuous)."""
        return self.validate(X).copy()

    def design_key(self, x) -> bytes:
        return np.round(np.asarray(x, dtype=float), 12).tobytes()

    def to_jsonable(self, x):
        return [float(v) for v in np.asarray(x, dtype=float)]

    def from_jsonable(self, obj) -> np.ndarray:
        x = np.asarray(obj, dtype=float)
        if x.shape != (self.n_dims,):
            raise DimensionMismatchError(
                f"expected a design of length {self.n_dims}, got shape {x.shape}"
            )
        return x

    def make_backbone(self, cond_dim, hidden_width=None, unconditional=False,
                      seed=0) -> ConditionalGaussian:
        return ConditionalGaussian(
            self.n_dims,
            cond_dim,
            bounds=(0.0, 1.0),
            hidden_width=hidden_width,
            unconditional=unconditional,
            seed=seed,
        )

    def descriptor(self) -> dict:
        return {"kind": "continuous", "n_dims": int(self.n_dims)}


@dataclass(frozen=True)
class SequenceDomain:
    """Fixed-length sequences over a finite token vocabulary.

    Designs are integer matrices of token indices; ``vocab[i]`` is the
    letter for token ``i``.
    """

    seq_len: int
    vocab: str

    kind = "sequence"

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def validate(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.seq_len:
            raise DimensionMismatchError(
                f"expected designs of shape (n, {self.seq_len}), got {X.shape}"
            )
        if not np.issubdtype(X.dtype, np.integer):
            raise ValueError("sequence designs must be integer token indices")
        if X.size and (X.min() < 0 or X.max() >= self.vocab_size):
            raise ValueError(
                f"token indices must lie in [0, {self.vocab_size - 1}]"
            )
        return X.astype(np.int64, copy=False)

    def encode(self, X) -> np.ndarray:
        """One-hot feature matrix of shape ``(n, seq_len * vocab_size)``."""
        X = self.validate(X)
        n = X.shape[0]
        out = np.zeros((n, self.seq_len * self.vocab_size))
        flat = np.arange(self.seq_len) * self.vocab_size + X
        rows = np.repeat(np.arange(n), self.seq_len)
        out[rows, flat.ravel()] = 1.0
        return out

    def design_key(self, x) -> bytes:
        return np.asarray(x, dtype=np.int64).tobytes()

    def to_strings(self, X) -> list[str]:
        X = self.validate(np.atleast_2d(np.asarray(X)))
        letters = np.array(list(self.vocab))
        return ["".join(row) for row in letters[X]]

    def from_strings(self, seqs) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.vocab)}
        rows = []
        for s in seqs:
            if len(s) != self.seq_len:
                raise DimensionMismatchError(
                    f"expected sequences of length {self.seq_len}, got {len(s)}"
                )
            try:
                rows.append([lookup[c] for c in s])
            except KeyError as exc:
                raise ValueError(f"unknown token {exc.args[0]!r}") from None
        return np.asarray(rows, dtype=np.int64).reshape(len(rows), self.seq_len)

    def to_jsonable(self, x) -> str:
        return self.to_strings(np.asarray(x)[None, :])[0]

    def from_jsonable(self, obj) -> np.ndarray:
        return self.from_strings([obj])[0]

    def make_backbone(self, cond_dim, hidden_width=None, unconditional=False,
                      seed=0) -> CategoricalSequence:
        return CategoricalSequence(
            self.seq_len,
            self.vocab_size,
            cond_dim,
            hidden_width=hidden_width,
            unconditional=unconditional,
            seed=seed,
        )

    def descriptor(self) -> dict:
        return {
            "kind": "sequence",
            "seq_len": int(self.seq_len),
            "vocab": self.vocab,
        }


def domain_from_descriptor(desc) -> ContinuousDomain | SequenceDomain:
    """Rebuild a domain object from its JSON descriptor."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError("domain descriptor must be a dict with a 'kind' key")
    kind = desc["kind"]
    if kind == "continuous":
        return ContinuousDomain(int(desc["n_dims"]))
    if kind == "sequence":
        return SequenceDomain(int(desc["seq_len"]), str(desc["vocab"]))
    raise ConfigError(f"unknown domain kind {kind!r}")
