"""Conditional generative backbones over designs, and the prior fit.

Two interchangeable backbones, both conditioned by concatenating nothing more
exotic than the preference vector into an MLP input:

* ``ConditionalGaussian`` — diagonal Gaussian over a box; the network maps a
  preference direction to per-dimension mean and std; samples are clamped to
  the domain bounds.
* ``CategoricalSequence`` — factorized categorical over fixed-length token
  sequences; the network maps the preference to per-position logits.

A prior is the same backbone with ``unconditional=True`` (the preference
input is zeroed). ``fit_prior`` implements maximum likelihood with a 10%
holdout: record the best-validation iteration i*, then retrain on all data
for i* iterations.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .autodiff import Adam, Tensor, gather, log_softmax, softplus
from .nets import Affine, Mlp, leaky_relu_np, load_param_lists, params_to_lists
from .validation import as_matrix

_LOG_2PI = np.log(2.0 * np.pi)


def _softplus_np(x):
    return np.logaddexp(0.0, x)


def _inverse_softplus(y):
    return np.log(np.expm1(y))


class _Backbone(BaseEstimator):
    """Common trunk/heads scaffolding and the MLE loop."""

    def _trunk_width(self, requested, base_dim):
        if requested:
            return requested
        return int(np.clip(16 * base_dim, 64, 256))

    def _effective_u(self, U):
        U = as_matrix(U, "u")
        if U.shape[1] != self.cond_dim:
            raise ValueError(
                f"preference dim {U.shape[1]} != expected {self.cond_dim}"
            )
        return np.zeros_like(U) if self.unconditional else U

    @property
    def params(self):
        ps = list(self.trunk_.params)
        for head in self.heads:
            ps.extend(head.params)
        return ps

    def fit_mle(self, X, n_iter=400, learning_rate=1e-2, X_val=None):
        """Full-batch maximum likelihood; returns (train_curve, val_curve)."""
        U = np.zeros((np.asarray(X).shape[0], self.cond_dim))
        opt = Adam(self.params, lr=learning_rate)
        train_curve, val_curve = [], []
        for _ in range(n_iter):
            opt.zero_grad()
            loss = self.log_prob_t(X, U).mean() * (-1.0)
            loss.backward()
            opt.step()
            train_curve.append(float(loss.data))
            if X_val is not None:
                val_U = np.zeros((np.asarray(X_val).shape[0], self.cond_dim))
                val_curve.append(float(-self.log_prob(X_val, val_U).mean()))
        return train_curve, val_curve

    def to_config(self) -> dict:
        blob = params_to_lists(self.params)
        blob.update(
            backbone=self.backbone_tag,
            rng_seed=self.seed,
            meta=self._meta(),
        )
        return blob

    @classmethod
    def from_config(cls, blob: dict):
        model = cls(**blob["meta"], seed=blob.get("rng_seed", 0))
        load_param_lists(model.params, blob)
        return model


class ConditionalGaussian(_Backbone):
    """Diagonal Gaussian over a box, mean/std predicted from the preference."""

    backbone_tag = "continuous-gaussian"
    sigma_floor = 1e-4

    def __init__(self, n_dims, cond_dim, bounds=(0.0, 1.0), hidden_width=None,
                 unconditional=False, seed=0):
        self.n_dims = n_dims
        self.cond_dim = cond_dim
        self.bounds = bounds
        self.hidden_width = hidden_width
        self.unconditional = unconditional
        self.seed = seed
        self.reset()

    def reset(self):
        lo, hi = self.bounds
        self.lo_ = np.broadcast_to(np.asarray(lo, dtype=np.float64), (self.n_dims,)).copy()
        self.hi_ = np.broadcast_to(np.asarray(hi, dtype=np.float64), (self.n_dims,)).copy()
        w = self._trunk_width(self.hidden_width, self.n_dims)
        rng = np.random.default_rng(self.seed)
        self.trunk_ = Mlp([self.cond_dim, w, w], rng, activate_last=True)
        self.mu_head_ = Affine(w, self.n_dims, rng)
        self.sigma_head_ = Affine(w, self.n_dims, rng)
        # gentle start: means at the box center, sigma ~ 0.3 * box scale
        self.mu_head_.W.data *= 0.1
        self.sigma_head_.W.data *= 0.1
        self.mu_head_.b.data[...] = 0.5 * (self.lo_ + self.hi_)
        scale = np.maximum(self.hi_ - self.lo_, 1e-8)
        self.sigma_head_.b.data[...] = _inverse_softplus(0.3 * scale)
        return self

    @property
    def heads(self):
        return [self.mu_head_, self.sigma_head_]

    def mean_std(self, U):
        h = self.trunk_.forward_np(self._effective_u(U))
        mu = self.mu_head_.forward_np(h)
        sigma = _softplus_np(self.sigma_head_.forward_np(h)) + self.sigma_floor
        return mu, sigma

    def log_prob(self, X, U) -> np.ndarray:
        X = as_matrix(X, "x")
        mu, sigma = self.mean_std(U)
        z = (X - mu) / sigma
        return (-0.5 * z**2 - np.log(sigma) - 0.5 * _LOG_2PI).sum(axis=1)

    def log_prob_t(self, X, U) -> Tensor:
        X = as_matrix(X, "x")
        h = self.trunk_(self._effective_u(U))
        mu = self.mu_head_(h)
        sigma = softplus(self.sigma_head_(h)) + self.sigma_floor
        z = (Tensor(X) - mu) / sigma
        return (z * z * (-0.5) - sigma.log() - 0.5 * _LOG_2PI).sum(axis=1)

    def sample(self, U, rng: np.random.Generator):
        """One clamped draw per preference row; returns (X, log_probs)."""
        mu, sigma = self.mean_std(U)
        X = mu + sigma * rng.standard_normal(mu.shape)
        X = np.clip(X, self.lo_, self.hi_)
        return X, self.log_prob(X, U)

    def _meta(self):
        return {
            "n_dims": self.n_dims,
            "cond_dim": self.cond_dim,
            "bounds": [self.lo_.tolist(), self.hi_.tolist()],
            "hidden_width": self.hidden_width,
            "unconditional": self.unconditional,
        }


class CategoricalSequence(_Backbone):
    """Factorized categorical over fixed-length sequences of vocabulary ids."""

    backbone_tag = "categorical-sequence"

    def __init__(self, seq_len, vocab_size, cond_dim, hidden_width=None,
                 unconditional=False, seed=0):
        self.seq_len = seq_len
        self.vocab_size = vocab_size
        self.cond_dim = cond_dim
        self.hidden_width = hidden_width
        self.unconditional = unconditional
        self.seed = seed
        self.reset()

    def reset(self):
        w = self._trunk_width(self.hidden_width, self.cond_dim)
        rng = np.random.default_rng(self.seed)
        self.trunk_ = Mlp([self.cond_dim, w, w], rng, activate_last=True)
        self.head_ = Affine(w, self.seq_len * self.vocab_size, rng)
        self.head_.W.data *= 0.1  # near-uniform start
        return self

    @property
    def heads(self):
        return [self.head_]

    def _check_tokens(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.seq_len:
            raise ValueError(f"sequences must have shape (n, {self.seq_len})")
        if X.min() < 0 or X.max() >= self.vocab_size:
            raise ValueError(
                f"token id outside vocabulary [0, {self.vocab_size})"
            )
        return X.astype(np.int64)

    def _logits_np(self, U):
        h = self.trunk_.forward_np(self._effective_u(U))
        return self.head_.forward_np(h).reshape(-1, self.seq_len, self.vocab_size)

    def position_probs(self, U) -> np.ndarray:
        logits = self._logits_np(U)
        logits -= logits.max(axis=-1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=-1, keepdims=True)

    def log_prob(self, X, U) -> np.ndarray:
        X = self._check_tokens(X)
        logits = self._logits_np(U)
        shifted = logits - logits.max(axis=-1, keepdims=True)
        lsm = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        picked = np.take_along_axis(lsm, X[..., None], axis=-1)[..., 0]
        return picked.sum(axis=1)

    def log_prob_t(self, X, U) -> Tensor:
        X = self._check_tokens(X)
        h = self.trunk_(self._effective_u(U))
        logits = self.head_(h).reshape(-1, self.seq_len, self.vocab_size)
        return gather(log_softmax(logits), X).sum(axis=1)

    def sample(self, U, rng: np.random.Generator):
        """One sequence per preference row; returns (X, log_probs)."""
        probs = self.position_probs(U)
        cdf = probs.cumsum(axis=-1)
        u = rng.uniform(size=cdf.shape[:2] + (1,))
        X = (cdf < u).sum(axis=-1).astype(np.int64)
        X = np.minimum(X, self.vocab_size - 1)  # guard cumsum rounding
        return X, self.log_prob(X, np.asarray(U, dtype=np.float64))

    def _meta(self):
        return {
            "seq_len": self.seq_len,
            "vocab_size": self.vocab_size,
            "cond_dim": self.cond_dim,
            "hidden_width": self.hidden_width,
            "unconditional": self.unconditional,
        }


def fit_prior(model, X, seed=0, max_iter=800, learning_rate=3e-3,
              val_fraction=0.1):
    """Maximum-likelihood prior fit with holdout-selected iteration count.

    Hold out ``val_fraction`` of the designs, train recording validation loss
    per iteration, find the argmin iteration i*, then retrain from scratch on
    all data for i* iterations. Datasets smaller than 10 rows skip validation
    and train a fixed 200 iterations (with a warning).
    """
    X = np.asarray(X)
    n = X.shape[0]
    if n < 10:
        warnings.warn(
            f"only {n} designs; prior trained without validation for 200 "
            "iterations",
            UserWarning,
        )
        model.reset()
        model.fit_mle(X, n_iter=200, learning_rate=learning_rate)
        model.early_stop_iter_ = 200
        model.val_curve_ = []
        return model
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = max(1, int(round(val_fraction * n)))
    val, train = X[perm[:n_val]], X[perm[n_val:]]
    model.reset()
    _, val_curve = model.fit_mle(
        train, n_iter=max_iter, learning_rate=learning_rate, X_val=val
    )
    i_star = int(np.argmin(val_curve)) + 1
    model.reset()
    model.fit_mle(X, n_iter=i_star, learning_rate=learning_rate)
    model.early_stop_iter_ = i_star
    model.val_curve_ = val_curve
    return model
