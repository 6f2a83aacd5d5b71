"""Preference directions over objective space and distributions over them.

A preference direction is the unit vector from the reference point to an
objective vector. Two distributions over directions are provided: a mixture
of isotropic Normals whose samples are normalized to the unit sphere, and
the empirical distribution over observed positive-label directions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .autodiff import Adam, Tensor, log_softmax
from .validation import (
    DegenerateDirectionError,
    as_matrix,
    as_unit_matrix,
    as_vector,
    check_same_dim,
)

_LOG_2PI = np.log(2.0 * np.pi)


def make_preference(y, r) -> np.ndarray:
    """Unit direction (y - r) / ||y - r||_2."""
    y = as_vector(y, "y")
    r = as_vector(r, "r")
    check_same_dim(y, r, "y and r")
    d = y - r
    norm = float(np.linalg.norm(d))
    if norm < 1e-12:
        raise DegenerateDirectionError(
            f"objective vector {y.tolist()} coincides with reference point"
        )
    return d / norm


def _softmax(v):
    e = np.exp(v - v.max())
    return e / e.sum()


class PreferenceMixture(BaseEstimator):
    """Mixture of isotropic Normals over preference directions.

    The density is the ambient Gaussian-mixture density evaluated at the unit
    vector; samples are drawn from the mixture and L2-normalized. The fit
    penalizes component-mean norms drifting from 1 so magnitudes stay
    controlled: minimize -mean_z log q(u) + (1/K) sum_k (||mu_k|| - 1)^2.
    """

    def __init__(self, n_components=5, learning_rate=0.05, n_iter=400, seed=0):
        self.n_components = n_components
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.seed = seed

    def fit(self, U, z=None):
        U = as_unit_matrix(U, "U")
        if z is not None:
            U = U[np.asarray(z).astype(bool)]
        if U.shape[0] == 0:
            raise ValueError(
                "no positively labeled preference directions; "
                "fall back to uniform sphere sampling"
            )
        K = self.n_components
        L = U.shape[1]
        rng = np.random.default_rng(self.seed)
        means = Tensor(
            U[rng.integers(0, U.shape[0], size=K)]
            + 0.05 * rng.standard_normal((K, L)),
            requires_grad=True,
        )
        log_sigmas = Tensor(np.full(K, np.log(0.25)), requires_grad=True)
        logits = Tensor(np.zeros(K), requires_grad=True)
        opt = Adam([means, log_sigmas, logits], lr=self.learning_rate)
        loss = None
        for _ in range(self.n_iter):
            opt.zero_grad()
            loss = self._loss_t(U, means, log_sigmas, logits)
            loss.backward()
            opt.step()
        self.means_ = means.data.copy()
        self.log_sigmas_ = log_sigmas.data.copy()
        self.weights_ = _softmax(logits.data)
        self.loss_ = float(
            self._loss_t(U, means, log_sigmas, logits).data
        ) if loss is None else float(loss.data)
        return self

    @staticmethod
    def _loss_t(U, means, log_sigmas, logits):
        n, L = U.shape
        cross = Tensor(U) @ means.T                       # (n, K)
        msq = (means * means).sum(axis=1)                 # (K,)
        sq = Tensor((U * U).sum(axis=1)[:, None]) + cross * (-2.0) + msq
        inv_var = (log_sigmas * (-2.0)).exp()
        comp = sq * inv_var * (-0.5) + log_sigmas * (-float(L)) - 0.5 * L * _LOG_2PI
        v = comp + log_softmax(logits)
        vmax = v.data.max(axis=1, keepdims=True)          # detached lse shift
        lse = ((v - Tensor(vmax)).exp().sum(axis=1)).log() + Tensor(vmax[:, 0])
        norms = ((means * means).sum(axis=1) + 1e-12).log() * 0.5
        norms = norms.exp()
        penalty = ((norms - 1.0) * (norms - 1.0)).mean()
        return lse.mean() * (-1.0) + penalty

    def log_prob(self, U) -> np.ndarray:
        U = as_matrix(U, "U")
        L = U.shape[1]
        sq = ((U[:, None, :] - self.means_[None, :, :]) ** 2).sum(axis=2)
        var = np.exp(2.0 * self.log_sigmas_)
        comp = (
            -0.5 * sq / var
            - L * self.log_sigmas_
            - 0.5 * L * _LOG_2PI
            + np.log(self.weights_)
        )
        m = comp.max(axis=1, keepdims=True)
        return (np.log(np.exp(comp - m).sum(axis=1)) + m[:, 0])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comps = rng.choice(self.n_components, size=n, p=self.weights_)
        sigmas = np.exp(self.log_sigmas_)[comps]
        raw = self.means_[comps] + sigmas[:, None] * rng.standard_normal(
            (n, self.means_.shape[1])
        )
        norms = np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-12)
        return raw / norms

    def to_config(self) -> dict:
        return {
            "backbone": "preference-mixture",
            "shapes": [list(self.means_.shape), [len(self.log_sigmas_)], [len(self.weights_)]],
            "weights": [
                self.means_.ravel().tolist(),
                self.log_sigmas_.tolist(),
                self.weights_.tolist(),
            ],
            "rng_seed": self.seed,
            "meta": {"n_components": self.n_components},
        }

    @classmethod
    def from_config(cls, blob: dict) -> "PreferenceMixture":
        mix = cls(n_components=blob["meta"]["n_components"], seed=blob["rng_seed"])
        means_shape = blob["shapes"][0]
        mix.means_ = np.asarray(blob["weights"][0]).reshape(means_shape)
        mix.log_sigmas_ = np.asarray(blob["weights"][1])
        mix.weights_ = np.asarray(blob["weights"][2])
        return mix


class EmpiricalPreferences(BaseEstimator):
    """Uniform resampling over the stored positive-label directions."""

    def fit(self, U, z=None):
        U = as_unit_matrix(U, "U") if np.size(U) else as_matrix(U, "U")
        if z is not None:
            U = U[np.asarray(z).astype(bool)]
        if U.shape[0] == 0:
            raise ValueError("empirical preference set is empty")
        self.directions_ = U.copy()
        return self

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self.directions_.shape[0], size=n)
        return self.directions_[idx]

    def to_config(self) -> dict:
        return {
            "backbone": "empirical-preferences",
            "shapes": [list(self.directions_.shape)],
            "weights": [self.directions_.ravel().tolist()],
            "rng_seed": 0,
            "meta": {},
        }

    @classmethod
    def from_config(cls, blob: dict) -> "EmpiricalPreferences":
        emp = cls()
        emp.directions_ = np.asarray(blob["weights"][0]).reshape(blob["shapes"][0])
        return emp
