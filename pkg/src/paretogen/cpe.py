"""Binary class-probability estimation on (design, preference) feature rows,
and the contrastive dataset of purposefully misaligned pairs.

The same MLP classifier serves two roles: predicting the probability that a
design's objectives clear the current Pareto-rank threshold, and predicting
whether a (design, preference) pair is aligned. The alignment negatives are
built by permuting preferences: random permutations rejecting value-level
fixed points, plus hard negatives from each row's nearest preference
neighbors.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .autodiff import Adam, softplus
from .nets import Mlp, load_param_lists, params_to_lists
from .validation import as_matrix


def binary_log_loss(probs, labels) -> float:
    """Mean binary log-loss; exact 0.0 for perfect {0,1} predictions."""
    p = np.asarray(probs, dtype=np.float64)
    z = np.asarray(labels, dtype=np.float64)
    terms = np.where(z == 1.0, np.log(np.maximum(p, 1e-300)),
                     np.log(np.maximum(1.0 - p, 1e-300)))
    return float(-terms.mean())


class MlpCpe(BaseEstimator):
    """Sigmoid-output MLP classifier trained with the binary log-loss.

    Hidden width defaults to min(16 * input_dim, 128), two hidden layers,
    leaky-ReLU activations. Single-class datasets fit without error.  With
    ``warm_start=True`` repeated ``fit`` calls keep the previous weights as
    the starting point whenever the feature width is unchanged, so a model
    refit on a slowly growing dataset retains what it already learned.

    ``label_smoothing=eps`` trains toward targets ``1-eps`` / ``eps`` instead
    of hard 1/0, which bounds the fitted logits near ``logit(1-eps)`` and
    keeps log-probabilities calibrated instead of saturating — useful when
    the scores feed a downstream reward.

    ``class_balance=True`` draws each minibatch half from the positive rows
    and half from the negative rows, so a handful of positives among
    hundreds of negatives still contributes a constant share of every
    gradient step instead of being washed out.
    """

    def __init__(self, hidden_width=None, learning_rate=3e-3, n_iter=300,
                 batch_size=256, warm_start=False, label_smoothing=0.0,
                 class_balance=False, seed=0):
        self.hidden_width = hidden_width
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.batch_size = batch_size
        self.warm_start = warm_start
        self.label_smoothing = label_smoothing
        self.class_balance = class_balance
        self.seed = seed

    def fit(self, Z, labels):
        Z = as_matrix(Z, "Z")
        z = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        if z.shape[0] != Z.shape[0]:
            raise ValueError("labels length does not match rows")
        d = Z.shape[1]
        width = self.hidden_width or min(16 * d, 128)
        rng = np.random.default_rng(self.seed)
        reuse = (self.warm_start and getattr(self, "net_", None) is not None
                 and self.net_.sizes == [d, width, width, 1])
        if not reuse:
            self.net_ = Mlp([d, width, width, 1], rng)
        self.classes_ = np.array([0, 1])
        opt = Adam(self.net_.params, lr=self.learning_rate)

        def full_loss():
            return binary_log_loss(self.predict_proba(Z)[:, 1], z[:, 0])

        n = Z.shape[0]
        batch = self.batch_size
        eps = float(self.label_smoothing)
        target = z * (1.0 - eps) + (1.0 - z) * eps
        pos = np.flatnonzero(z[:, 0] == 1.0)
        neg = np.flatnonzero(z[:, 0] == 0.0)
        stratify = (self.class_balance and batch is not None and n > batch
                    and len(pos) > 0 and len(neg) > 0)
        self.loss_curve_ = [full_loss()]
        for it in range(self.n_iter):
            if batch is None or n <= batch:
                Zb, tb = Z, target
            elif stratify:
                half = batch // 2
                idx = np.concatenate([
                    pos[rng.integers(0, len(pos), size=half)],
                    neg[rng.integers(0, len(neg), size=batch - half)],
                ])
                Zb, tb = Z[idx], target[idx]
            else:
                idx = rng.integers(0, n, size=batch)
                Zb, tb = Z[idx], target[idx]
            opt.zero_grad()
            logits = self.net_(Zb)
            # BCE on logits: softplus(l) - t*l is -log sigmoid likelihood
            loss = (softplus(logits) - logits * tb).mean()
            loss.backward()
            opt.step()
            if it < 50:
                self.loss_curve_.append(full_loss())
        self.final_loss_ = full_loss()
        return self

    def decision_function(self, Z) -> np.ndarray:
        Z = as_matrix(Z, "Z")
        if Z.shape[1] != self.net_.sizes[0]:
            raise ValueError(
                f"expected {self.net_.sizes[0]} features, got {Z.shape[1]}"
            )
        return self.net_.forward_np(Z)[:, 0]

    def predict_proba(self, Z) -> np.ndarray:
        logit = self.decision_function(Z)
        p = 0.5 * (1.0 + np.tanh(0.5 * logit))
        p = np.clip(p, 1e-12, 1.0 - 1e-12)  # strictly inside (0, 1)
        return np.stack([1.0 - p, p], axis=1)

    def log_pos_prob(self, Z) -> np.ndarray:
        """log Pr(label=1 | row), numerically stable for extreme logits."""
        logit = self.decision_function(Z)
        return -np.logaddexp(0.0, -logit)

    def to_config(self) -> dict:
        blob = params_to_lists(self.net_.params)
        blob.update(
            backbone="mlp-classifier",
            rng_seed=self.seed,
            meta={"sizes": self.net_.sizes},
        )
        return blob

    @classmethod
    def from_config(cls, blob: dict) -> "MlpCpe":
        cpe = cls(seed=blob.get("rng_seed", 0))
        sizes = blob["meta"]["sizes"]
        cpe.net_ = Mlp(sizes, np.random.default_rng(0))
        cpe.classes_ = np.array([0, 1])
        load_param_lists(cpe.net_.params, blob)
        return cpe


def _rows_equal(A, B) -> np.ndarray:
    return np.all(A == B, axis=1)


def _misaligned_permutation(U, rng):
    """Permutation with no position mapped to an equal preference value.

    Duplicate rows form groups; positions are laid out group-contiguously
    (randomly ordered within and across the layout) and rotated by the
    largest group size. That leaves no position mapped inside its own group
    unless one group holds more than half the rows, in which case exactly the
    pigeonhole-minimal overflow remains. Returns (perm, unfixable) where
    ``unfixable`` lists those leftover positions.
    """
    n = U.shape[0]
    _, inverse = np.unique(U, axis=0, return_inverse=True)
    order = rng.permutation(n)
    order = order[np.argsort(inverse[order], kind="stable")]
    shift = int(np.bincount(inverse).max())
    perm = np.empty(n, dtype=np.int64)
    perm[order] = order[(np.arange(n) + shift) % n]
    bad = np.flatnonzero(_rows_equal(U[perm], U))
    return perm, bad


def build_alignment_dataset(U, rng, p_random=7, p_top=2, k=2):
    """Contrastive rows for the alignment classifier.

    Returns index triplets (design_idx, pref_idx, label): N aligned rows
    (label 1, pref_idx == design_idx) followed by up to (p_random + p_top) * N
    misaligned rows (label 0). Random replicates use group-rotation
    permutations so no position keeps a preference equal to its own; top-k
    replicates map each row to its j-th nearest distinct preference by cosine
    similarity (hard negatives). Rows whose preference cannot be misaligned
    (duplicate-saturated data) are dropped from negatives with a warning.
    """
    U = as_matrix(U, "U")
    n = U.shape[0]
    if n < 2:
        raise ValueError("alignment dataset needs at least 2 rows")

    x_idx = [np.arange(n)]
    u_idx = [np.arange(n)]
    labels = [np.ones(n, dtype=np.int64)]
    dropped = 0

    for _ in range(p_random):
        perm, bad = _misaligned_permutation(U, rng)
        keep = np.setdiff1d(np.arange(n), bad, assume_unique=True)
        dropped += n - keep.size
        x_idx.append(keep)
        u_idx.append(perm[keep])
        labels.append(np.zeros(keep.size, dtype=np.int64))

    if p_top > 0:
        sims = U @ U.T / np.maximum(
            np.linalg.norm(U, axis=1)[:, None] * np.linalg.norm(U, axis=1)[None, :],
            1e-12,
        )
        _, groups = np.unique(U, axis=0, return_inverse=True)
        neighbor_lists = []
        for i in range(n):
            order = np.argsort(-sims[i], kind="stable")
            cands = [j for j in order if groups[j] != groups[i]][:k]
            neighbor_lists.append(cands)
        for rep in range(p_top):
            xs, us = [], []
            for i, cands in enumerate(neighbor_lists):
                if not cands:
                    dropped += 1
                    continue
                xs.append(i)
                us.append(cands[min(rep, len(cands) - 1)])
            x_idx.append(np.asarray(xs, dtype=np.int64))
            u_idx.append(np.asarray(us, dtype=np.int64))
            labels.append(np.zeros(len(xs), dtype=np.int64))

    x_idx = np.concatenate(x_idx)
    u_idx = np.concatenate(u_idx)
    labels = np.concatenate(labels)
    if dropped:
        warnings.warn(
            f"{dropped} misaligned rows dropped: duplicate preference "
            "directions admit no misalignment",
            UserWarning,
        )
    if not np.any(labels == 0):
        raise ValueError(
            "all preference directions identical; no misaligned rows exist"
        )
    return x_idx, u_idx, labels
