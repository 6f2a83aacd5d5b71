"""Class-probability estimators and the contrastive alignment dataset."""

from __future__ import annotations

import contextlib

import numpy as np
import pytest
from sklearn.metrics import roc_auc_score

from paretogen.cpe import MlpCpe, binary_log_loss, build_alignment_dataset


# ---------------------------------------------------------------- log loss


def test_log_loss_perfect_predictions():
    assert binary_log_loss(np.array([1.0, 0.0]), np.array([1, 0])) == 0.0


def test_log_loss_constant_half():
    probs = np.full(8, 0.5)
    labels = np.array([1, 0, 1, 1, 0, 0, 1, 0])
    assert binary_log_loss(probs, labels) == pytest.approx(np.log(2.0))


def test_log_loss_single_positive_row():
    assert binary_log_loss(np.array([0.8]), np.array([1])) == pytest.approx(
        -np.log(0.8)
    )


# ---------------------------------------------------------------- classifier


def test_zero_weight_network_predicts_half():
    cpe = MlpCpe(n_iter=1, seed=0)
    Z = np.random.default_rng(0).normal(size=(4, 5))
    cpe.fit(Z, np.array([0, 1, 0, 1]))
    for W in cpe.net_.params:
        W.data[...] = 0.0
    np.testing.assert_allclose(cpe.predict_proba(Z)[:, 1], 0.5)


def test_separable_toy_auc():
    rng = np.random.default_rng(1)
    Z = rng.normal(size=(200, 4))
    labels = (Z @ np.array([1.0, -2.0, 0.5, 0.0]) > 0.0).astype(int)
    cpe = MlpCpe(n_iter=500, seed=1).fit(Z, labels)
    auc = roc_auc_score(labels, cpe.predict_proba(Z)[:, 1])
    assert auc > 0.99


def test_outputs_strictly_inside_unit_interval():
    rng = np.random.default_rng(2)
    Z = rng.normal(size=(50, 3))
    labels = rng.integers(0, 2, size=50)
    cpe = MlpCpe(n_iter=200, seed=2).fit(Z, labels)
    p = cpe.predict_proba(rng.normal(size=(100, 3)) * 10.0)[:, 1]
    assert np.all(p > 0.0) and np.all(p < 1.0)


def test_single_class_fit_proceeds():
    rng = np.random.default_rng(3)
    Z = rng.normal(size=(20, 3))
    cpe = MlpCpe(n_iter=100, seed=3).fit(Z, np.ones(20))
    assert np.all(cpe.predict_proba(Z)[:, 1] > 0.5)


def test_loss_decreases_monotonically_first_50_steps():
    for seed in range(3):
        rng = np.random.default_rng(seed)
        Z = rng.normal(size=(64, 6))
        labels = (Z[:, 0] + 0.3 * rng.normal(size=64) > 0).astype(int)
        cpe = MlpCpe(n_iter=60, batch_size=None, seed=seed).fit(Z, labels)
        curve = cpe.loss_curve_[:51]
        assert np.all(np.diff(curve) <= 1e-12)


def test_fit_deterministic_given_seed():
    rng = np.random.default_rng(4)
    Z = rng.normal(size=(40, 4))
    labels = rng.integers(0, 2, size=40)
    p1 = MlpCpe(n_iter=120, seed=7).fit(Z, labels).predict_proba(Z)
    p2 = MlpCpe(n_iter=120, seed=7).fit(Z, labels).predict_proba(Z)
    np.testing.assert_array_equal(p1, p2)


def test_dimension_mismatch_raises():
    rng = np.random.default_rng(5)
    Z = rng.normal(size=(10, 4))
    cpe = MlpCpe(n_iter=10, seed=5).fit(Z, np.zeros(10))
    with pytest.raises(ValueError):
        cpe.predict_proba(rng.normal(size=(3, 7)))


def test_hidden_width_rule():
    rng = np.random.default_rng(6)
    cpe = MlpCpe(n_iter=5, seed=6).fit(rng.normal(size=(12, 4)), np.ones(12))
    assert cpe.net_.sizes == [4, 64, 64, 1]
    cpe = MlpCpe(n_iter=5, seed=6).fit(rng.normal(size=(12, 40)), np.ones(12))
    assert cpe.net_.sizes == [40, 128, 128, 1]


def test_warm_start_refit_continues_from_previous_weights():
    rng = np.random.default_rng(11)
    Z = rng.normal(size=(60, 5))
    labels = (Z[:, 0] + 0.3 * Z[:, 1] > 0).astype(float)
    cpe = MlpCpe(n_iter=200, warm_start=True, seed=3).fit(Z, labels)
    first_final = cpe.final_loss_
    cpe.fit(Z, labels)
    # the second fit starts where the first ended, not from fresh weights
    assert cpe.loss_curve_[0] == pytest.approx(first_final, abs=1e-9)
    assert cpe.final_loss_ <= first_final + 1e-9
    # a changed feature width forces re-initialization instead of failing
    Z7 = rng.normal(size=(60, 7))
    cpe.fit(Z7, labels)
    assert cpe.net_.sizes[0] == 7
    # without warm_start a refit re-initializes even at matching width
    cold = MlpCpe(n_iter=200, seed=3).fit(Z, labels)
    start = cold.loss_curve_[0]
    cold.fit(Z, labels)
    assert cold.loss_curve_[0] == pytest.approx(start, abs=1e-12)


def test_class_balance_recovers_rare_positives():
    # 4 positives among 600 rows: uniform minibatches of 32 rarely see one,
    # stratified halves see 16 per step.
    rng = np.random.default_rng(5)
    Z = rng.normal(size=(600, 4))
    labels = np.zeros(600)
    pos = np.array([3, 117, 301, 444])
    labels[pos] = 1.0
    Z[pos] += np.array([4.0, 0.0, 0.0, 0.0])

    balanced = MlpCpe(n_iter=150, batch_size=32, class_balance=True,
                      seed=0).fit(Z, labels)
    plain = MlpCpe(n_iter=150, batch_size=32, seed=0).fit(Z, labels)
    assert balanced.predict_proba(Z[pos])[:, 1].min() > 0.5
    assert (balanced.predict_proba(Z[pos])[:, 1].min()
            > plain.predict_proba(Z[pos])[:, 1].min())
    # single-class data falls back to plain sampling without error
    MlpCpe(n_iter=20, batch_size=8, class_balance=True,
           seed=0).fit(Z[:40], np.zeros(40))


# ------------------------------------------------------- alignment dataset


def unit_rows(rng, n, L):
    U = rng.normal(size=(n, L))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def test_alignment_dataset_row_counts():
    rng = np.random.default_rng(7)
    U = unit_rows(rng, 4, 3)
    x_idx, u_idx, a = build_alignment_dataset(U, rng)
    assert len(a) == 40  # N + 9N
    assert a.sum() == 4
    assert (a == 0).sum() == 36


def test_alignment_dataset_no_accidental_alignment():
    rng = np.random.default_rng(8)
    U = unit_rows(rng, 12, 3)
    x_idx, u_idx, a = build_alignment_dataset(U, rng)
    neg = a == 0
    assert np.all(np.any(U[u_idx[neg]] != U[x_idx[neg]], axis=1))
    pos = a == 1
    np.testing.assert_array_equal(u_idx[pos], x_idx[pos])


def test_alignment_dataset_n2_uses_swap():
    rng = np.random.default_rng(9)
    U = unit_rows(rng, 2, 2)
    x_idx, u_idx, a = build_alignment_dataset(U, rng)
    neg = a == 0
    np.testing.assert_array_equal(u_idx[neg], 1 - x_idx[neg])


def test_alignment_dataset_requires_two_rows():
    rng = np.random.default_rng(10)
    with pytest.raises(ValueError):
        build_alignment_dataset(unit_rows(rng, 1, 2), rng)


def test_alignment_topk_replicates_use_top2_cosine_neighbors():
    rng = np.random.default_rng(11)
    U = unit_rows(rng, 10, 3)
    x_idx, u_idx, a = build_alignment_dataset(
        U, rng, p_random=0, p_top=2, k=2
    )
    neg = a == 0
    sims = U @ U.T
    for xi, ui in zip(x_idx[neg], u_idx[neg]):
        order = np.argsort(-sims[xi])
        top2 = [j for j in order if j != xi][:2]
        assert ui in top2


def test_alignment_dataset_seeded_deterministic():
    U = unit_rows(np.random.default_rng(12), 8, 3)
    out1 = build_alignment_dataset(U, np.random.default_rng(1))
    out2 = build_alignment_dataset(U, np.random.default_rng(1))
    for a, b in zip(out1, out2):
        np.testing.assert_array_equal(a, b)


def test_alignment_dataset_duplicate_rows_drop_pigeonhole_minimum():
    # A duplicate group of size g can leave at most n - g positions with a
    # differing preference, so each random replicate must keep exactly
    # n - max(0, 2g - n) rows — and every kept negative must be cross-group.
    rng = np.random.default_rng(21)
    for _ in range(25):
        n = int(rng.integers(4, 40))
        g = int(rng.integers(1, n))
        dup = np.tile(np.ones(3) / np.sqrt(3.0), (g, 1))
        U = np.vstack([dup, unit_rows(rng, n - g, 3)])[rng.permutation(n)]
        expected_kept = n - max(0, 2 * g - n)
        ctx = (
            pytest.warns(UserWarning, match="no misalignment")
            if expected_kept < n
            else contextlib.nullcontext()
        )
        with ctx:
            x_idx, u_idx, a = build_alignment_dataset(
                U, rng, p_random=3, p_top=0
            )
        neg = a == 0
        assert neg.sum() == 3 * expected_kept
        assert np.all(np.any(U[u_idx[neg]] != U[x_idx[neg]], axis=1))


def test_alignment_cpe_learns_majority_token_task():
    # Aligned u = one-hot of the sequence's majority token; the classifier
    # must separate aligned from permuted pairs on held-out rows.
    rng = np.random.default_rng(13)
    V, M, n = 3, 9, 240
    X = rng.integers(0, V, size=(n, M))
    maj = np.array([np.bincount(row, minlength=V).argmax() for row in X])
    U = np.eye(V)[maj]
    Z_x = np.eye(V)[X].reshape(n, -1)

    x_idx, u_idx, a = build_alignment_dataset(U, rng)
    Z = np.hstack([Z_x[x_idx], U[u_idx]])
    split = int(0.8 * len(a))
    perm = rng.permutation(len(a))
    train, test = perm[:split], perm[split:]
    cpe = MlpCpe(n_iter=600, seed=13).fit(Z[train], a[train])
    acc = ((cpe.predict_proba(Z[test])[:, 1] > 0.5) == a[test]).mean()
    assert acc > 0.8
