"""Geometry tests: dominance, non-dominated sorting, exact hypervolume, HVI.

Expected values are frozen from independent oracles implemented in this file
(inclusion-exclusion hypervolume, peeling rank sort, Monte-Carlo volume), not
from the library code under test.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from paretogen.pareto import (
    ReferencePointError,
    dominates,
    hypervolume,
    hvi,
    infer_reference_point,
    pareto_rank,
)


# ---------------------------------------------------------------- oracles


def oracle_hypervolume(front, r):
    """Inclusion-exclusion over box subsets. Exponential; |front| <= ~12."""
    front = np.asarray(front, dtype=float)
    r = np.asarray(r, dtype=float)
    total = 0.0
    n = front.shape[0]
    for size in range(1, n + 1):
        for idx in itertools.combinations(range(n), size):
            corner = front[list(idx)].min(axis=0)
            vol = float(np.prod(np.maximum(corner - r, 0.0)))
            total += vol if size % 2 == 1 else -vol
    return total


def oracle_rank(Y):
    """Peel successive non-dominated layers by pairwise dominance counts."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    ranks = np.zeros(n, dtype=int)
    alive = np.ones(n, dtype=bool)
    layer = 0
    while alive.any():
        layer += 1
        front_members = []
        for i in np.flatnonzero(alive):
            dominated = any(
                dominates(Y[j], Y[i]) for j in np.flatnonzero(alive) if j != i
            )
            if not dominated:
                front_members.append(i)
        for i in front_members:
            ranks[i] = layer
            alive[i] = False
    return ranks


def mc_hypervolume(front, r, n_samples, rng):
    front = np.asarray(front, dtype=float)
    r = np.asarray(r, dtype=float)
    hi = front.max(axis=0)
    box = float(np.prod(hi - r))
    pts = rng.uniform(r, hi, size=(n_samples, len(r)))
    covered = np.zeros(n_samples, dtype=bool)
    for y in front:
        covered |= np.all(pts <= y, axis=1)
    p = covered.mean()
    se = box * np.sqrt(p * (1.0 - p) / n_samples)
    return box * p, se


# ---------------------------------------------------------------- dominance


def test_dominates_basic():
    assert dominates((1.0, 2.0), (1.0, 1.0))
    assert dominates((2.0, 2.0), (1.0, 1.0))
    assert not dominates((1.0, 1.0), (1.0, 1.0))  # equal: no strict coordinate
    assert not dominates((2.0, 0.0), (1.0, 1.0))  # incomparable
    assert not dominates((1.0, 1.0), (1.0, 2.0))


def test_dominates_dimension_mismatch():
    with pytest.raises(ValueError):
        dominates((1.0, 2.0), (1.0, 2.0, 3.0))


def test_dominates_is_irreflexive_and_antisymmetric():
    rng = np.random.default_rng(0)
    for _ in range(200):
        L = int(rng.integers(2, 5))
        a, b = rng.normal(size=(2, L))
        assert not dominates(a, a)
        assert not (dominates(a, b) and dominates(b, a))


# ---------------------------------------------------------------- ranking


def test_pareto_rank_frozen_example():
    Y = [(2.0, 1.0), (1.0, 2.0), (0.5, 0.5), (0.0, 0.0)]
    assert pareto_rank(Y).tolist() == [1, 1, 2, 3]


def test_pareto_rank_duplicates_share_rank():
    Y = [(1.0, 1.0), (1.0, 1.0), (0.0, 2.0)]
    assert pareto_rank(Y).tolist() == [1, 1, 1]
    Y = [(1.0, 1.0), (1.0, 1.0), (0.5, 0.5)]
    assert pareto_rank(Y).tolist() == [1, 1, 2]


def test_pareto_rank_single_point():
    assert pareto_rank([(3.0, -1.0, 2.0)]).tolist() == [1]


def test_pareto_rank_matches_peeling_oracle():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n = int(rng.integers(1, 40))
        L = int(rng.integers(2, 5))
        Y = rng.uniform(size=(n, L))
        if rng.uniform() < 0.3 and n > 2:  # inject duplicates
            Y[rng.integers(n)] = Y[rng.integers(n)]
        ranks = pareto_rank(Y)
        assert ranks.min() == 1
        np.testing.assert_array_equal(ranks, oracle_rank(Y))


def test_pareto_rank_permutation_equivariant():
    rng = np.random.default_rng(2)
    Y = rng.uniform(size=(25, 3))
    ranks = pareto_rank(Y)
    perm = rng.permutation(25)
    np.testing.assert_array_equal(pareto_rank(Y[perm]), ranks[perm])


# ---------------------------------------------------------------- hypervolume


def test_hypervolume_frozen_2d():
    assert hypervolume([(2.0, 1.0), (1.0, 2.0)], (0.0, 0.0)) == pytest.approx(3.0)


def test_hypervolume_single_point_is_box_volume():
    assert hypervolume([(2.0, 3.0, 0.5)], (0.0, 0.0, 0.0)) == pytest.approx(3.0)
    assert hypervolume([(1.0, 1.0)], (-1.0, -1.0)) == pytest.approx(4.0)


def test_hypervolume_empty_front_is_zero():
    assert hypervolume(np.empty((0, 2)), (0.0, 0.0)) == 0.0


def test_hypervolume_dominated_points_contribute_nothing():
    front = [(2.0, 1.0), (1.0, 2.0), (0.5, 0.5)]
    assert hypervolume(front, (0.0, 0.0)) == pytest.approx(3.0)


def test_hypervolume_duplicate_points_counted_once():
    front = [(2.0, 1.0), (2.0, 1.0), (1.0, 2.0)]
    assert hypervolume(front, (0.0, 0.0)) == pytest.approx(3.0)


def test_hypervolume_requires_strict_domination_of_reference():
    with pytest.raises(ReferencePointError):
        hypervolume([(1.0, 0.0)], (0.0, 0.0))  # touches r in coordinate 2
    with pytest.raises(ReferencePointError):
        hypervolume([(1.0, 1.0), (-1.0, 2.0)], (0.0, 0.0))


def test_hypervolume_matches_inclusion_exclusion_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        L = int(rng.integers(2, 5))
        front = rng.uniform(0.1, 1.0, size=(n, L))
        r = np.zeros(L)
        assert hypervolume(front, r) == pytest.approx(
            oracle_hypervolume(front, r), rel=1e-9, abs=1e-12
        )


def test_hypervolume_matches_monte_carlo():
    rng = np.random.default_rng(4)
    for _ in range(5):
        n = int(rng.integers(5, 31))
        L = int(rng.integers(2, 5))
        front = rng.uniform(0.05, 1.0, size=(n, L))
        r = np.zeros(L)
        hv = hypervolume(front, r)
        est, se = mc_hypervolume(front, r, 200_000, rng)
        assert abs(hv - est) <= 3.0 * se + 1e-9


def test_hypervolume_translation_and_scaling_invariance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        L = int(rng.integers(2, 5))
        front = rng.uniform(0.1, 1.0, size=(6, L))
        r = np.zeros(L)
        hv = hypervolume(front, r)
        shift = rng.normal(size=L)
        assert hypervolume(front + shift, r + shift) == pytest.approx(hv, rel=1e-9)
        a = float(rng.uniform(0.5, 3.0))
        assert hypervolume(front * a, r * a) == pytest.approx(hv * a**L, rel=1e-9)


def test_hypervolume_monotone_in_added_points():
    rng = np.random.default_rng(6)
    for _ in range(30):
        L = int(rng.integers(2, 5))
        front = rng.uniform(0.1, 1.0, size=(8, L))
        r = np.zeros(L)
        hv = hypervolume(front, r)
        extra = rng.uniform(0.1, 1.0, size=(1, L))
        hv2 = hypervolume(np.vstack([front, extra]), r)
        assert hv2 >= hv - 1e-12


# ---------------------------------------------------------------- HVI


def test_hvi_frozen_example():
    front = [(2.0, 1.0), (1.0, 2.0)]
    assert hvi((1.5, 1.5), front, (0.0, 0.0)) == pytest.approx(0.25)


def test_hvi_zero_iff_dominated_or_equal():
    front = [(2.0, 1.0), (1.0, 2.0)]
    assert hvi((0.5, 0.5), front, (0.0, 0.0)) == 0.0
    assert hvi((2.0, 1.0), front, (0.0, 0.0)) == 0.0  # already a member
    assert hvi((1.0, 1.0), front, (0.0, 0.0)) == 0.0  # weakly dominated
    assert hvi((2.5, 0.5), front, (0.0, 0.0)) > 0.0


def test_hvi_empty_front_is_box_volume():
    assert hvi((2.0, 2.0), np.empty((0, 2)), (0.0, 0.0)) == pytest.approx(4.0)


def test_hvi_matches_hv_difference():
    rng = np.random.default_rng(7)
    for _ in range(100):
        L = int(rng.integers(2, 5))
        front = rng.uniform(0.1, 1.0, size=(int(rng.integers(1, 10)), L))
        y = rng.uniform(0.1, 1.0, size=L)
        r = np.zeros(L)
        direct = hypervolume(np.vstack([front, [y]]), r) - hypervolume(front, r)
        assert hvi(y, front, r) == pytest.approx(direct, abs=1e-10)


def test_hvi_nondominance_indicator_equivalence():
    # 1{HVI(y) > 0} must equal 1{y non-dominated w.r.t. the rank-1 set} exactly
    # for candidates outside the rank-1 set.
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(3, 30))
        L = int(rng.integers(2, 4))
        Y = rng.uniform(0.2, 1.0, size=(n, L))
        r = np.zeros(L)
        ranks = pareto_rank(Y)
        front = Y[ranks == 1]
        for i in np.flatnonzero(ranks > 1):
            y = Y[i]
            nondominated = not any(
                dominates(f, y) or np.array_equal(f, y) for f in front
            )
            assert (hvi(y, front, r) > 0.0) == nondominated


# ------------------------------------------------- reference point inference


def test_infer_reference_point_frozen_examples():
    r = infer_reference_point([(0.0, 1.0), (1.0, 0.0)])
    np.testing.assert_allclose(r, [-0.1, -0.1])
    r = infer_reference_point([(1.0, 1.0)])
    np.testing.assert_allclose(r, [1.0 - 1e-9, 1.0 - 1e-9])


def test_infer_reference_point_strictly_dominated_by_all_points():
    rng = np.random.default_rng(9)
    for _ in range(50):
        Y = rng.normal(size=(int(rng.integers(1, 20)), int(rng.integers(2, 6))))
        r = infer_reference_point(Y)
        assert np.all(Y > r)
