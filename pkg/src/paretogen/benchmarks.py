"""Built-in black-box objective suites, baseline proposers, and run metrics.

All objectives are maximized.  The classic single-objective test functions
are negated so that their known minima become maxima; the Gaussian-mixture
objectives are densities and are already oriented for maximization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .domains import ContinuousDomain, SequenceDomain
from .pareto import infer_reference_point, pareto_rank
from .preferences import make_preference
from .validation import ConfigError, as_matrix

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"

# Repository-defined mixture parameters for the multimodal density pair:
# per objective, two isotropic components with equal weights.
_GMM_PARAMS = (
    (((0.2, 0.3), (0.7, 0.75)), (0.12, 0.18)),
    (((0.8, 0.3), (0.25, 0.8)), (0.15, 0.12)),
)


@dataclass
class Benchmark:
    """A named black-box objective with its design domain.

    ``evaluate`` is pure for ``noise_std == 0``; with positive noise it
    requires an explicit ``rng`` so that draws stay seeded.
    """

    name: str
    domain: ContinuousDomain | SequenceDomain
    n_objectives: int
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    noise_std: float = 0.0
    reference_point: list[float] | None = None
    initial_sampler: Callable | None = field(default=None, repr=False)

    def evaluate(self, X, rng=None) -> np.ndarray:
        if self.domain.kind == "continuous":
            X = np.asarray(X, dtype=float)
            clipped = np.clip(X, 0.0, 1.0)
            if not np.array_equal(clipped, X):
                warnings.warn(
                    f"designs outside the unit box passed to {self.name}; "
                    "values clamped to [0, 1]"
                )
            X = clipped
        X = self.domain.validate(X)
        Y = np.asarray(self.fn(X), dtype=float)
        std = np.broadcast_to(
            np.asarray(self.noise_std, dtype=float), (self.n_objectives,)
        )
        if np.any(std > 0.0):
            if rng is None:
                raise ValueError(
                    f"{self.name} has observation noise; pass an rng"
                )
            Y = Y + rng.normal(0.0, 1.0, size=Y.shape) * std
        return Y

    def sample_initial(self, n, rng) -> np.ndarray:
        if self.initial_sampler is not None:
            return self.initial_sampler(n, rng)
        if self.domain.kind == "continuous":
            sampler = qmc.LatinHypercube(d=self.domain.n_dims, seed=rng)
            return sampler.random(n)
        return random_search_proposer(self.domain, n, rng)


# ---------------------------------------------------------------------------
# continuous objectives
# ---------------------------------------------------------------------------

def _branin_currin(X):
    x1, x2 = X[:, 0], X[:, 1]
    a = 15.0 * x1 - 5.0
    b = 15.0 * x2
    branin = (
        (b - 5.1 / (4.0 * np.pi ** 2) * a ** 2 + 5.0 / np.pi * a - 6.0) ** 2
        + 10.0 * (1.0 - 1.0 / (8.0 * np.pi)) * np.cos(a)
        + 10.0
    )
    damp = np.where(x2 > 0.0, -np.expm1(-1.0 / (2.0 * np.maximum(x2, 1e-300))), 1.0)
    num = 2300.0 * x1 ** 3 + 1900.0 * x1 ** 2 + 2092.0 * x1 + 60.0
    den = 100.0 * x1 ** 3 + 500.0 * x1 ** 2 + 4.0 * x1 + 20.0
    currin = damp * num / den
    return np.stack([-branin, -currin], axis=1)


def _dtlz2(X, n_obj):
    g = ((X[:, n_obj - 1:] - 0.5) ** 2).sum(axis=1)
    theta = X[:, : n_obj - 1] * (np.pi / 2.0)
    cos = np.cos(theta)
    sin = np.sin(theta)
    F = np.empty((X.shape[0], n_obj))
    for m in range(n_obj):
        val = (1.0 + g) * np.prod(cos[:, : n_obj - 1 - m], axis=1)
        if m > 0:
            val = val * sin[:, n_obj - 1 - m]
        F[:, m] = val
    return -F


def _dtlz7(X):
    n_obj = 6
    f = X[:, : n_obj - 1]
    g = 1.0 + 9.0 * X[:, n_obj - 1:].mean(axis=1)
    term = f / (1.0 + g)[:, None] * (1.0 + np.sin(3.0 * np.pi * f))
    h = n_obj - term.sum(axis=1)
    last = (1.0 + g) * h
    return -np.concatenate([f, last[:, None]], axis=1)


def _zdt3(X):
    f1 = X[:, 0]
    g = 1.0 + 9.0 * X[:, 1:].mean(axis=1)
    ratio = f1 / g
    f2 = g * (1.0 - np.sqrt(ratio) - ratio * np.sin(10.0 * np.pi * f1))
    return -np.stack([f1, f2], axis=1)


def _gmm(X):
    cols = []
    for means, sigmas in _GMM_PARAMS:
        dens = np.zeros(X.shape[0])
        for mu, sig in zip(means, sigmas):
            sq = ((X - np.asarray(mu)) ** 2).sum(axis=1)
            dens += 0.5 * np.exp(-0.5 * sq / sig ** 2) / (2.0 * np.pi * sig ** 2)
        cols.append(dens)
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# sequence objective
# ---------------------------------------------------------------------------

_BIGRAM_TARGETS = ("AV", "VC", "CA")


def _bigram_counts(X):
    idx = {c: i for i, c in enumerate(AMINO_ACIDS)}
    cols = []
    for pat in _BIGRAM_TARGETS:
        a, b = idx[pat[0]], idx[pat[1]]
        hits = (X[:, :-1] == a) & (X[:, 1:] == b)
        cols.append(hits.sum(axis=1).astype(float))
    return np.stack(cols, axis=1)


def _bigram_initial_pool(domain, n, rng, max_total=3):
    """Uniform random sequences filtered to few target bigrams.

    Rejection sampling terminates quickly: a uniform 20-letter sequence has
    well under one expected target bigram.
    """
    rows = []
    while len(rows) < n:
        cand = rng.integers(0, domain.vocab_size, size=(max(n, 64), domain.seq_len))
        keep = _bigram_counts(cand).sum(axis=1) <= max_total
        rows.extend(cand[keep])
    return np.asarray(rows[:n], dtype=np.int64)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _make_branin_currin(noise_std=0.0):
    return Benchmark("branin-currin", ContinuousDomain(2), 2,
                     fn=_branin_currin, noise_std=noise_std)


def _make_dtlz2(noise_std=0.0, n_dims=3, n_objectives=2):
    if n_objectives >= n_dims:
        raise ConfigError("dtlz2 requires n_objectives < n_dims")
    return Benchmark("dtlz2", ContinuousDomain(n_dims), n_objectives,
                     fn=lambda X: _dtlz2(X, n_objectives), noise_std=noise_std)


def _make_dtlz7(noise_std=0.0):
    return Benchmark("dtlz7", ContinuousDomain(7), 6,
                     fn=_dtlz7, noise_std=noise_std)


def _make_zdt3(noise_std=0.0):
    return Benchmark("zdt3", ContinuousDomain(4), 2,
                     fn=_zdt3, noise_std=noise_std)


def _make_gmm(noise_std=0.0):
    return Benchmark("gmm", ContinuousDomain(2), 2,
                     fn=_gmm, noise_std=noise_std)


def _make_bigrams(noise_std=0.0, seq_len=32):
    domain = SequenceDomain(seq_len, AMINO_ACIDS)
    return Benchmark(
        "bigrams",
        domain,
        3,
        fn=_bigram_counts,
        noise_std=noise_std,
        reference_point=[0.0, 0.0, 0.0],
        initial_sampler=lambda n, rng: _bigram_initial_pool(domain, n, rng),
    )


_REGISTRY = {
    "branin-currin": _make_branin_currin,
    "dtlz2": _make_dtlz2,
    "dtlz7": _make_dtlz7,
    "zdt3": _make_zdt3,
    "gmm": _make_gmm,
    "bigrams": _make_bigrams,
}


def list_benchmarks() -> list[str]:
    return sorted(_REGISTRY)


def make_benchmark(name, **params) -> Benchmark:
    if name not in _REGISTRY:
        raise ConfigError(
            f"unknown benchmark {name!r}; available: {', '.join(list_benchmarks())}"
        )
    try:
        return _REGISTRY[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for benchmark {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# baseline proposers
# ---------------------------------------------------------------------------

def random_search_proposer(domain, n, rng) -> np.ndarray:
    """Uniform random designs over the domain."""
    if domain.kind == "continuous":
        return rng.random((n, domain.n_dims))
    return rng.integers(0, domain.vocab_size, size=(n, domain.seq_len))


def random_mutation_proposer(domain, X, Y, n, rng) -> np.ndarray:
    """Single random substitutions applied to current rank-1 designs."""
    if domain.kind != "sequence":
        raise ConfigError("random-mutation proposals require a sequence domain")
    X = domain.validate(X)
    pool = X[pareto_rank(Y) == 1]
    parents = pool[rng.integers(0, len(pool), size=n)]
    children = parents.copy()
    pos = rng.integers(0, domain.seq_len, size=n)
    # shift by 1..V-1 so the new token always differs from the original
    shift = rng.integers(1, domain.vocab_size, size=n)
    rows = np.arange(n)
    children[rows, pos] = (children[rows, pos] + shift) % domain.vocab_size
    return children


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def relative_hvi(hv_t, hv_0) -> float:
    """Relative hypervolume improvement over the starting dataset."""
    return (float(hv_t) - float(hv_0)) / max(float(hv_0), 1e-12)


def _edit_distance(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def diversity(seqs) -> float:
    """Mean pairwise edit distance of a set of sequences.

    Equal-length sets use the Hamming distance (the edit distance when only
    substitutions apply); mixed lengths fall back to full edit distance.
    """
    seqs = list(seqs)
    n = len(seqs)
    if n < 2:
        warnings.warn("diversity needs at least 2 sequences; returning 0")
        return 0.0
    lengths = {len(s) for s in seqs}
    if len(lengths) == 1:
        codes = np.asarray([[ord(c) for c in s] for s in seqs])
        diffs = (codes[:, None, :] != codes[None, :, :]).sum(axis=2)
        iu = np.triu_indices(n, k=1)
        return float(diffs[iu].mean())
    total = 0
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += _edit_distance(seqs[i], seqs[j])
            count += 1
    return total / count


def select_reference_preferences(front) -> np.ndarray:
    """Representative unit preference directions spanning an observed front.

    For two objectives: one direction toward each objective's high-quantile
    corner plus the centroid direction.  For more objectives the rule
    generalizes to one high-quantile target per axis plus the centroid.
    """
    front = as_matrix(front, "front", min_rows=2)
    r = infer_reference_point(front)
    n_obj = front.shape[1]
    if n_obj == 2:
        hi = np.quantile(front, 0.9, axis=0)
        lo = np.quantile(front, 0.1, axis=0)
        targets = [
            np.array([hi[0], lo[1]]),
            front.mean(axis=0),
            np.array([lo[0], hi[1]]),
        ]
    else:
        warnings.warn(
            "more than two objectives: using one per-axis extreme target "
            "per axis plus the centroid"
        )
        hi = np.quantile(front, 0.9, axis=0)
        lo = np.quantile(front, 0.1, axis=0)
        targets = []
        for axis in range(n_obj):
            t = lo.copy()
            t[axis] = hi[axis]
            targets.append(t)
        targets.append(front.mean(axis=0))
    return np.stack([make_preference(t, r) for t in targets])
