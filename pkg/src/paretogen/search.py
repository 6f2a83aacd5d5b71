"""Amortized preference-conditioned Pareto search.

Each round ranks the evaluated designs, anneals a rank threshold into binary
"good enough" labels, turns outcomes into unit preference directions, fits a
preference distribution plus two class-probability estimators (one for the
labels, one for design/preference alignment), and then trains a conditional
generative sampler with weighted score-function gradients on the resulting
classifier-reward lower bound.  New designs are sampled conditioned on fresh
preference draws, evaluated, and absorbed into the dataset.

Stale proposal samples are reused between refreshes with importance weights
``q(x|u) / q_behavior(x|u)``; the proposal set is redrawn on a fixed period
and whenever the effective sample size of the weights collapses.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .autodiff import Adam, Tensor
from .benchmarks import (
    diversity,
    random_mutation_proposer,
    random_search_proposer,
    relative_hvi,
)
from .cpe import MlpCpe, build_alignment_dataset
from .generative import fit_prior
from .nets import copy_params
from .pareto import hypervolume, infer_reference_point, pareto_rank
from .preferences import EmpiricalPreferences, PreferenceMixture
from .validation import ConfigError, as_matrix, as_vector, check_same_dim


# ---------------------------------------------------------------------------
# threshold annealing and labeling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnealSchedule:
    """Linearly decaying percentile used to pick the rank threshold."""

    start_percentile: float
    total_rounds: int

    def percentile(self, round_index) -> float:
        return self.start_percentile * (1.0 - round_index / self.total_rounds)


def anneal_threshold(ranks, round_index, schedule) -> int:
    """Rank cutoff for positive labels at the given round.

    Takes the lower-interpolation quantile of the observed rank multiset at
    the schedule's percentile, floored at rank 1 so the cutoff always keeps
    the non-dominated set positive.  The final round is always exactly 1.
    When the quantile lands on the worst rank (a huge tied cluster of
    bottom-layer points can swallow any percentile), the cutoff backs off to
    the best rank below it, so the labels never degenerate to all-positive
    while more than one layer exists.
    """
    ranks = np.asarray(ranks)
    p = float(np.clip(schedule.percentile(round_index), 0.0, 1.0))
    tau = int(np.quantile(ranks, p, method="lower"))
    worst = int(ranks.max())
    if tau >= worst and worst > int(ranks.min()):
        tau = int(ranks[ranks < worst].max())
    return max(1, tau)


@dataclass
class LabeledData:
    """A dataset with Pareto ranks, binary labels, and preference directions."""

    x: np.ndarray
    y: np.ndarray
    ranks: np.ndarray
    labels: np.ndarray
    directions: np.ndarray
    valid: np.ndarray


def label_dataset(X, Y, reference_point, threshold) -> LabeledData:
    """Label designs by rank threshold and attach unit outcome directions.

    Rows whose outcome coincides with the reference point have no direction;
    they are marked invalid and their direction row is zero.
    """
    Y = as_matrix(Y, "objectives", min_rows=1)
    r = as_vector(reference_point, "reference point")
    check_same_dim(Y, r[None], "objectives and reference point")
    ranks = pareto_rank(Y)
    labels = ranks <= int(threshold)
    diffs = Y - r
    norms = np.linalg.norm(diffs, axis=1)
    valid = norms > 1e-12
    directions = np.zeros_like(diffs)
    directions[valid] = diffs[valid] / norms[valid, None]
    if not np.all(valid):
        warnings.warn(
            f"{int((~valid).sum())} outcome(s) coincide with the reference "
            "point; their preference directions are undefined and excluded"
        )
    return LabeledData(np.asarray(X), Y, ranks, labels, directions, valid)


def front_hypervolume(Y, reference_point) -> float:
    """Dominated hypervolume of a dataset above a reference point.

    Unlike the strict low-level hypervolume routine, points that fail to
    strictly dominate the reference point are simply dropped — they bound a
    degenerate box and contribute no volume.
    """
    Y = as_matrix(Y, "objectives", min_rows=1)
    r = as_vector(reference_point, "reference point")
    keep = np.all(Y > r, axis=1)
    if not keep.any():
        return 0.0
    return hypervolume(Y[keep], r)


# ---------------------------------------------------------------------------
# weighted score-function training of the conditional sampler
# ---------------------------------------------------------------------------

@dataclass
class ProposalState:
    """Cached proposal draws with their frozen behavior-model log-probs.

    ``logq_behavior`` is the sampler's log-prob at draw time; while the
    model trains, importance weights ``exp(logq_current - logq_behavior)``
    correct for the drift.  Classifier scores are fixed per draw.
    """

    x: np.ndarray
    u: np.ndarray
    logq_behavior: np.ndarray
    log_prior: np.ndarray
    log_pareto: np.ndarray
    log_align: np.ndarray


def refresh_proposal(model, prior, score_fn, preference_sampler, n_samples,
                     rng) -> ProposalState:
    """Draw a fresh on-policy proposal set and score it once."""
    u = np.asarray(preference_sampler(n_samples, rng), dtype=float)
    x, logq = model.sample(u, rng)
    if prior is not None:
        log_prior = np.asarray(prior.log_prob(x, u), dtype=float)
    else:
        log_prior = np.zeros(n_samples)
    log_pareto, log_align = score_fn(x, u)
    return ProposalState(
        x=x,
        u=u,
        logq_behavior=np.asarray(logq, dtype=float),
        log_prior=log_prior,
        log_pareto=np.asarray(log_pareto, dtype=float),
        log_align=np.asarray(log_align, dtype=float),
    )


def effective_sample_size(weights) -> float:
    """(Σw)² / Σw², with degenerate weight sets reporting 0.

    All-zero (underflowed) or non-finite (overflowed) weights carry no
    usable information, so they return 0 rather than nan — guaranteeing
    any positive refresh floor fires on them.
    """
    w = np.asarray(weights, dtype=float)
    denom = (w * w).sum()
    if not np.isfinite(denom) or denom <= 0.0:
        return 0.0
    return float(w.sum() ** 2 / denom)


def _importance_weights(model, state):
    logq = np.asarray(model.log_prob(state.x, state.u), dtype=float)
    return np.exp(logq - state.logq_behavior), logq


def elbo_value(state, logq_current, weights, beta, normalize=True) -> float:
    """Weighted classifier-reward lower bound over a proposal set.

    Per sample: ``log p(label|x,u) + log p(align|x,u) - beta * (log q - log
    prior)``, combined with self-normalized weights by default or plain
    ``1/S``-scaled raw weights otherwise.
    """
    logq_current = np.asarray(logq_current, dtype=float)
    w = np.asarray(weights, dtype=float)
    bracket = (state.log_pareto + state.log_align
               - beta * (logq_current - state.log_prior))
    finite = np.isfinite(bracket) & np.isfinite(w)
    if not finite.all():
        raise ValueError(
            f"non-finite objective contribution at sample {int(np.argmin(finite))}"
        )
    if normalize and w.sum() <= 0.0:
        raise ValueError("importance weights sum to zero; refresh proposals")
    coef = w / w.sum() if normalize else w / w.size
    return float((coef * bracket).sum())


def _surrogate_loss(model, state, logq, w, beta, normalize):
    """Build the gradient surrogate: weights and rewards enter as constants."""
    rewards = (state.log_pareto + state.log_align
               - beta * (logq - state.log_prior))
    coef = w / w.sum() if normalize else w / w.size
    logq_t = model.log_prob_t(state.x, state.u)
    return (logq_t * Tensor(-(coef * rewards))).sum()


def surrogate_gradients(model, state, beta, normalize=True):
    """Gradients of the weighted bound for the model's parameters.

    Returns ``(grads, ess, value)`` where ``value`` is the bound estimate at
    the current parameters and ``ess`` the effective sample size of the
    importance weights.
    """
    w, logq = _importance_weights(model, state)
    value = elbo_value(state, logq, w, beta, normalize)
    for p in model.params:
        p.grad = np.zeros_like(p.data)
    loss = _surrogate_loss(model, state, logq, w, beta, normalize)
    loss.backward()
    grads = [p.grad.copy() for p in model.params]
    return grads, effective_sample_size(w), value


def elbo_gradient_step(model, state, beta, opt, normalize=True,
                       ess_floor=None):
    """One ascent step on the weighted bound.

    When ``ess_floor`` is given and the weights' effective sample size falls
    below it, no step is taken and the value slot of the result is ``None``
    so the caller can refresh the proposal set first.
    """
    w, logq = _importance_weights(model, state)
    ess = effective_sample_size(w)
    if ess_floor is not None and ess < ess_floor:
        return ess, None
    value = elbo_value(state, logq, w, beta, normalize)
    opt.zero_grad()
    loss = _surrogate_loss(model, state, logq, w, beta, normalize)
    loss.backward()
    opt.step()
    return ess, value


def fit_variational(model, prior, score_fn, preference_sampler, rng, *,
                    beta=0.5, n_samples=256, max_iters=3000,
                    refresh_period=100, ess_fraction=0.5, learning_rate=1e-2,
                    normalize_weights=True) -> dict:
    """Train the conditional sampler against the current classifiers.

    The proposal set is refreshed every ``refresh_period`` iterations and
    whenever the importance weights' effective sample size drops below
    ``ess_fraction * n_samples``.  At every refresh the bound is estimated
    on the fresh on-policy draws.  The final parameters are kept unless an
    earlier snapshot beat the final estimate by more than three standard
    errors of that estimate — a guard against divergence that does not let
    Monte-Carlo noise in the bound snap back genuine late progress.
    """
    opt = Adam(model.params, lr=learning_rate)
    floor = ess_fraction * n_samples
    trace: list[tuple[int, float]] = []
    best = {"value": -np.inf, "params": None}
    counters = {"refreshes": 0}

    def draw(iteration):
        state = refresh_proposal(model, prior, score_fn, preference_sampler,
                                 n_samples, rng)
        counters["refreshes"] += 1
        value = elbo_value(state, state.logq_behavior, np.ones(n_samples),
                           beta, normalize=True)
        bracket = (state.log_pareto + state.log_align
                   - beta * (state.logq_behavior - state.log_prior))
        trace.append((iteration, value))
        if value > best["value"]:
            best["value"] = value
            best["params"] = [p.data.copy() for p in model.params]
        return state, value, float(bracket.std() / np.sqrt(n_samples))

    state, _, _ = draw(0)
    for it in range(1, max_iters + 1):
        if it % refresh_period == 0:
            state, _, _ = draw(it)
        ess, value = elbo_gradient_step(model, state, beta, opt,
                                        normalize_weights, ess_floor=floor)
        if value is None:
            state, _, _ = draw(it)
            elbo_gradient_step(model, state, beta, opt, normalize_weights)
    _, final_value, final_se = draw(max_iters + 1)
    if best["params"] is not None and best["value"] - final_value > 3 * final_se:
        for p, data in zip(model.params, best["params"]):
            p.data[...] = data
    return {
        "best_elbo": best["value"],
        "trace": trace,
        "n_refreshes": counters["refreshes"],
        "iters": max_iters,
    }


# ---------------------------------------------------------------------------
# batch proposal
# ---------------------------------------------------------------------------

def propose_batch(model, domain, preference_sampler, n, rng, existing=None,
                  max_attempt_factor=10):
    """Sample ``n`` preference-conditioned designs, avoiding known designs.

    Candidates colliding with ``existing`` design keys are redrawn, up to
    ``max_attempt_factor * n`` attempts in total; any remaining slots are
    then filled with unfiltered draws.  Accepted candidates join the
    exclusion set, so a batch never spends two evaluations on the same
    design even when the sampler has concentrated onto a few modes.
    """
    if n == 0:
        u = np.asarray(preference_sampler(0, rng), dtype=float)
        x, _ = model.sample(u, rng)
        return x, u
    keys = set(existing) if existing is not None else set()
    xs: list[np.ndarray] = []
    us: list[np.ndarray] = []
    attempts = 0
    budget = max_attempt_factor * max(n, 1)
    while len(xs) < n and attempts < budget:
        u = np.asarray(preference_sampler(1, rng), dtype=float)
        x, _ = model.sample(u, rng)
        attempts += 1
        key = domain.design_key(x[0])
        if key in keys:
            continue
        keys.add(key)
        xs.append(x[0])
        us.append(u[0])
    if len(xs) < n:
        warnings.warn(
            f"could not avoid duplicate designs after {attempts} attempts; "
            f"accepting {n - len(xs)} unfiltered draw(s)"
        )
        u = np.asarray(preference_sampler(n - len(xs), rng), dtype=float)
        x, _ = model.sample(u, rng)
        xs.extend(x)
        us.extend(u)
    return np.stack(xs), np.stack(us)


# ---------------------------------------------------------------------------
# run records
# ---------------------------------------------------------------------------

def _seed_digest(rng) -> str:
    state = json.dumps(rng.bit_generator.state, sort_keys=True, default=int)
    return hashlib.sha256(state.encode()).hexdigest()[:16]


def _batch_items(domain, Xb, Ub, Yb, ok):
    items = []
    for i in range(len(Xb)):
        item = {
            "x": domain.to_jsonable(Xb[i]),
            "u": [float(v) for v in Ub[i]],
            "y": [float(v) for v in Yb[i]] if ok[i] else None,
        }
        if not ok[i]:
            item["failed"] = True
        items.append(item)
    return items


def _batch_diversity(domain, Xb):
    if domain.kind != "sequence" or len(Xb) < 2:
        return None
    return float(diversity(domain.to_strings(Xb)))


def _round_record(round_index, tau, n_pos, hv, hv0, div, losses, items, rng):
    return {
        "round": int(round_index),
        "tau": tau,
        "n_labeled_pos": n_pos,
        "hv": float(hv),
        "rel_hvi": float(relative_hvi(hv, hv0)),
        "degenerate_baseline": bool(hv0 < 1e-12),
        "diversity": div,
        "losses": losses,
        "batch": items,
        "seed_state_digest": _seed_digest(rng),
    }


def _initial_data(problem, X0, Y0, init_points, rng):
    if X0 is None:
        X0 = problem.sample_initial(init_points, rng)
        Y0 = None
    X0 = problem.domain.validate(X0)
    if Y0 is None:
        Y0 = problem.evaluate(X0, rng=rng)
    Y0 = as_matrix(Y0, "initial objectives", min_rows=1)
    if Y0.shape[0] != X0.shape[0]:
        raise ConfigError(
            f"initial designs and objectives disagree: {X0.shape[0]} vs "
            f"{Y0.shape[0]} rows"
        )
    if not np.all(np.isfinite(Y0)):
        raise ValueError("initial objectives contain non-finite values")
    return X0, Y0


def _evaluate_with_failures(problem, Xb, rng):
    """Evaluate a batch, falling back to per-design calls on errors."""
    try:
        Yb = np.asarray(problem.evaluate(Xb, rng=rng), dtype=float)
    except Exception:
        rows = []
        for x in Xb:
            try:
                rows.append(
                    np.asarray(problem.evaluate(x[None], rng=rng),
                               dtype=float)[0]
                )
            except Exception:
                rows.append(np.full(problem.n_objectives, np.nan))
        Yb = np.stack(rows)
    ok = np.all(np.isfinite(Yb), axis=1)
    return Yb, ok


def _uniform_sphere_sampler(n_dims):
    def sample(n, rng):
        v = rng.standard_normal((n, n_dims))
        norms = np.maximum(np.linalg.norm(v, axis=1, keepdims=True), 1e-12)
        return v / norms
    return sample


def _uniform_cone_sampler(n_dims):
    """Uniform directions over the all-positive orthant of the unit sphere,
    i.e. the cone of joint improvements over the reference point."""
    def sample(n, rng):
        v = np.abs(rng.standard_normal((n, n_dims)))
        norms = np.maximum(np.linalg.norm(v, axis=1, keepdims=True), 1e-12)
        return v / norms
    return sample


def _mix_exploration(sampler, n_dims, eps):
    """Replace a ``eps`` fraction of sampled directions with uniform draws
    from the improvement cone.

    A direction distribution fitted to the current positives can only
    produce directions the data has already attained; when every positive
    sits on an objective axis the sampler never conditions the generator
    toward joint improvements, and regions between the axes are never
    proposed.  The floor breaks that feedback loop the same way an
    epsilon-greedy policy does.
    """
    uniform = _uniform_cone_sampler(n_dims)

    def sample(n, rng):
        u = np.array(sampler(n, rng), dtype=float, copy=True)
        mask = rng.random(n) < eps
        if mask.any():
            u[mask] = uniform(int(mask.sum()), rng)
        return u

    return sample


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------

class AmortizedParetoSearch(BaseEstimator):
    """Preference-conditioned generative optimizer for black-box objectives.

    Parameters mirror the run configuration: the outer loop (``rounds``,
    ``batch_size``, ``init_points``), the labeling schedule
    (``start_percentile`` or a ``fixed_threshold``), the preference
    distribution (``mixture`` or ``empirical``, or a ``fixed_preference``
    direction, optionally mixed with a ``preference_exploration`` fraction
    of uniform improvement-cone directions), the two classifiers, and the
    inner weighted score-function optimization of the conditional sampler.

    ``reference_point=None`` re-infers the reference point from the full
    dataset every round, unless the problem recommends a fixed one.  Rank
    labels cover every row; rows whose outcome coincides with the reference
    point have no intrinsic direction and are skipped by the preference and
    alignment fits, while the label classifier still trains on them under
    directions resampled from the valid rows.

    Attributes after ``fit``: ``X_``/``Y_`` (all evaluated designs and
    outcomes), ``records_`` (one JSON-ready dict per round), ``variational_``,
    ``prior_``, ``pareto_cpe_``, ``align_cpe_``, ``preference_fit_``,
    ``reference_point_``, ``domain_``.
    """

    def __init__(self, rounds=10, batch_size=5, init_points=64,
                 gradient_samples=256, beta=0.5, start_percentile=0.25,
                 fixed_threshold=None, mixture_components=5,
                 preference_model="mixture", fixed_preference=None,
                 preference_exploration=0.0,
                 n_random_negatives=7, n_nearest_negatives=2,
                 use_alignment=True, conditional=True,
                 unconditional_first_round=True, max_inner_iters=3000,
                 refresh_period=100, ess_fraction=0.5, variational_lr=1e-2,
                 normalize_weights=True, cpe_lr=3e-3, cpe_iters=300,
                 cpe_batch_size=256, cpe_warm_start=True,
                 cpe_label_smoothing=0.0, align_label_smoothing=0.0,
                 cpe_class_balance=False,
                 mixture_lr=0.05,
                 mixture_iters=400, prior_lr=3e-3, prior_max_iters=800,
                 hidden_width=None, reference_point=None, seed=0):
        self.rounds = rounds
        self.batch_size = batch_size
        self.init_points = init_points
        self.gradient_samples = gradient_samples
        self.beta = beta
        self.start_percentile = start_percentile
        self.fixed_threshold = fixed_threshold
        self.mixture_components = mixture_components
        self.preference_model = preference_model
        self.fixed_preference = fixed_preference
        self.preference_exploration = preference_exploration
        self.n_random_negatives = n_random_negatives
        self.n_nearest_negatives = n_nearest_negatives
        self.use_alignment = use_alignment
        self.conditional = conditional
        self.unconditional_first_round = unconditional_first_round
        self.max_inner_iters = max_inner_iters
        self.refresh_period = refresh_period
        self.ess_fraction = ess_fraction
        self.variational_lr = variational_lr
        self.normalize_weights = normalize_weights
        self.cpe_lr = cpe_lr
        self.cpe_iters = cpe_iters
        self.cpe_batch_size = cpe_batch_size
        self.cpe_warm_start = cpe_warm_start
        self.cpe_label_smoothing = cpe_label_smoothing
        self.align_label_smoothing = align_label_smoothing
        self.cpe_class_balance = cpe_class_balance
        self.mixture_lr = mixture_lr
        self.mixture_iters = mixture_iters
        self.prior_lr = prior_lr
        self.prior_max_iters = prior_max_iters
        self.hidden_width = hidden_width
        self.reference_point = reference_point
        self.seed = seed

    # -- configuration ----------------------------------------------------

    def _check_config(self):
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.gradient_samples < 2:
            raise ConfigError("gradient_samples must be >= 2")
        if self.beta < 0.0:
            raise ConfigError("beta must be >= 0")
        if not 0.0 <= self.start_percentile <= 1.0:
            raise ConfigError("start_percentile must lie in [0, 1]")
        if self.preference_model not in ("mixture", "empirical"):
            raise ConfigError(
                "preference_model must be 'mixture' or 'empirical', got "
                f"{self.preference_model!r}"
            )
        if not 0.0 <= self.preference_exploration < 1.0:
            raise ConfigError("preference_exploration must lie in [0, 1)")
        if not 0.0 < self.ess_fraction <= 1.0:
            raise ConfigError("ess_fraction must lie in (0, 1]")
        if self.fixed_threshold is not None and self.fixed_threshold < 1:
            raise ConfigError("fixed_threshold must be >= 1")

    def _child_seed(self, rng) -> int:
        return int(rng.integers(0, 2**31 - 1))

    # -- per-round model fits ---------------------------------------------

    def _fit_preferences(self, directions, labels, round_index, n_obj, rng):
        """Fit the preference distribution; returns (sampler, loss, summary)."""
        if self.fixed_preference is not None:
            u_star = np.asarray(self.fixed_preference, dtype=float)
            u_star = u_star / np.linalg.norm(u_star)
            sampler = lambda n, r: np.tile(u_star, (n, 1))  # noqa: E731
            return sampler, None, {"kind": "fixed", "u": u_star.tolist()}
        if self.preference_model == "empirical":
            try:
                emp = EmpiricalPreferences().fit(directions, labels)
            except ValueError as exc:
                warnings.warn(
                    f"empirical preference fit failed ({exc}); falling back "
                    "to uniform directions"
                )
                return (_uniform_sphere_sampler(n_obj), None,
                        {"kind": "uniform-fallback"})
            return emp.sample, None, {
                "kind": "empirical", "n_directions": len(emp.directions_),
            }
        unconditional = round_index == 1 and self.unconditional_first_round
        gamma = PreferenceMixture(
            n_components=self.mixture_components,
            learning_rate=self.mixture_lr,
            n_iter=self.mixture_iters,
            seed=self._child_seed(rng),
        )
        try:
            gamma.fit(directions, None if unconditional else labels)
        except ValueError as exc:
            warnings.warn(
                f"preference mixture fit failed ({exc}); falling back to "
                "uniform directions"
            )
            return (_uniform_sphere_sampler(n_obj), None,
                    {"kind": "uniform-fallback"})
        summary = {
            "kind": "mixture",
            "means": gamma.means_.tolist(),
            "weights": gamma.weights_.tolist(),
        }
        return gamma.sample, float(gamma.loss_), summary

    def _fit_classifier(self, features, labels, rng, previous=None,
                        label_smoothing=0.0, class_balance=False):
        """Fit a classifier; ``previous`` is refit in place when warm starts
        are enabled, so a model keeps its weights across rounds."""
        cpe = previous if self.cpe_warm_start and previous is not None \
            else MlpCpe(
                hidden_width=self.hidden_width,
                learning_rate=self.cpe_lr,
                n_iter=self.cpe_iters,
                batch_size=self.cpe_batch_size,
                warm_start=self.cpe_warm_start,
            )
        cpe.set_params(seed=self._child_seed(rng),
                       label_smoothing=label_smoothing,
                       class_balance=class_balance)
        cpe.fit(features, labels)
        return cpe

    # -- the optimization loop --------------------------------------------

    def fit(self, problem, X0=None, Y0=None):
        """Run the full optimization loop against a black-box problem.

        ``problem`` needs ``domain``, ``n_objectives``,
        ``evaluate(X, rng=None)``, and ``sample_initial(n, rng)``.  Designs
        whose evaluation fails or returns non-finite values are recorded
        with a failure flag and excluded from the dataset.
        """
        self._check_config()
        domain = problem.domain
        n_obj = int(problem.n_objectives)
        rng = np.random.default_rng(self.seed)

        X, Y = _initial_data(problem, X0, Y0, self.init_points, rng)
        keys = {domain.design_key(x) for x in X}

        fixed_r = self.reference_point
        if fixed_r is None:
            fixed_r = getattr(problem, "reference_point", None)
        if fixed_r is not None:
            fixed_r = np.asarray(fixed_r, dtype=float)

        r = fixed_r if fixed_r is not None else infer_reference_point(Y)
        hv0 = front_hypervolume(Y, r)
        schedule = AnnealSchedule(self.start_percentile, self.rounds)

        prior = domain.make_backbone(
            cond_dim=n_obj, hidden_width=self.hidden_width,
            unconditional=True, seed=self._child_seed(rng),
        )
        fit_prior(prior, X, seed=self._child_seed(rng),
                  max_iter=self.prior_max_iters, learning_rate=self.prior_lr)
        variational = domain.make_backbone(
            cond_dim=n_obj, hidden_width=self.hidden_width,
            unconditional=not self.conditional, seed=self._child_seed(rng),
        )
        copy_params(prior.params, variational.params)

        records = []
        theta = psi = None
        pref_summary = None
        for t in range(1, self.rounds + 1):
            if fixed_r is None:
                r = infer_reference_point(Y)
            if self.fixed_threshold is not None:
                tau = int(self.fixed_threshold)
            else:
                tau = anneal_threshold(pareto_rank(Y), t, schedule)
            labeled = label_dataset(X, Y, r, tau)
            sel = labeled.valid
            directions = labeled.directions[sel]
            labels = labeled.labels[sel]

            sampler, gamma_loss, pref_summary = self._fit_preferences(
                directions, labels, t, n_obj, rng)
            if self.preference_exploration > 0 and self.fixed_preference is None:
                sampler = _mix_exploration(sampler, n_obj,
                                           self.preference_exploration)
                pref_summary["exploration"] = self.preference_exploration

            # The rank labels cover every row, including outcomes sitting
            # exactly at the reference point. Those rows carry no intrinsic
            # direction, so the label classifier sees them under directions
            # resampled from the valid pool: bad designs are bad for any
            # preference, and the classifier cannot shortcut on the
            # direction feature alone.
            encoded_all = domain.encode(X)
            directions_all = labeled.directions
            if sel.any() and not sel.all():
                directions_all = directions_all.copy()
                fill = rng.integers(0, int(sel.sum()), size=int((~sel).sum()))
                directions_all[~sel] = directions[fill]
            theta = self._fit_classifier(
                np.hstack([encoded_all, directions_all]), labeled.labels, rng,
                previous=theta, label_smoothing=self.cpe_label_smoothing,
                class_balance=self.cpe_class_balance)

            round_psi = None
            if self.use_alignment:
                try:
                    xi, ui, align_labels = build_alignment_dataset(
                        directions,
                        rng=np.random.default_rng(self._child_seed(rng)),
                        p_random=self.n_random_negatives,
                        p_top=self.n_nearest_negatives,
                    )
                    psi = round_psi = self._fit_classifier(
                        np.hstack([encoded_all[sel][xi], directions[ui]]),
                        align_labels, rng, previous=psi,
                        label_smoothing=self.align_label_smoothing)
                except ValueError as exc:
                    warnings.warn(
                        f"alignment classifier skipped this round: {exc}")

            def score_fn(Xs, Us, _theta=theta, _psi=round_psi):
                feats = np.hstack([domain.encode(Xs), Us])
                pz = _theta.log_pos_prob(feats)
                pa = _psi.log_pos_prob(feats) if _psi is not None \
                    else np.zeros(len(pz))
                return pz, pa

            diag = fit_variational(
                variational, prior, score_fn, sampler, rng,
                beta=self.beta, n_samples=self.gradient_samples,
                max_iters=self.max_inner_iters,
                refresh_period=self.refresh_period,
                ess_fraction=self.ess_fraction,
                learning_rate=self.variational_lr,
                normalize_weights=self.normalize_weights,
            )

            Xb, Ub = propose_batch(variational, domain, sampler,
                                   self.batch_size, rng, existing=keys)
            keys.update(domain.design_key(x) for x in Xb)
            Yb, ok = _evaluate_with_failures(problem, Xb, rng)
            if ok.any():
                X = np.concatenate([X, Xb[ok]], axis=0)
                Y = np.concatenate([Y, Yb[ok]], axis=0)

            hv = front_hypervolume(Y, r)
            losses = {
                "gamma": gamma_loss,
                "theta": float(theta.final_loss_),
                "psi": float(round_psi.final_loss_)
                       if round_psi is not None else None,
                "elbo": float(diag["best_elbo"]),
            }
            records.append(_round_record(
                t, int(tau), int(labeled.labels.sum()), hv, hv0,
                _batch_diversity(domain, Xb), losses,
                _batch_items(domain, Xb, Ub, Yb, ok), rng,
            ))

        self.X_ = X
        self.Y_ = Y
        self.records_ = records
        self.variational_ = variational
        self.prior_ = prior
        self.pareto_cpe_ = theta
        self.align_cpe_ = psi
        self.preference_fit_ = pref_summary
        self.reference_point_ = np.asarray(r, dtype=float)
        self.domain_ = domain
        self.n_objectives_ = n_obj
        self.problem_name_ = getattr(problem, "name", "problem")
        return self


# ---------------------------------------------------------------------------
# proposal-only baselines
# ---------------------------------------------------------------------------

_BASELINE_NAMES = ("random", "random-mutation")


def run_baseline(problem, proposer, *, rounds, batch_size, init_points=64,
                 seed=0, X0=None, Y0=None, reference_point=None) -> list[dict]:
    """Run a proposal-only baseline with the engine's metrics and records.

    ``random`` draws uniform designs; ``random-mutation`` applies single
    random substitutions to the current rank-1 set (sequence domains only).
    """
    if proposer not in _BASELINE_NAMES:
        raise ConfigError(
            f"unknown baseline {proposer!r}; available: "
            f"{', '.join(_BASELINE_NAMES)}"
        )
    domain = problem.domain
    if proposer == "random-mutation" and domain.kind != "sequence":
        raise ConfigError("random-mutation requires a sequence domain")
    rng = np.random.default_rng(seed)
    X, Y = _initial_data(problem, X0, Y0, init_points, rng)

    fixed_r = reference_point
    if fixed_r is None:
        fixed_r = getattr(problem, "reference_point", None)
    if fixed_r is not None:
        fixed_r = np.asarray(fixed_r, dtype=float)
    r = fixed_r if fixed_r is not None else infer_reference_point(Y)
    hv0 = front_hypervolume(Y, r)

    null_losses = {"gamma": None, "theta": None, "psi": None, "elbo": None}
    records = []
    for t in range(1, rounds + 1):
        if fixed_r is None:
            r = infer_reference_point(Y)
        if proposer == "random":
            Xb = random_search_proposer(domain, batch_size, rng)
        else:
            Xb = random_mutation_proposer(domain, X, Y, batch_size, rng)
        Ub = np.zeros((batch_size, Y.shape[1]))
        Yb, ok = _evaluate_with_failures(problem, Xb, rng)
        if ok.any():
            X = np.concatenate([X, Xb[ok]], axis=0)
            Y = np.concatenate([Y, Yb[ok]], axis=0)
        hv = front_hypervolume(Y, r)
        records.append(_round_record(
            t, None, None, hv, hv0, _batch_diversity(domain, Xb),
            dict(null_losses), _batch_items(domain, Xb, Ub, Yb, ok), rng,
        ))
    return records
