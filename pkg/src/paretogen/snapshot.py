"""Persistence for trained runs: models, dataset, and run metadata.

A snapshot is a single JSON document with a leading ``format_version`` field,
the domain descriptor, the full evaluated dataset, the run configuration, and
the serialized model bundle (conditional sampler, prior, and classifiers).
Loading rebuilds everything losslessly, so sampling and scoring from a
snapshot match the live estimator exactly.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cpe import MlpCpe
from .domains import domain_from_descriptor
from .generative import CategoricalSequence, ConditionalGaussian
from .preferences import EmpiricalPreferences, PreferenceMixture
from .validation import SnapshotFormatError

SNAPSHOT_FORMAT_VERSION = 1

_MODEL_TYPES = {
    cls.backbone_tag: cls
    for cls in (ConditionalGaussian, CategoricalSequence)
}
_MODEL_TYPES["mlp-classifier"] = MlpCpe
_MODEL_TYPES["preference-mixture"] = PreferenceMixture
_MODEL_TYPES["empirical-preferences"] = EmpiricalPreferences


def model_from_config(blob):
    tag = blob.get("backbone")
    if tag not in _MODEL_TYPES:
        raise SnapshotFormatError(f"unknown model backbone tag {tag!r}")
    return _MODEL_TYPES[tag].from_config(blob)


def normalize_preference(u, warn_tol=None) -> np.ndarray:
    """Unit-normalize a preference direction, optionally warning on drift."""
    u = np.asarray(u, dtype=float).ravel()
    norm = float(np.linalg.norm(u))
    if norm <= 1e-12:
        raise ValueError("preference direction has zero norm")
    if warn_tol is not None and abs(norm - 1.0) > warn_tol:
        warnings.warn(
            f"preference direction had norm {norm:.6f}; renormalizing")
    return u / norm


@dataclass
class RunSnapshot:
    """A loaded snapshot: frozen models plus the dataset that trained them."""

    domain: object
    n_objectives: int
    variational: object
    prior: object
    pareto_cpe: object
    align_cpe: object
    preference_summary: dict | None
    X: np.ndarray
    Y: np.ndarray
    reference_point: np.ndarray
    run_config: dict = field(default_factory=dict)
    benchmark: dict | None = None
    seed: int | None = None
    rng_digest: str | None = None

    def sample_designs(self, u_star, n, rng) -> dict:
        """Draw ``n`` designs conditioned on a unit preference direction.

        Returns a JSON-ready dict with the normalized direction and, per
        design, the sampler log-prob and both classifier scores.
        """
        u = normalize_preference(u_star)
        U = np.tile(u, (int(n), 1))
        X, logq = self.variational.sample(U, rng)
        feats = np.hstack([self.domain.encode(X), U]) if len(X) else None
        pareto = align = None
        if feats is not None:
            if self.pareto_cpe is not None:
                pareto = self.pareto_cpe.log_pos_prob(feats)
            if self.align_cpe is not None:
                align = self.align_cpe.log_pos_prob(feats)
        designs = []
        for i in range(len(X)):
            designs.append({
                "x": self.domain.to_jsonable(X[i]),
                "logq": float(logq[i]),
                "pareto_score":
                    float(pareto[i]) if pareto is not None else None,
                "align_score": float(align[i]) if align is not None else None,
            })
        return {"u_used": [float(v) for v in u], "designs": designs}

    def to_blob(self) -> dict:
        return {
            "format_version": SNAPSHOT_FORMAT_VERSION,
            "benchmark": self.benchmark,
            "n_objectives": int(self.n_objectives),
            "domain": self.domain.descriptor(),
            "reference_point": [float(v) for v in self.reference_point],
            "run_config": _jsonable(self.run_config),
            "seed": self.seed,
            "rng_digest": self.rng_digest,
            "preference_summary": _jsonable(self.preference_summary),
            "dataset": {
                "x": [self.domain.to_jsonable(x) for x in self.X],
                "y": self.Y.tolist(),
            },
            "models": {
                "variational": self.variational.to_config(),
                "prior": self.prior.to_config(),
                "pareto_cpe":
                    None if self.pareto_cpe is None
                    else self.pareto_cpe.to_config(),
                "align_cpe":
                    None if self.align_cpe is None
                    else self.align_cpe.to_config(),
            },
        }


def _jsonable(obj):
    """Coerce numpy scalars/arrays nested in plain containers to JSON types."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def snapshot_from_estimator(est, benchmark=None, seed=None) -> RunSnapshot:
    """Package a fitted search estimator into a snapshot."""
    return RunSnapshot(
        domain=est.domain_,
        n_objectives=est.n_objectives_,
        variational=est.variational_,
        prior=est.prior_,
        pareto_cpe=est.pareto_cpe_,
        align_cpe=est.align_cpe_,
        preference_summary=est.preference_fit_,
        X=est.X_,
        Y=est.Y_,
        reference_point=est.reference_point_,
        run_config=est.get_params(),
        benchmark=benchmark,
        seed=seed,
        rng_digest=est.records_[-1]["seed_state_digest"],
    )


def save_snapshot(path, snapshot: RunSnapshot) -> None:
    Path(path).write_text(json.dumps(snapshot.to_blob()))


def load_snapshot(path) -> RunSnapshot:
    """Parse and rebuild a snapshot, checking the format version first."""
    try:
        blob = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"snapshot is not valid JSON: {exc}")
    if not isinstance(blob, dict) or "format_version" not in blob:
        raise SnapshotFormatError("snapshot lacks a format_version field")
    if blob["format_version"] != SNAPSHOT_FORMAT_VERSION:
        raise SnapshotFormatError(
            f"unsupported snapshot version {blob['format_version']!r}; "
            f"this build reads version {SNAPSHOT_FORMAT_VERSION}"
        )
    try:
        domain = domain_from_descriptor(blob["domain"])
        models = blob["models"]
        X = np.stack([domain.from_jsonable(o) for o in blob["dataset"]["x"]])
        return RunSnapshot(
            domain=domain,
            n_objectives=int(blob["n_objectives"]),
            variational=model_from_config(models["variational"]),
            prior=model_from_config(models["prior"]),
            pareto_cpe=(
                None if models["pareto_cpe"] is None
                else model_from_config(models["pareto_cpe"])
            ),
            align_cpe=(
                None if models["align_cpe"] is None
                else model_from_config(models["align_cpe"])
            ),
            preference_summary=blob.get("preference_summary"),
            X=X,
            Y=np.asarray(blob["dataset"]["y"], dtype=float),
            reference_point=np.asarray(blob["reference_point"], dtype=float),
            run_config=blob.get("run_config", {}),
            benchmark=blob.get("benchmark"),
            seed=blob.get("seed"),
            rng_digest=blob.get("rng_digest"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SnapshotFormatError):
            raise
        raise SnapshotFormatError(f"malformed snapshot content: {exc!r}")


def bundle_digest(snapshot: RunSnapshot) -> str:
    """Stable digest of the serialized model bundle.

    Computed from the canonical JSON of the model sections only, so two
    snapshots with identical weights digest identically regardless of
    dataset or metadata.
    """
    blob = snapshot.to_blob()["models"]
    canon = json.dumps(blob, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()
