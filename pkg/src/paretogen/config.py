"""Run configuration files: a small YAML tree, strictly validated.

Top-level keys::

    benchmark:   name (registry id) plus optional params passed through
    run:         any AmortizedParetoSearch parameter except those owned
                 by the sections below
    backbone:    hidden_width / conditional
    preference:  "mixture" or "empirical"
    output_dir:  where artifacts go (relative paths resolve against the
                 PARETOGEN_OUTPUT_ROOT environment variable when set)
    seeds:       list of integer seeds, one independent run each

Unknown keys anywhere in the tree are rejected rather than ignored, so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import inspect
import os
from pathlib import Path

import yaml

from .benchmarks import make_benchmark
from .search import AmortizedParetoSearch
from .validation import ConfigError

OUTPUT_ROOT_ENV = "PARETOGEN_OUTPUT_ROOT"

_TOP_KEYS = {"benchmark", "run", "backbone", "preference", "output_dir",
             "seeds"}
_BACKBONE_KEYS = {"hidden_width", "conditional"}
_SECTION_OWNED = {
    "preference_model": "the top-level 'preference' key",
    "hidden_width": "the 'backbone' section",
    "conditional": "the 'backbone' section",
    "seed": "the top-level 'seeds' list",
}
_RUN_KEYS = set(
    inspect.signature(AmortizedParetoSearch.__init__).parameters
) - {"self"} - set(_SECTION_OWNED)


def load_config(path) -> dict:
    """Read and validate a config file; returns the normalized dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}")
    return validate_config(cfg)


def validate_config(cfg) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a key-value mapping at top level")
    for key in cfg:
        if key not in _TOP_KEYS:
            raise ConfigError(
                f"unknown config key {key!r}; expected one of "
                f"{sorted(_TOP_KEYS)}"
            )

    bench = cfg.get("benchmark")
    if not isinstance(bench, dict) or "name" not in bench:
        raise ConfigError("config needs a 'benchmark' section with a 'name'")
    for key in bench:
        if key not in ("name", "params"):
            raise ConfigError(f"unknown benchmark key {key!r}")
    if "params" in bench and not isinstance(bench["params"], dict):
        raise ConfigError("benchmark params must be a mapping")

    run = cfg.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("'run' must be a mapping of engine parameters")
    for key in run:
        if key in _SECTION_OWNED:
            raise ConfigError(
                f"run key {key!r} belongs in {_SECTION_OWNED[key]}")
        if key not in _RUN_KEYS:
            raise ConfigError(
                f"unknown run key {key!r}; valid keys: {sorted(_RUN_KEYS)}")

    backbone = cfg.get("backbone", {})
    if not isinstance(backbone, dict):
        raise ConfigError("'backbone' must be a mapping")
    for key in backbone:
        if key not in _BACKBONE_KEYS:
            raise ConfigError(f"unknown backbone key {key!r}")

    preference = cfg.get("preference", "mixture")
    if preference not in ("mixture", "empirical"):
        raise ConfigError(
            f"preference must be 'mixture' or 'empirical', got {preference!r}")

    if "output_dir" not in cfg:
        raise ConfigError("config needs an 'output_dir'")

    seeds = cfg.get("seeds", [0])
    if (not isinstance(seeds, list) or not seeds
            or not all(isinstance(s, int) for s in seeds)):
        raise ConfigError("'seeds' must be a non-empty list of integers")

    normalized = dict(cfg)
    normalized["run"] = dict(run)
    normalized["backbone"] = dict(backbone)
    normalized["preference"] = preference
    normalized["seeds"] = list(seeds)
    return normalized


def build_benchmark(cfg):
    bench = cfg["benchmark"]
    return make_benchmark(bench["name"], **bench.get("params", {}))


def build_estimator(cfg, seed, overrides=None) -> AmortizedParetoSearch:
    """Construct the engine for one seed from the config sections."""
    kwargs = dict(cfg.get("run", {}))
    kwargs.update(cfg.get("backbone", {}))
    kwargs["preference_model"] = cfg.get("preference", "mixture")
    kwargs["seed"] = seed
    if overrides:
        kwargs.update(overrides)
    return AmortizedParetoSearch(**kwargs)


def resolve_output_dir(cfg) -> Path:
    out = Path(cfg["output_dir"])
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not out.is_absolute():
        return Path(root) / out
    return out
