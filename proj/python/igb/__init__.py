"""Multi-task loss and gradient balancing (C++ core)."""

import json

from ._igb import (
    ConfigError,
    ContractError,
    DomainError,
    Error,
    ReplayBuffer,
    ShapeError,
    StateError,
    compute_delta_m,
    compute_reward,
    compute_T,
    default_config,
    dwa_weights,
    igbv1_weights,
    mean_aggregate,
    method_label,
    min_norm,
    normalize_config,
    pcgrad,
    scaled_softmax,
    selftest,
)
from . import _igb


def _as_json(config):
    return config if isinstance(config, str) else json.dumps(config)


def train_run(config, seed=1):
    """Train one method; `config` is a dict or JSON text."""
    return _igb.train_run(_as_json(config), seed)


def run_sweep(config, out_dir=None):
    """Run a method sweep; returns the table, the summary and every run record."""
    return _igb.run_sweep(_as_json(config), None if out_dir is None else str(out_dir))


def config(**overrides):
    """Default configuration as a dict, with top-level keys replaced."""
    cfg = json.loads(default_config())
    cfg.update(overrides)
    return cfg


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
