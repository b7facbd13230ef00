"""Traffic speed field reconstruction from sparse detector and probe data.

Arrays are SI (m, s, m/s). Fields are shaped (nx, nt): space is the row.
Configuration dictionaries follow the JSON config file layout and are
merged over the defaults; unknown keys raise ConfigError.
"""

import json as _json

from ._asnn import (
    AsmParams,
    AsnnError,
    ConfigError,
    DataError,
    DivergenceError,
    DomainError,
    Grid,
    IoError,
    ShapeError,
    asm_estimate,
    cli,
    relative_error,
)
from . import _asnn

__all__ = [
    "AsmParams", "AsnnError", "ConfigError", "DataError", "DivergenceError", "DomainError", "Grid",
    "IoError", "ShapeError", "asm_estimate", "cli", "default_config", "physics_residual",
    "relative_error", "resolve_config", "sample_detectors", "simulate", "train", "train_ensemble",
]


def _dump(config):
    return _json.dumps(config or {})


def default_config():
    """The full default configuration as a dict."""
    return _json.loads(_asnn._default_config())


def resolve_config(config=None):
    """Defaults merged with `config`, validated."""
    return _json.loads(_asnn._resolve_config(_dump(config)))


def simulate(config=None):
    """Runs the LWR simulator. Returns (grid, speed, density)."""
    return _asnn._simulate(_dump(config))


def sample_detectors(speed, grid, config=None):
    """Point-detector observations as (x, t, v) arrays."""
    return _asnn._sample_detectors(speed, grid, _dump(config))


def train(grid, x, t, v, config=None, init=None):
    """Trains the ASM parameters on the observations.

    Returns a dict with params, cost_history, epochs, stop_reason, warnings
    and estimate.
    """
    return _asnn._train(grid, x, t, v, _dump(config), init)


def train_ensemble(grid, x, t, v, config=None):
    """Trains the weighted ensemble; adds branches, weights, vertex_restart."""
    return _asnn._train_ensemble(grid, x, t, v, _dump(config))


def physics_residual(speed, grid, config=None):
    return _asnn._physics_residual(speed, grid, _dump(config))
