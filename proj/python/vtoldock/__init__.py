"""Python bindings for the vtoldock landing simulator and agents.

Configurations may be given as JSON text or as plain dicts; missing keys take
their defaults.
"""

import json as _json
import os as _os

from . import _core
from ._core import ConfigError, DomainError, Network, NumericalFault, ParseError

__all__ = [
    "ConfigError",
    "DomainError",
    "LandingEnv",
    "Network",
    "NumericalFault",
    "ParseError",
    "default_config",
    "evaluate",
    "export_plots",
    "moving_average",
    "simulate_wave",
    "spectral_density",
    "train",
]


def _text(config):
    if config is None:
        return ""
    if isinstance(config, (str, bytes)):
        return config if isinstance(config, str) else config.decode()
    return _json.dumps(config)


def default_config():
    """Default configuration as a dict."""
    return _json.loads(_core.default_config())


def spectral_density(f, config=None):
    """JONSWAP density S(f) for each frequency in `f`."""
    return _core.spectral_density(list(f), _text(config))


def simulate_wave(seed, duration, config=None):
    """One platform realization as (t, z_w, zdot_w) lists."""
    return _core.simulate_wave(_text(config), seed, duration)


def moving_average(series, window):
    """Centered moving average and population std, NaNs skipped."""
    return _core.moving_average(list(series), window)


class LandingEnv(_core.LandingEnv):
    def __init__(self, config=None):
        super().__init__(_text(config))


def train(config=None, seed=1):
    """Train one seed; returns artifact paths and the per-episode rewards."""
    return _core.train(_text(config), seed)


def evaluate(weights, config=None, episodes=0):
    """Evaluate a weights file; `episodes` of 0 keeps the configured count."""
    return _core.evaluate(_os.fspath(weights), _text(config), episodes)


def export_plots(run_dir, out_dir, window=20):
    return _core.export_plots(_os.fspath(run_dir), _os.fspath(out_dir), window)
