"""Flat dotted-key configuration with environment and flag overrides.

Config files are JSON objects whose keys use dotted namespaces, e.g.

    {"experiment.kind": "scaling", "experiment.n_grid": [500, 1000], "fit.eta": 0.2}

Precedence (lowest to highest): built-in defaults, config file, environment
variables, command-line flags.  Environment overrides use the ``LSNET_``
prefix with ``__`` standing in for the dot (``LSNET_FIT__ETA=0.1``); values
are parsed as JSON when possible and kept as strings otherwise.
"""

from __future__ import annotations

import json
import os

__all__ = ["load_config", "apply_env_overrides", "ENV_PREFIX"]

ENV_PREFIX = "LSNET_"


def load_config(path):
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON object of dotted keys")
    return dict(raw)


def apply_env_overrides(cfg, environ=None):
    """Overlay LSNET_* environment variables onto a dotted-key dict."""
    environ = os.environ if environ is None else environ
    out = dict(cfg)
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower().replace("__", ".")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out
