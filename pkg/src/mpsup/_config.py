"""Global numerical knobs, in the style of ``sklearn.get_config``."""

from __future__ import annotations

import os
from contextlib import contextmanager

_DEFAULTS = {
    "tol_rank": 1e-10,
    "amp_cap": 2**24,
    "period_cap": 12,
    "phase_tol": 1e-8,
}

_global_config = dict(_DEFAULTS)


def _state() -> dict:
    return _global_config


def get_config() -> dict:
    """Return a copy of the current configuration."""
    return dict(_state())


def set_config(**kwargs) -> None:
    state = _state()
    for key, value in kwargs.items():
        if key not in _DEFAULTS:
            raise KeyError(f"unknown config key {key!r}")
        if value is None:
            continue
        if key in ("tol_rank", "phase_tol") and not value > 0:
            raise ValueError(f"{key} must be positive")
        if key in ("amp_cap", "period_cap") and int(value) < 1:
            raise ValueError(f"{key} must be >= 1")
        state[key] = value


@contextmanager
def config_context(**kwargs):
    """Temporarily override configuration values."""
    old = get_config()
    set_config(**kwargs)
    try:
        yield
    finally:
        _state().clear()
        _state().update(old)


def n_threads() -> int:
    """Worker cap taken from ``MPSUP_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("MPSUP_THREADS", "1")))
    except ValueError:
        return 1
