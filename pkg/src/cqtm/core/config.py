"""Numeric tolerances and register caps shared across the package."""

from __future__ import annotations

import os

NORM_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
SCHMIDT_TOL = 1e-8
PRUNE_EPS = 1e-12
BLANK_TOL = 1e-9

DEFAULT_AMPLITUDE_CAP = 1 << 22


def amplitude_cap() -> int:
    """Register size cap; overridable via CQTM_AMPLITUDE_CAP."""
    raw = os.environ.get("CQTM_AMPLITUDE_CAP")
    if raw is None:
        return DEFAULT_AMPLITUDE_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError("CQTM_AMPLITUDE_CAP must be positive")
    return cap
