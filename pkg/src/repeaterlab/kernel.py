"""Discrete-event backbone: simulation time, events and the timeline.

Simulation time is an integer count of picoseconds (the timestamp quantum),
large enough to cover 10^4 s runs without overflow.  The timeline dispatches
events in (fire_at, insertion-order) order, so equal timestamps resolve by
scheduling order and never depend on node naming.
"""

from .engine import (  # noqa: F401
    BACKEND,
    PS_PER_S,
    TIME_LIMIT,
    Event,
    Timeline,
    fork_rng,
    fork_seed,
    splitmix64,
)


def seconds_to_ps(seconds):
    """Convert seconds to the integer picosecond timestamp quantum."""
    return round(seconds * PS_PER_S)


def ps_to_seconds(ps):
    return ps / PS_PER_S
