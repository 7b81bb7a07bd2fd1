"""Lattice-crossing counters along billiard trajectories.

The tracker runs the same event loop as the flow but carries two sheet bits
toggled at wall reflections, and counts integer-line crossings with
sheet-determined signs.  The pair (fx, fy) computed this way must stay
within sqrt(2) of the true displacement for every trajectory; the `mutate`
flag swaps which wall toggles which bit and is kept as a deliberate fault
to show the certification actually fails when the bookkeeping is wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .billiard import ParticleState, make_state
from .errors import CornerHit, DomainError
from .tables import TableParams

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TrackResult:
    """Counters after a tracked flight, with optional sampled series."""

    fx: int
    fy: int
    vertical_crossings: int
    mixed: int
    max_deviation: float
    events: int
    clock: float
    aborted: bool
    times: np.ndarray
    series: np.ndarray  # shape (filled, 4): fx, fy, vert, mixed


def track(table: TableParams, state: ParticleState, t_max: float,
          schedule=None, max_events: int = 0, mutate: bool = False) -> TrackResult:
    """Run the crossing tracker from a state for flow time t_max.

    `schedule` optionally samples all four counters at given times;
    `max_events` > 0 additionally stops after that many reflections.
    """
    if t_max <= 0.0:
        raise DomainError("t_max must be positive")
    if schedule is None:
        sched = np.empty(0, dtype=np.float64)
    else:
        sched = np.asarray(schedule, dtype=np.float64)
        if sched.ndim != 1:
            raise DomainError("schedule must be 1-d")
        if len(sched) and (np.any(np.diff(sched) <= 0.0) or sched[0] <= 0.0):
            raise DomainError("schedule must be strictly increasing and positive")
    n = len(sched)
    out_fx = np.zeros(n, dtype=np.int64)
    out_fy = np.zeros(n, dtype=np.int64)
    out_vert = np.zeros(n, dtype=np.int64)
    out_mm = np.zeros(n, dtype=np.int64)
    status, filled, events, max_dev, fx, fy, vert, mm, clock = kernels.track_crossings(
        table.a, table.b,
        float(state.offset[0]), float(state.offset[1]),
        np.int64(state.dir_signs[0]), np.int64(state.dir_signs[1]),
        math.cos(state.base_angle), math.sin(state.base_angle),
        float(t_max), np.int64(max_events), mutate,
        sched, out_fx, out_fy, out_vert, out_mm, kernels.CORNER_TOL,
    )
    aborted = status == kernels.STATUS_CORNER
    series = np.stack([out_fx[:filled], out_fy[:filled],
                       out_vert[:filled], out_mm[:filled]], axis=1)
    return TrackResult(
        fx=int(fx), fy=int(fy), vertical_crossings=int(vert), mixed=int(mm),
        max_deviation=float(max_dev), events=int(events), clock=float(clock),
        aborted=aborted, times=sched[:filled], series=series,
    )


def track_intersection(table: TableParams, position, theta: float,
                       t_max: float) -> tuple[int, int]:
    """The tracked integer pair (fx, fy) after flow time t_max.

    Raises CornerHit when the trajectory aborts before reaching t_max.
    """
    state = make_state(table, position, theta)
    res = track(table, state, t_max)
    if res.aborted:
        raise CornerHit("trajectory aborted at a scatterer corner",
                        time_reached=res.clock)
    return (res.fx, res.fy)


def certify_sqrt2(table: TableParams, state: ParticleState, n_events: int,
                  mutate: bool = False) -> TrackResult:
    """Track until n_events reflections and report the counter deviation.

    The caller checks max_deviation <= sqrt(2).  A generous time cap keeps
    the run from spinning when reflections are sparse.
    """
    if n_events <= 0:
        raise DomainError("need a positive reflection count")
    t_cap = 4.0 * n_events + 1000.0
    return track(table, state, t_cap, max_events=n_events, mutate=mutate)
