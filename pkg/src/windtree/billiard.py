"""Exact event-driven flow on the infinite periodic scatterer table.

Positions are stored as (integer cell, offset in [0,1)^2) so floating error
stays bounded as trajectories wander far from the origin, and the direction
is an immutable base angle plus a sign pair, so reflections are exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import CornerHit, DomainError
from .tables import TableParams

CORNER_TOL = kernels.CORNER_TOL


class EventKind(enum.Enum):
    VERTICAL_WALL = "VerticalWall"
    HORIZONTAL_WALL = "HorizontalWall"
    CORNER = "Corner"
    HORIZON = "HorizonReached"


@dataclass(frozen=True)
class ParticleState:
    """Flow state: position = cell + offset, direction = signed base angle.

    The base angle never changes; reflections only flip the signs, so the
    direction always lies in the four-element orbit of the initial one.
    """

    cell: tuple[int, int]
    offset: tuple[float, float]
    base_angle: float
    dir_signs: tuple[int, int] = (1, 1)
    clock: float = 0.0

    def __post_init__(self):
        u, v = self.offset
        if not (0.0 <= u < 1.0 and 0.0 <= v < 1.0):
            raise DomainError(f"offset {self.offset} outside [0,1)^2")
        if not (0.0 < self.base_angle < math.pi / 2.0 + 1e-15):
            raise DomainError(f"base angle {self.base_angle} outside (0, pi/2)")
        if self.dir_signs[0] not in (-1, 1) or self.dir_signs[1] not in (-1, 1):
            raise DomainError(f"direction signs must be +-1, got {self.dir_signs}")

    @property
    def position(self) -> tuple[float, float]:
        return (self.cell[0] + self.offset[0], self.cell[1] + self.offset[1])

    @property
    def direction(self) -> tuple[float, float]:
        return (
            self.dir_signs[0] * math.cos(self.base_angle),
            self.dir_signs[1] * math.sin(self.base_angle),
        )

    def reversed(self) -> "ParticleState":
        return replace(self, dir_signs=(-self.dir_signs[0], -self.dir_signs[1]))


@dataclass(frozen=True)
class CollisionEvent:
    """Flight time to the next event and what the ray meets there."""

    time: float
    kind: EventKind
    cell_hit: tuple[int, int] | None = None


def make_state(table: TableParams, position, angle: float,
               dir_signs=(1, 1), clock: float = 0.0) -> ParticleState:
    """Build a validated state from an absolute position."""
    x, y = float(position[0]), float(position[1])
    ci = math.floor(x)
    cj = math.floor(y)
    state = ParticleState(
        cell=(ci, cj),
        offset=(x - ci, y - cj),
        base_angle=float(angle),
        dir_signs=(int(dir_signs[0]), int(dir_signs[1])),
        clock=clock,
    )
    mx = round(x)
    my = round(y)
    if abs(x - mx) < table.a / 2.0 - 1e-12 and abs(y - my) < table.b / 2.0 - 1e-12:
        raise DomainError(f"start position {position} lies inside a scatterer")
    return state


def position_delta(s1: ParticleState, s0: ParticleState) -> tuple[float, float]:
    """Displacement s1 - s0, computed from the integer parts exactly."""
    return (
        (s1.cell[0] - s0.cell[0]) + (s1.offset[0] - s0.offset[0]),
        (s1.cell[1] - s0.cell[1]) + (s1.offset[1] - s0.offset[1]),
    )


def _unpack(table: TableParams, state: ParticleState):
    return (
        table.a,
        table.b,
        np.int64(state.cell[0]),
        np.int64(state.cell[1]),
        float(state.offset[0]),
        float(state.offset[1]),
        np.int64(state.dir_signs[0]),
        np.int64(state.dir_signs[1]),
        math.cos(state.base_angle),
        math.sin(state.base_angle),
    )


def next_event(table: TableParams, state: ParticleState, horizon: float) -> CollisionEvent:
    """Earliest scatterer-wall intersection of the forward ray.

    Follows the ray through as many cells as needed.  Raises CornerHit when
    the ray passes a scatterer corner within the corner tolerance; returns a
    HorizonReached event if the flight time exceeds `horizon`.
    """
    if horizon <= 0.0:
        raise DomainError("horizon must be positive")
    a, b, ci, cj, u, v, sx, sy, ax, ay = _unpack(table, state)
    a2 = a / 2.0
    b2 = b / 2.0
    elapsed = 0.0
    while elapsed < horizon:
        kind, t, u2, v2, _clr = kernels._next_leg(a2, b2, u, v, sx, sy, ax, ay, CORNER_TOL)
        if elapsed + t > horizon and kind != kernels._CORNER:
            return CollisionEvent(time=horizon, kind=EventKind.HORIZON)
        if kind == kernels._CORNER:
            raise CornerHit(
                f"ray meets a scatterer corner after time {elapsed + t:.6g}",
                time_reached=elapsed + t,
            )
        if kind == kernels._VWALL:
            hit_i = ci + 1 if sx > 0 else ci
            hit_j = cj + 1 if v2 > 0.5 else cj
            return CollisionEvent(
                time=elapsed + t,
                kind=EventKind.VERTICAL_WALL,
                cell_hit=(int(hit_i), int(hit_j)),
            )
        if kind == kernels._HWALL:
            hit_j = cj + 1 if sy > 0 else cj
            hit_i = ci + 1 if u2 > 0.5 else ci
            return CollisionEvent(
                time=elapsed + t,
                kind=EventKind.HORIZONTAL_WALL,
                cell_hit=(int(hit_i), int(hit_j)),
            )
        # plain cell crossing: wrap with the direction signs, exactly as the
        # compiled loop does (the exit coordinate is snapped to 0.0 or 1.0,
        # so a floor-based wrap would pin a leftward or downward ray on the
        # cell edge forever)
        elapsed += t
        if kind == kernels._EXIT_X:
            ci += 1 if sx > 0 else -1
            u = 0.0 if sx > 0 else 1.0
            v = v2
        else:
            cj += 1 if sy > 0 else -1
            v = 0.0 if sy > 0 else 1.0
            u = u2
            if u >= 1.0:  # diagonal co-exit through a cell corner
                ci += 1
                u -= 1.0
            elif u <= 0.0 and sx < 0:
                ci -= 1
                u += 1.0
    return CollisionEvent(time=horizon, kind=EventKind.HORIZON)


def reflect(state: ParticleState, event: CollisionEvent) -> ParticleState:
    """Advance to the wall and flip the matching direction sign."""
    if event.kind not in (EventKind.VERTICAL_WALL, EventKind.HORIZONTAL_WALL):
        raise DomainError(f"cannot reflect at event of kind {event.kind}")
    dx = state.dir_signs[0] * math.cos(state.base_angle)
    dy = state.dir_signs[1] * math.sin(state.base_angle)
    x = state.cell[0] + state.offset[0] + dx * event.time
    y = state.cell[1] + state.offset[1] + dy * event.time
    sx, sy = state.dir_signs
    if event.kind is EventKind.VERTICAL_WALL:
        sx = -sx
    else:
        sy = -sy
    ci = math.floor(x)
    cj = math.floor(y)
    return ParticleState(
        cell=(int(ci), int(cj)),
        offset=(x - ci, y - cj),
        base_angle=state.base_angle,
        dir_signs=(sx, sy),
        clock=state.clock + event.time,
    )


def advance(table: TableParams, state: ParticleState, t: float) -> ParticleState:
    """Flow the state for time t through the event loop."""
    if t < 0.0:
        raise DomainError("advance time must be nonnegative")
    if t == 0.0:
        return state
    a, b, ci, cj, u, v, sx, sy, ax, ay = _unpack(table, state)
    status, ci, cj, u, v, sx, sy, clock, _events, _clr = kernels.advance_state(
        a, b, ci, cj, u, v, sx, sy, ax, ay, 0.0, t, CORNER_TOL
    )
    if status == kernels.STATUS_CORNER:
        raise CornerHit(
            f"trajectory met a scatterer corner at time {state.clock + clock:.6g}",
            time_reached=state.clock + clock,
        )
    return ParticleState(
        cell=(int(ci), int(cj)),
        offset=(float(u), float(v)),
        base_angle=state.base_angle,
        dir_signs=(int(sx), int(sy)),
        clock=state.clock + t,
    )


def count_events(table: TableParams, state: ParticleState, t: float) -> int:
    """Number of wall reflections in flow time t."""
    args = _unpack(table, state)
    status, *_rest, events, _clr = kernels.advance_state(*args, 0.0, t, CORNER_TOL)
    if status == kernels.STATUS_CORNER:
        raise CornerHit("trajectory met a scatterer corner", time_reached=t)
    return int(events)


@dataclass(frozen=True)
class SeriesResult:
    """Displacement samples along one trajectory."""

    times: np.ndarray
    distances: np.ndarray
    running_max: np.ndarray
    events: int
    aborted: bool
    clearance: float

    def __len__(self):
        return len(self.times)


def displacement_series(table: TableParams, state: ParticleState, schedule) -> SeriesResult:
    """Distance from the start sampled at the given increasing times.

    On a corner hit the series is truncated at the samples already taken
    and flagged as aborted.
    """
    sched = np.asarray(schedule, dtype=np.float64)
    if sched.ndim != 1 or len(sched) == 0:
        raise DomainError("schedule must be a nonempty 1-d sequence")
    if np.any(np.diff(sched) <= 0.0) or sched[0] <= 0.0:
        raise DomainError("schedule must be strictly increasing and positive")
    out = np.empty(len(sched), dtype=np.float64)
    args = _unpack(table, state)
    status, filled, events, clearance, *_rest = kernels.displacement_series(
        *args, sched, out, CORNER_TOL
    )
    aborted = status == kernels.STATUS_CORNER
    times = sched[:filled]
    dist = out[:filled]
    running = np.maximum.accumulate(dist) if filled else dist
    return SeriesResult(
        times=times,
        distances=dist,
        running_max=running,
        events=int(events),
        aborted=aborted,
        clearance=float(clearance),
    )


def oracle_raymarch(table: TableParams, p, theta: float, t_total: float,
                    step: float) -> tuple[float, float]:
    """Reference position after time t_total by naive fixed-step marching.

    `p` may be a ParticleState or an absolute (x, y) pair.  Independent of
    the event loop; used as a differential oracle.
    """
    half_corridors = table.corridor_half_widths
    if step >= min(half_corridors) / 10.0:
        raise DomainError("oracle step must be far below the corridor width")
    if isinstance(p, ParticleState):
        x, y = p.position
        sx, sy = p.dir_signs
    else:
        x, y = float(p[0]), float(p[1])
        sx, sy = 1, 1
    x2, y2, _sx, _sy = kernels.raymarch(
        table.a, table.b, x, y, np.int64(sx), np.int64(sy),
        math.cos(theta), math.sin(theta), float(t_total), float(step)
    )
    return float(x2), float(y2)
