"""Counter transport along flights and the displacement equivalence bound."""

import math

import numpy as np
import pytest

from windtree.billiard import advance, make_state, position_delta
from windtree.errors import CornerHit
from windtree.tables import TableParams
from windtree.tracking import SQRT2, certify_sqrt2, track, track_intersection

SQUARE = TableParams(0.5, 0.5)
START = (0.5, 0.0)


def test_counters_match_intersection_route():
    # two independent implementations of the same pair of counts
    theta = 0.9
    res = track(SQUARE, make_state(SQUARE, START, theta), 200.0)
    assert (res.fx, res.fy) == track_intersection(SQUARE, START, theta, 200.0)


def test_counters_track_lattice_displacement():
    theta = 0.7
    t = 500.0
    st0 = make_state(SQUARE, START, theta)
    res = track(SQUARE, st0, t)
    end = advance(SQUARE, st0, t)
    dx, dy = position_delta(end, st0)
    assert math.hypot(res.fx - dx, res.fy - dy) <= SQRT2


def test_certify_sqrt2_over_random_flights():
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 10:
        table = TableParams(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7))
        theta = rng.uniform(0.2, 1.3)
        state = make_state(table, START, theta)
        try:
            res = certify_sqrt2(table, state, 5000)
        except CornerHit:
            continue
        assert res.max_deviation <= SQRT2
        assert res.events == 5000 or res.aborted
        checked += 1


def test_certify_sqrt2_detects_mutated_counter():
    rng = np.random.default_rng(6)
    table = TableParams(rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7))
    theta = rng.uniform(0.2, 1.3)
    res = certify_sqrt2(table, make_state(table, START, theta), 5000,
                        mutate=True)
    assert res.max_deviation > SQRT2


def test_track_schedule_series_shape():
    sched = np.array([50.0, 100.0, 400.0])
    res = track(SQUARE, make_state(SQUARE, START, 0.9), 400.0, schedule=sched)
    assert res.times.shape == (3,)
    assert res.series.shape[0] == 3
    assert not res.aborted
