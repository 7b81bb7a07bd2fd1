"""Glued-rectangle surfaces: invariants of the unfolding and its quotients."""

import numpy as np
import pytest

from windtree.surface import (build_lshape, build_surface, build_surface_X,
                              build_torus)
from windtree.tables import TableParams

TABLES = [
    TableParams(0.5, 0.5),
    TableParams(0.540150103327619, 0.4584464872941114),
    TableParams(0.25, 0.66),
    TableParams(0.17157287525380982, 0.17157287525380982),
]


def test_torus_fixture_is_flat():
    torus = build_torus()
    assert torus.genus == 1
    assert torus.cone_points() == []
    assert torus.euler_characteristic == 0


@pytest.mark.parametrize("table", TABLES)
def test_four_sheet_surface_invariants(table):
    x = build_surface_X(table)
    assert x.genus == 5
    assert x.stratum_signature() == (2, 2, 2, 2)
    cones = sorted(u for u, _m in x.cone_points())
    assert cones == [12, 12, 12, 12]  # four cones of angle 6*pi
    v, e, f = x.counts
    assert v - e + f == 2 - 2 * x.genus


@pytest.mark.parametrize("table", TABLES)
def test_index_two_quotients(table):
    for g in (1, 2, 3):
        q = build_surface(table, subgroup=(0, g))
        assert q.genus == 3
        assert q.stratum_signature() == (2, 2)


@pytest.mark.parametrize("table", TABLES)
def test_full_quotient(table):
    l = build_lshape(table)
    assert l.genus == 2
    assert l.stratum_signature() == (2,)
    cones = [u for u, _m in l.cone_points()]
    assert cones == [12]


@pytest.mark.parametrize("table", TABLES)
def test_areas_scale_with_sheet_count(table):
    unit = 1.0 - table.a * table.b
    assert build_lshape(table).area == pytest.approx(unit, rel=1e-12)
    assert build_surface_X(table).area == pytest.approx(4 * unit, rel=1e-12)
    for g in (1, 2, 3):
        q = build_surface(table, subgroup=(0, g))
        assert q.area == pytest.approx(2 * unit, rel=1e-12)


def test_trivial_subgroup_gives_full_surface():
    table = TableParams(0.5, 0.5)
    x = build_surface(table, subgroup=(0,))
    ref = build_surface_X(table)
    assert x.genus == ref.genus
    assert x.stratum_signature() == ref.stratum_signature()
