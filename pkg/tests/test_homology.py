"""Intersection pairing, deck action, and the lattice counter classes."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from windtree.errors import DomainError
from windtree.homology import (GENERATORS, HomologyClass, character_component,
                               cocycle_F1, cocycle_F2, deck_action,
                               f_evaluation, holonomy, intersection_matrix,
                               leg_crossing, pairing)
from windtree.tables import TableParams

SQUARE = TableParams(0.5, 0.5)


def basis(j):
    return HomologyClass(tuple(Fraction(1 if i == j else 0)
                               for i in range(12)))


def test_generator_names_and_count():
    assert GENERATORS == ("h00", "h01", "h10", "h11",
                          "v00", "v01", "v10", "v11",
                          "cx0", "cx1", "c0x", "c1x")


def test_intersection_matrix_shape_rank_antisymmetry():
    m = np.array(intersection_matrix(SQUARE))
    assert m.shape == (12, 12)
    assert np.array_equal(m, -m.T)
    # rank 2g = 10: the twelve generators overcount a genus-5 group by two
    assert np.linalg.matrix_rank(m.astype(float)) == 10


def test_intersection_matrix_frozen_rows():
    m = np.array(intersection_matrix(SQUARE))
    assert m[0].tolist() == [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0]
    assert m[4].tolist() == [-1, 0, 0, 0, 0, 0, 0, 0, -1, 0, 0, 0]


def test_intersection_matrix_table_independent():
    m1 = np.array(intersection_matrix(SQUARE))
    m2 = np.array(intersection_matrix(TableParams(0.3, 0.62)))
    assert np.array_equal(m1, m2)


def test_pairing_of_transverse_loops():
    assert pairing(basis(0), basis(4), SQUARE) == 1


@settings(deadline=None, max_examples=30)
@given(st.lists(st.integers(-3, 3), min_size=12, max_size=12),
       st.lists(st.integers(-3, 3), min_size=12, max_size=12))
def test_pairing_antisymmetry(u, v):
    cu = HomologyClass(tuple(Fraction(c) for c in u))
    cv = HomologyClass(tuple(Fraction(c) for c in v))
    assert pairing(cu, cv, SQUARE) == -pairing(cv, cu, SQUARE)


def test_counter_classes():
    f1 = cocycle_F1()
    f2 = cocycle_F2()
    assert f1.coords == tuple(map(Fraction, (0, 0, 0, 0, 1, 1, -1, -1,
                                             0, 0, 0, 0)))
    assert f2.coords == tuple(map(Fraction, (1, -1, 1, -1, 0, 0, 0, 0,
                                             0, 0, 0, 0)))
    assert pairing(f1, f2, SQUARE) == 0
    assert holonomy(SQUARE, f1) == (0.0, 0.0)
    assert holonomy(SQUARE, f2) == (0.0, 0.0)


def test_counter_classes_live_in_single_characters():
    f1 = cocycle_F1()
    f2 = cocycle_F2()
    assert character_component(f1, 1).coords == f1.coords
    assert character_component(f2, 2).coords == f2.coords
    for char in (0, 2, 3):
        assert character_component(f1, char).is_zero()
    for char in (0, 1, 3):
        assert character_component(f2, char).is_zero()


def test_character_subspace_dimensions():
    ranks = []
    for char in range(4):
        rows = [[float(c) for c in character_component(basis(j), char).coords]
                for j in range(12)]
        ranks.append(int(np.linalg.matrix_rank(np.array(rows))))
    assert ranks == [4, 2, 2, 2]


def test_deck_action_is_involutive_and_preserves_pairing():
    # from_coords folds the corridor relations away, so coordinates compare
    # as classes rather than as raw generator vectors
    rng = np.random.default_rng(11)
    for _ in range(10):
        u = HomologyClass.from_coords(
            [int(c) for c in rng.integers(-3, 4, size=12)])
        v = HomologyClass.from_coords(
            [int(c) for c in rng.integers(-3, 4, size=12)])
        for g in range(4):
            gu = deck_action(g, u)
            assert deck_action(g, gu).coords == u.coords
            assert pairing(gu, deck_action(g, v), SQUARE) == pairing(u, v, SQUARE)


def test_generator_evaluations_and_holonomies():
    expected_eval = {
        "h00": (1, 0), "h01": (1, 0), "h10": (-1, 0), "h11": (-1, 0),
        "v00": (0, 1), "v01": (0, -1), "v10": (0, 1), "v11": (0, -1),
        "cx0": (0, 0), "cx1": (0, 0), "c0x": (0, 0), "c1x": (0, 0),
    }
    expected_hol = {
        "h00": (1, 0), "h01": (1, 0), "h10": (1, 0), "h11": (1, 0),
        "v00": (0, 1), "v01": (0, 1), "v10": (0, 1), "v11": (0, 1),
        "cx0": (1, 0), "cx1": (1, 0), "c0x": (0, 1), "c1x": (0, 1),
    }
    for j, name in enumerate(GENERATORS):
        ev = f_evaluation(basis(j), SQUARE)
        assert (int(ev[0]), int(ev[1])) == expected_eval[name]
        hx, hy = holonomy(SQUARE, basis(j))
        assert (hx, hy) == pytest.approx(expected_hol[name], abs=1e-12)


def test_leg_crossing_signs_and_graze_guard():
    seg = ("R00", 0.3, -0.5, 0.3, 0.5)  # vertical segment at x = 0.3
    assert leg_crossing(0.2, 0.0, 0.4, 0.1, seg) == 1
    assert leg_crossing(0.4, 0.1, 0.2, 0.0, seg) == -1
    assert leg_crossing(0.31, 0.0, 0.45, 0.1, seg) == 0
    with pytest.raises(DomainError):
        leg_crossing(0.2, 0.5, 0.4, 0.5, seg)
