"""First-return exchanges, induction steps, and their cross-validation."""

import numpy as np
import pytest

from windtree.errors import DomainError, TieBreak
from windtree.homology import generator_segments
from windtree.iet import (LabeledIET, cocycle_product, first_return_iet,
                          main_transversal, rauzy_step, torus_transversal,
                          zorich_step)
from windtree.surface import build_lshape, build_surface_X, build_torus
from windtree.tables import TableParams

SQUARE = TableParams(0.5, 0.5)
THETA = 0.6154797086703873


def toy_exchange(lengths):
    lam = np.array(lengths, dtype=float)
    d = len(lengths)
    return LabeledIET(lam=lam, top=list(range(d)), bot=list(reversed(range(d))),
                      lab=np.zeros(d, dtype=np.int64), fvec=None)


def test_torus_first_return_has_two_intervals():
    torus = build_torus()
    r = first_return_iet(torus, THETA, torus_transversal(torus))
    assert r.iet.d == 2
    assert r.iet.lam.tolist() == pytest.approx(
        [0.5857864376269049, 0.41421356237309515], abs=1e-12)


def test_quotient_first_return_frozen():
    surf = build_lshape(SQUARE)
    r = first_return_iet(surf, THETA, main_transversal(surf, SQUARE))
    iet = r.iet
    assert iet.d == 4
    assert iet.lam.tolist() == pytest.approx(
        [0.08578643762690485, 0.0857864376269048,
         0.12132034355964277, 0.20710678118654757], abs=1e-12)
    assert list(iet.bot) == [2, 0, 3, 1]
    assert [int(v) for v in iet.lab] == [2, 1, 0, 1]
    assert r.area_error < 1e-12


def test_four_sheet_first_return_with_counters():
    x = build_surface_X(SQUARE)
    r = first_return_iet(x, THETA, main_transversal(x, SQUARE),
                         curves=generator_segments(SQUARE))
    iet = r.iet
    assert iet.d == 13  # 2*genus + cones - 1 on the four-sheet surface
    assert list(iet.bot) == [6, 4, 3, 2, 1, 7, 12, 5, 11, 10, 9, 8, 0]
    # return loops close up on the base sheet, so deck products are trivial
    assert all(int(v) == 0 for v in iet.lab)
    assert iet.fvec.tolist() == [
        [-9, -15], [-9, -27], [2, -16], [5, -5], [4, -1], [1, 2], [2, 1],
        [-8, -14], [-19, -21], [-15, -6], [-7, 2], [-3, 3], [0, 2]]


def test_interval_count_matches_genus_formula():
    # d = 2g + (cones + marked) - 1 for a cone-to-cone section
    torus = build_torus()
    assert first_return_iet(torus, 0.83, torus_transversal(torus)).iet.d == 2
    surf = build_lshape(SQUARE)
    assert first_return_iet(surf, 0.83,
                            main_transversal(surf, SQUARE)).iet.d == 4


def test_near_endpoint_vertex_instance_regression():
    # a quantized vertex coordinate once made this direction's trace cross
    # the section at its own origin and drop the true landing
    table = TableParams(0.540150103327619, 0.4584464872941114)
    theta = 0.14777081948250698
    surf = build_lshape(table)
    trans = main_transversal(surf, table)
    r = first_return_iet(surf, theta, trans)
    assert r.iet.d == 4
    assert float(np.sum(r.iet.lam)) == pytest.approx(1.0 - table.a, abs=1e-12)
    assert min(float(v) for v in r.iet.lam) > 1e-6
    assert list(r.landings) == pytest.approx(
        [0.1836374753630624, 0.22482971363262932, 0.36189378934534067],
        abs=1e-9)


def test_rauzy_step_lengths_and_matrix():
    iet = toy_exchange([0.7, 0.3])
    nxt, rec = rauzy_step(iet)
    assert nxt.lam.tolist() == pytest.approx([0.4, 0.3], abs=1e-15)
    # bot ends in symbol 0, the longer interval, so the bottom row wins
    assert rec.kind == "bottom"
    assert rec.winner == 0 and rec.loser == 1
    assert rec.matrix(0).tolist() == [[1, 0], [1, 1]]


def test_rauzy_tie_raises():
    with pytest.raises(TieBreak):
        rauzy_step(toy_exchange([0.5, 0.5]))


def test_normalization_preserves_proportions():
    iet = toy_exchange([0.7, 0.3])
    nxt, _ = rauzy_step(iet)
    norm = nxt.normalized()
    assert float(np.sum(norm.lam)) == pytest.approx(1.0, abs=1e-15)
    assert norm.lam[0] / norm.lam[1] == pytest.approx(
        float(nxt.lam[0] / nxt.lam[1]), rel=1e-14)


def test_step_matrices_are_unimodular():
    surf = build_lshape(SQUARE)
    iet = first_return_iet(surf, THETA, main_transversal(surf, SQUARE)).iet
    for _ in range(50):
        iet, rec = rauzy_step(iet)
        for char in range(4):
            det = round(float(np.linalg.det(rec.matrix(char))))
            assert det in (-1, 1)
        iet = iet.normalized()


def test_induction_matches_sub_range_first_return():
    # dual route: abstract induction versus the geometric return map on the
    # shortened section, compared in position order
    surf = build_lshape(SQUARE)
    trans = main_transversal(surf, SQUARE)
    cur = first_return_iet(surf, THETA, trans).iet
    for _ in range(10):
        cur, _rec = rauzy_step(cur)
        sub = first_return_iet(surf, THETA, trans,
                               s_range=float(np.sum(cur.lam))).iet
        pos_lam = [float(cur.lam[s]) for s in cur.top]
        pos_lab = [int(cur.lab[s]) for s in cur.top]
        sym_at = {s: i for i, s in enumerate(cur.top)}
        pos_bot = [sym_at[s] for s in cur.bot]
        assert pos_lam == pytest.approx(list(sub.lam), abs=1e-10)
        assert pos_bot == list(sub.bot)
        assert pos_lab == [int(v) for v in sub.lab]


def test_zorich_step_groups_equal_kind_runs():
    surf = build_lshape(SQUARE)
    iet = first_return_iet(surf, THETA, main_transversal(surf, SQUARE)).iet
    z, zrec = zorich_step(iet)
    assert zrec.run == len(zrec.records)
    assert all(r.kind == zrec.kind for r in zrec.records)
    cur = iet
    for _ in range(zrec.run):
        cur, _ = rauzy_step(cur)
    assert np.allclose(z.lam, cur.lam)
    assert 0.0 < zrec.shrink < 1.0
    assert zrec.dt == pytest.approx(-np.log(zrec.shrink), abs=1e-15)


def test_cocycle_product_composes_step_matrices():
    surf = build_lshape(SQUARE)
    iet = first_return_iet(surf, THETA, main_transversal(surf, SQUARE)).iet
    _z, zrec = zorich_step(iet)
    prod = cocycle_product(zrec.records, char=0)
    manual = np.eye(iet.d, dtype=np.int64)
    for rec in zrec.records:
        manual = rec.matrix(0) @ manual
    assert np.array_equal(prod, manual)
    assert round(float(np.linalg.det(prod))) in (-1, 1)
    with pytest.raises(DomainError):
        cocycle_product(())
