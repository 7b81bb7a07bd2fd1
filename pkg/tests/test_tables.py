"""Parameter validation and the lattice-scatterer table constructors."""

import pytest

from windtree.errors import DomainError, NotSquareFree
from windtree.tables import TableParams, make_table, veech_params


def test_valid_table():
    t = TableParams(0.5, 0.5)
    assert t.a == 0.5 and t.b == 0.5


@pytest.mark.parametrize("a,b", [
    (0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.1, 0.5), (0.5, 1.2),
])
def test_rejects_out_of_range_sides(a, b):
    with pytest.raises(DomainError):
        TableParams(a, b)


def test_make_table_matches_dataclass():
    assert make_table(0.3, 0.4) == TableParams(0.3, 0.4)


def test_veech_parameters_square_discriminant_two():
    t = veech_params(0.5, 0.5, 2)
    assert t.a == t.b
    assert t.a == pytest.approx(0.17157287525380982, abs=1e-15)


@pytest.mark.parametrize("D", [4, 8, 9, 0, -2, 12])
def test_veech_rejects_non_square_free(D):
    with pytest.raises(NotSquareFree):
        veech_params(0.5, 0.5, D)
