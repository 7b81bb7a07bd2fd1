"""Table parameters for the periodic wind-tree billiard.

The plane carries one rectangular scatterer per integer lattice point; the
scatterer at (i, j) occupies [i - a/2, i + a/2] x [j - b/2, j + b/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, NotSquareFree


@dataclass(frozen=True)
class TableParams:
    """Validated scatterer dimensions.

    a: scatterer width, in (0, 1).
    b: scatterer height, in (0, 1).
    """

    a: float
    b: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0) or not (0.0 < self.b < 1.0):
            raise DomainError(
                f"scatterer dimensions must lie in (0,1), got a={self.a}, b={self.b}"
            )

    @property
    def corridor_half_widths(self) -> tuple[float, float]:
        """Half-widths of the free corridors between scatterer columns/rows."""
        return (1.0 - self.a) / 2.0, (1.0 - self.b) / 2.0

    @property
    def cell_free_area(self) -> float:
        """Free area per unit cell."""
        return 1.0 - self.a * self.b


def make_table(a: float, b: float) -> TableParams:
    """Validate (a, b) and return table parameters.

    Raises DomainError unless both lie strictly inside (0, 1).
    """
    return TableParams(float(a), float(b))


def _is_square_free(n: int) -> bool:
    if n <= 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def veech_params(x, y, D: int) -> TableParams:
    """Table parameters of a lattice (Veech) example from quadratic data.

    Solves 1/(1-a) = x + y*sqrt(D) and 1/(1-b) = (1-x) + y*sqrt(D) for
    rational x, y and a positive square-free integer D.  For
    (x, y, D) = (1/2, 1/2, 2) this gives a = b = 3 - 2*sqrt(2).
    """
    if not _is_square_free(int(D)):
        raise NotSquareFree(f"D={D} is not a positive square-free integer")
    x = Fraction(x)
    y = Fraction(y)
    sd = math.sqrt(int(D))
    ra = float(x) + float(y) * sd
    rb = float(1 - x) + float(y) * sd
    if ra <= 1.0 or rb <= 1.0:
        raise DomainError(
            f"quadratic data (x={x}, y={y}, D={D}) does not give a, b in (0,1)"
        )
    return make_table(1.0 - 1.0 / ra, 1.0 - 1.0 / rb)
