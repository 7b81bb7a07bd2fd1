"""First homology of the four-sheet surface, with exact arithmetic.

Twelve generating loops are carried as explicit polylines on the rectangle
complex: a horizontal and a vertical circle on each sheet, plus two
horizontal and two vertical corridor loops threading the scatterer walls.
Intersection numbers are counted from transversal crossings of the
representatives, classes live in Fraction coordinates, and the Klein deck
group acts by permuting generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError
from .surface import CHARACTERS, GROUP, character_value
from .tables import TableParams

GENERATORS = (
    "h00", "h01", "h10", "h11",
    "v00", "v01", "v10", "v11",
    "cx0", "cx1", "c0x", "c1x",
)
_IDX = {name: i for i, name in enumerate(GENERATORS)}
_SHEETS = ("00", "10", "01", "11")  # name suffix for kappa = 0,1,2,3


def _sheet_suffix(kappa: int) -> str:
    return f"{kappa & 1}{(kappa >> 1) & 1}"


# relation vectors: both corridor pairs differ by an alternating sum of the
# circles on the sheets they thread
def _relation_cx() -> tuple:
    vec = [Fraction(0)] * 12
    vec[_IDX["cx0"]] = Fraction(1)
    vec[_IDX["cx1"]] = Fraction(-1)
    for kappa in GROUP:
        s = 1 if character_value(2, kappa) > 0 else -1
        vec[_IDX["h" + _sheet_suffix(kappa)]] -= Fraction(s)
    return tuple(vec)


def _relation_cv() -> tuple:
    vec = [Fraction(0)] * 12
    vec[_IDX["c0x"]] = Fraction(1)
    vec[_IDX["c1x"]] = Fraction(-1)
    for kappa in GROUP:
        s = 1 if character_value(1, kappa) > 0 else -1
        vec[_IDX["v" + _sheet_suffix(kappa)]] -= Fraction(s)
    return tuple(vec)


RELATIONS = (_relation_cx(), _relation_cv())


@dataclass(frozen=True)
class HomologyClass:
    """Element of H1 in canonical coordinates over the 12 generators.

    Canonical means the cx1 and c1x coordinates are folded away using the
    two corridor relations, so equality of coordinates is equality in H1.
    """

    coords: tuple

    @staticmethod
    def zero() -> "HomologyClass":
        return HomologyClass(tuple(Fraction(0) for _ in range(12)))

    @staticmethod
    def generator(name: str) -> "HomologyClass":
        if name not in _IDX:
            raise DomainError(f"unknown generator {name}")
        vec = [Fraction(0)] * 12
        vec[_IDX[name]] = Fraction(1)
        return HomologyClass._canonical(vec)

    @staticmethod
    def from_coords(coords) -> "HomologyClass":
        vec = [Fraction(c) for c in coords]
        if len(vec) != 12:
            raise DomainError("need 12 coordinates")
        return HomologyClass._canonical(vec)

    @staticmethod
    def _canonical(vec) -> "HomologyClass":
        vec = [Fraction(c) for c in vec]
        for rel, slot in ((RELATIONS[0], _IDX["cx1"]), (RELATIONS[1], _IDX["c1x"])):
            t = vec[slot]
            if t:
                # rel says slot = (rest of rel); substitute it away
                coef = rel[slot]
                for i in range(12):
                    if i != slot:
                        vec[i] += t * rel[i] / (-coef)
                vec[slot] = Fraction(0)
        return HomologyClass(tuple(vec))

    def __add__(self, other):
        return HomologyClass(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return HomologyClass(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, s):
        s = Fraction(s)
        return HomologyClass(tuple(s * a for a in self.coords))

    def __neg__(self):
        return HomologyClass(tuple(-a for a in self.coords))

    def is_zero(self):
        return all(c == 0 for c in self.coords)


# -- representatives --------------------------------------------------------

# interior fractions keeping the four sheets' circles at distinct heights
_FRACS = (0.34, 0.44, 0.56, 0.66)


def generator_segments(table: TableParams):
    """Directed polyline segments of each generator on the rect complex.

    Returns {name: [(rect, x0, y0, x1, y1), ...]} with each segment inside
    one rectangle and consecutive segments glued.
    """
    a2 = table.a / 2.0
    b2 = table.b / 2.0
    segs = {}
    for kappa in GROUP:
        s = _sheet_suffix(kappa)
        yh = b2 + (0.5 - b2) * _FRACS[kappa]
        segs["h" + s] = [
            (f"R{s}", a2, yh, 0.5, yh),
            (f"L{s}", -0.5, yh, -a2, yh),
            (f"T{s}", -a2, yh, a2, yh),
        ]
        xv = a2 + (0.5 - a2) * _FRACS[kappa]
        segs["v" + s] = [(f"R{s}", xv, -0.5, xv, 0.5)]
    yc = -table.b / 6.0
    xc = -table.a / 6.0
    for eps2, name in ((0, "cx0"), (1, "cx1")):
        path = []
        for eps1 in (0, 1):
            sheet = _sheet_suffix(eps1 | (eps2 << 1))
            path.append((f"R{sheet}", a2, yc, 0.5, yc))
            path.append((f"L{sheet}", -0.5, yc, -a2, yc))
        segs[name] = path
    for eps1, name in ((0, "c0x"), (1, "c1x")):
        path = []
        for eps2 in (0, 1):
            sheet = _sheet_suffix(eps1 | (eps2 << 1))
            path.append((f"T{sheet}", xc, b2, xc, 0.5))
            path.append((f"B{sheet}", xc, -0.5, xc, -b2))
        segs[name] = path
    return segs


def leg_crossing(px, py, qx, qy, seg, tol=1e-10) -> int:
    """Signed crossing of directed leg p->q with an axis-parallel segment.

    Both must lie in the same rectangle chart.  Sign is the orientation of
    (leg direction, segment direction).  Returns 0 for no crossing; raises
    DomainError when the leg passes within tol of a segment endpoint, since
    the count would not be stable there.
    """
    _rect, sx0, sy0, sx1, sy1 = seg
    dx, dy = qx - px, qy - py
    if abs(sy1 - sy0) < 1e-15:  # horizontal segment
        y = sy0
        if (py - y) * (qy - y) >= 0.0 or abs(dy) < 1e-300:
            return 0
        t = (y - py) / dy
        x = px + t * dx
        lo, hi = min(sx0, sx1), max(sx0, sx1)
        if x <= lo - tol or x >= hi + tol:
            return 0
        if x < lo + tol or x > hi - tol:
            raise DomainError("leg grazes a representative endpoint")
        ex = sx1 - sx0
        det = -dy * ex
    else:  # vertical segment
        x = sx0
        if (px - x) * (qx - x) >= 0.0 or abs(dx) < 1e-300:
            return 0
        t = (x - px) / dx
        y = py + t * dy
        lo, hi = min(sy0, sy1), max(sy0, sy1)
        if y <= lo - tol or y >= hi + tol:
            return 0
        if y < lo + tol or y > hi - tol:
            raise DomainError("leg grazes a representative endpoint")
        ey = sy1 - sy0
        det = dx * ey
    if det > 0:
        return 1
    if det < 0:
        return -1
    return 0


def _polyline_intersection(segs_a, segs_b) -> int:
    total = 0
    for sa in segs_a:
        for sb in segs_b:
            if sa[0] != sb[0]:
                continue
            total += leg_crossing(sa[1], sa[2], sa[3], sa[4], sb)
    return total


def intersection_matrix(table: TableParams):
    """12x12 matrix of signed crossing counts between the representatives."""
    segs = generator_segments(table)
    n = len(GENERATORS)
    mat = [[0] * n for _ in range(n)]
    for i, gi in enumerate(GENERATORS):
        for j, gj in enumerate(GENERATORS):
            if i == j:
                continue
            mat[i][j] = _polyline_intersection(segs[gi], segs[gj])
    return mat


_CACHED_MATRIX = {}


def _matrix_for(table: TableParams):
    key = (table.a, table.b)
    if key not in _CACHED_MATRIX:
        _CACHED_MATRIX[key] = intersection_matrix(table)
    return _CACHED_MATRIX[key]


def pairing(c1: HomologyClass, c2: HomologyClass, table: TableParams) -> Fraction:
    """Algebraic intersection number of two classes."""
    mat = _matrix_for(table)
    total = Fraction(0)
    for i, a in enumerate(c1.coords):
        if not a:
            continue
        for j, b in enumerate(c2.coords):
            if b:
                total += a * b * mat[i][j]
    return total


def holonomy(table: TableParams, cls: HomologyClass) -> tuple:
    """Translation holonomy of a class, from the generator holonomies."""
    w = 1.0 - table.a
    h = 1.0 - table.b
    base = {
        "h00": (1.0, 0.0), "h01": (1.0, 0.0), "h10": (1.0, 0.0), "h11": (1.0, 0.0),
        "v00": (0.0, 1.0), "v01": (0.0, 1.0), "v10": (0.0, 1.0), "v11": (0.0, 1.0),
        "cx0": (2.0 * w, 0.0), "cx1": (2.0 * w, 0.0),
        "c0x": (0.0, 2.0 * h), "c1x": (0.0, 2.0 * h),
    }
    hx = hy = 0.0
    for name, c in zip(GENERATORS, cls.coords):
        bx, by = base[name]
        hx += float(c) * bx
        hy += float(c) * by
    return (hx, hy)


# -- deck action and characters --------------------------------------------


def deck_action(g: int, cls: HomologyClass) -> HomologyClass:
    """Push a class forward by a deck transformation."""
    if g not in GROUP:
        raise DomainError(f"unknown deck element {g}")
    vec = [Fraction(0)] * 12
    for name, c in zip(GENERATORS, cls.coords):
        if not c:
            continue
        if name[0] in "hv":
            kappa = int(name[1]) | (int(name[2]) << 1)
            target = name[0] + _sheet_suffix(kappa ^ g)
        elif name in ("cx0", "cx1"):
            eps2 = int(name[2])
            target = f"cx{eps2 ^ ((g >> 1) & 1)}"
        else:  # c0x / c1x
            eps1 = int(name[1])
            target = f"c{eps1 ^ (g & 1)}x"
        vec[_IDX[target]] += c
    return HomologyClass._canonical(vec)


def character_component(cls: HomologyClass, char: int) -> HomologyClass:
    """Isotypic projection (1/4) sum_g chi(g) g_* applied to the class."""
    if char not in CHARACTERS:
        raise DomainError(f"unknown character {char}")
    acc = HomologyClass.zero()
    for g in GROUP:
        acc = acc + Fraction(character_value(char, g)) * deck_action(g, cls)
    return Fraction(1, 4) * acc


def cocycle_F1() -> HomologyClass:
    """Vertical-circle combination whose pairing gives the first counter."""
    vec = [Fraction(0)] * 12
    for kappa in GROUP:
        s = 1 if character_value(1, kappa) > 0 else -1
        vec[_IDX["v" + _sheet_suffix(kappa)]] = Fraction(s)
    return HomologyClass._canonical(vec)


def cocycle_F2() -> HomologyClass:
    """Horizontal-circle combination for the second counter."""
    vec = [Fraction(0)] * 12
    for kappa in GROUP:
        s = 1 if character_value(2, kappa) > 0 else -1
        vec[_IDX["h" + _sheet_suffix(kappa)]] = Fraction(s)
    return HomologyClass._canonical(vec)


def f_evaluation(cls: HomologyClass, table: TableParams) -> tuple:
    """Integer pair tracked by the lattice-crossing counters."""
    f1 = pairing(cls, cocycle_F1(), table)
    f2 = pairing(cls, cocycle_F2(), table)
    return (f1, -f2)
