"""Flat polygonal surfaces glued from axis-parallel rectangles.

The main builder assembles the four-sheeted translation surface obtained by
unfolding one scatterer cell, with the four direction sheets indexed by a
Klein four-group of sign flips.  Gluings carry deck markers in that group so
first-return maps can accumulate monodromy.  Quotients by subgroups give the
intermediate surfaces, down to the one-sheet quotient.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass

from .errors import DomainError, GluingError
from .tables import TableParams

# Klein four-group as 2-bit integers: bit 0 flips the x-direction sheet,
# bit 1 flips the y-direction sheet.
GROUP = (0, 1, 2, 3)
GROUP_NAMES = {0: "e", 1: "v", 2: "h", 3: "vh"}

# characters chi[c][g] = (-1)^popcount(c & g); c = 0 trivial
CHARACTERS = (0, 1, 2, 3)


def character_value(char: int, g: int) -> int:
    return -1 if bin(char & g).count("1") % 2 else 1


def character_name(char: int) -> str:
    sv = "+" if character_value(char, 1) > 0 else "-"
    sh = "+" if character_value(char, 2) > 0 else "-"
    return sv + sh


_OPPOSITE = {"L": "R", "R": "L", "B": "T", "T": "B"}
_VERTICAL_SIDES = ("L", "R")


@dataclass(frozen=True)
class Rect:
    """Axis-parallel rectangle, one face of the complex."""

    name: str
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise DomainError(f"degenerate rectangle {self.name}")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def area(self):
        return self.width * self.height

    def side_range(self, side: str):
        """Parameter interval of a side (x-range for B/T, y-range for L/R)."""
        if side in _VERTICAL_SIDES:
            return (self.y0, self.y1)
        return (self.x0, self.x1)

    def side_coord(self, side: str) -> float:
        """Fixed coordinate of a side."""
        return {"L": self.x0, "R": self.x1, "B": self.y0, "T": self.y1}[side]

    def contains(self, x, y, tol=1e-12):
        return (self.x0 - tol <= x <= self.x1 + tol
                and self.y0 - tol <= y <= self.y1 + tol)


@dataclass(frozen=True)
class Seg:
    """One glued boundary segment: side of a rect plus a parameter range."""

    rect: str
    side: str
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise GluingError(f"empty segment on {self.rect}.{self.side}")

    @property
    def length(self):
        return self.hi - self.lo

    def endpoints(self, rects):
        r = rects[self.rect]
        c = r.side_coord(self.side)
        if self.side in _VERTICAL_SIDES:
            return ((c, self.lo), (c, self.hi))
        return ((self.lo, c), (self.hi, c))


@dataclass(frozen=True)
class Gluing:
    """Identification of two boundary segments by translation.

    The parameterizations are matched lo-to-lo (orientation preserved).
    `deck` is the Klein marker picked up when a path crosses from a to b
    (markers are involutions, so the reverse crossing uses the same one).
    """

    a: Seg
    b: Seg
    deck: int = 0


_QUANT = 9  # decimals for identifying boundary points


def _key(rect: str, x: float, y: float):
    return (rect, round(x + 0.0, _QUANT), round(y + 0.0, _QUANT))


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            p = self.parent[p]
        while self.parent[x] != p:
            self.parent[x], x = p, self.parent[x]
        return p

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry


class PolygonalSurface:
    """A translation surface presented as glued rectangles.

    Validates the gluing data on construction (full boundary coverage,
    matching segment lengths, opposite-facing sides), then computes the
    vertex classes and their cone angles exactly in units of pi/2.
    """

    def __init__(self, rects, gluings, marked=(), deck_group=GROUP):
        self.rects = {r.name: r for r in rects}
        if len(self.rects) != len(rects):
            raise GluingError("duplicate rectangle names")
        self.gluings = list(gluings)
        self.deck_group = tuple(deck_group)
        self._validate()
        self._side_map = self._build_side_map()
        self._classes = self._vertex_classes()
        self.marked = self._resolve_marked(marked)

    # -- validation ---------------------------------------------------------

    def _validate(self):
        per_side = {}
        for gi, g in enumerate(self.gluings):
            if _OPPOSITE[g.a.side] != g.b.side:
                raise GluingError(
                    f"gluing {gi}: sides {g.a.side}/{g.b.side} do not face each other")
            if abs(g.a.length - g.b.length) > 1e-9:
                raise GluingError(f"gluing {gi}: segment lengths differ")
            if g.deck not in self.deck_group:
                raise GluingError(f"gluing {gi}: deck marker {g.deck} not in group")
            for seg in (g.a, g.b):
                if seg.rect not in self.rects:
                    raise GluingError(f"gluing {gi}: unknown rect {seg.rect}")
                lo, hi = self.rects[seg.rect].side_range(seg.side)
                if seg.lo < lo - 1e-9 or seg.hi > hi + 1e-9:
                    raise GluingError(
                        f"gluing {gi}: segment outside side {seg.rect}.{seg.side}")
                per_side.setdefault((seg.rect, seg.side), []).append((seg.lo, seg.hi))
        for name, r in self.rects.items():
            for side in "LRBT":
                segs = sorted(per_side.get((name, side), []))
                lo, hi = r.side_range(side)
                cur = lo
                for s0, s1 in segs:
                    if abs(s0 - cur) > 1e-9:
                        raise GluingError(f"side {name}.{side} not fully glued near {cur}")
                    cur = s1
                if abs(cur - hi) > 1e-9:
                    raise GluingError(f"side {name}.{side} not fully glued near {cur}")

    def _build_side_map(self):
        """(rect, side) -> sorted [(lo, hi, partner Seg, deck, pair index)]."""
        m = {}
        for gi, g in enumerate(self.gluings):
            m.setdefault((g.a.rect, g.a.side), []).append((g.a.lo, g.a.hi, g.b, g.deck, gi))
            m.setdefault((g.b.rect, g.b.side), []).append((g.b.lo, g.b.hi, g.a, g.deck, gi))
        for k in m:
            m[k].sort()
        return m

    def side_segments(self, rect: str, side: str):
        return self._side_map.get((rect, side), [])

    # -- vertex classes -----------------------------------------------------

    def _instance_angle_units(self, rect: str, x: float, y: float) -> int:
        """Interior angle at a boundary point of one rect, in units of pi/2."""
        r = self.rects[rect]
        on_v = abs(x - r.x0) < 1e-9 or abs(x - r.x1) < 1e-9
        on_h = abs(y - r.y0) < 1e-9 or abs(y - r.y1) < 1e-9
        if on_v and on_h:
            return 1
        if on_v or on_h:
            return 2
        raise GluingError(f"point ({x}, {y}) not on boundary of {rect}")

    def _vertex_classes(self):
        uf = _UnionFind()
        instances = {}

        def note(rect, x, y):
            k = _key(rect, x, y)
            if k not in instances:
                instances[k] = self._instance_angle_units(rect, x, y)
            uf.find(k)
            return k

        for r in self.rects.values():
            for cx in (r.x0, r.x1):
                for cy in (r.y0, r.y1):
                    note(r.name, cx, cy)
        for g in self.gluings:
            (a0, a1) = g.a.endpoints(self.rects)
            (b0, b1) = g.b.endpoints(self.rects)
            uf.union(note(g.a.rect, *a0), note(g.b.rect, *b0))
            uf.union(note(g.a.rect, *a1), note(g.b.rect, *b1))
        groups = {}
        for k in instances:
            groups.setdefault(uf.find(k), []).append(k)
        classes = []
        for members in groups.values():
            units = sum(instances[c] for c in members)
            classes.append((units, sorted(members)))
        classes.sort(key=lambda c: (-c[0], c[1]))
        return classes

    def _resolve_marked(self, marked):
        """Vertex classes to treat as distinguished even when flat."""
        out = set()
        for rect, (x, y) in marked:
            k = _key(rect, x, y)
            hit = None
            for i, (_u, members) in enumerate(self._classes):
                if k in members:
                    hit = i
                    break
            if hit is None:
                raise GluingError(f"marked point {k} is not a vertex of the complex")
            out.add(hit)
        return frozenset(out)

    # -- invariants ---------------------------------------------------------

    @property
    def area(self):
        return sum(r.area for r in self.rects.values())

    @property
    def counts(self):
        """(V, E, F) of the complex."""
        return (len(self._classes), len(self.gluings), len(self.rects))

    @property
    def euler_characteristic(self):
        v, e, f = self.counts
        return v - e + f

    def cone_classes(self):
        """All vertex classes as (angle in units of pi/2, member instances)."""
        return list(self._classes)

    def cone_points(self):
        """Classes with angle != 2pi, as (angle_units, members)."""
        return [(u, m) for (u, m) in self._classes if u != 4]

    def singular_classes(self):
        """Indices of classes that seed separatrices: cones plus marked."""
        out = [i for i, (u, _m) in enumerate(self._classes) if u != 4]
        out.extend(i for i in self.marked if i not in out)
        return sorted(out)

    @property
    def genus(self):
        chi = self.euler_characteristic
        if chi % 2:
            raise GluingError(f"odd Euler characteristic {chi}")
        g_euler = (2 - chi) // 2
        # Gauss-Bonnet cross-check from the exact angle excesses
        excess_units = sum(u - 4 for (u, _m) in self._classes)
        if excess_units != -4 * chi:
            raise GluingError(
                f"angle excess {excess_units} inconsistent with chi={chi}")
        return g_euler

    def stratum_signature(self):
        """Zero orders (cone angle / 2pi - 1), largest first."""
        orders = []
        for u, _m in self.cone_points():
            if u % 4:
                raise GluingError(f"cone angle {u}*pi/2 is not a multiple of 2pi")
            orders.append(u // 4 - 1)
        return tuple(sorted(orders, reverse=True))

    # -- serialization ------------------------------------------------------

    def dump(self) -> str:
        """Stable text form of the complex, for golden comparisons."""
        out = io.StringIO()
        out.write(f"faces {len(self.rects)}\n")
        for name in sorted(self.rects):
            r = self.rects[name]
            out.write(f"  {name} [{r.x0:.9g},{r.x1:.9g}]x[{r.y0:.9g},{r.y1:.9g}]\n")
        lines = []
        for g in self.gluings:
            sa = f"{g.a.rect}.{g.a.side}[{g.a.lo:.9g},{g.a.hi:.9g}]"
            sb = f"{g.b.rect}.{g.b.side}[{g.b.lo:.9g},{g.b.hi:.9g}]"
            if sb < sa:
                sa, sb = sb, sa
            lines.append(f"  {sa} ~ {sb} deck={GROUP_NAMES[g.deck]}")
        out.write(f"gluings {len(lines)}\n")
        for ln in sorted(lines):
            out.write(ln + "\n")
        out.write(f"vertices {len(self._classes)}\n")
        for u, members in self._classes:
            head = members[0]
            out.write(f"  angle={u}pi/2 size={len(members)} at {head[0]}({head[1]:.9g},{head[2]:.9g})\n")
        return out.getvalue()


# -- builders ---------------------------------------------------------------


def _subgroup_closure(elems):
    h = set(elems) | {0}
    for x, y in itertools.product(list(h), repeat=2):
        h.add(x ^ y)
    return frozenset(h)


def _coset_rep(kappa: int, subgroup) -> int:
    return min(kappa ^ g for g in subgroup)


def sheet_name(kappa: int) -> str:
    return f"{kappa & 1}{(kappa >> 1) & 1}"


def build_surface(table: TableParams, subgroup=(0,)) -> PolygonalSurface:
    """Unfolded surface of one scatterer cell, modulo a deck subgroup.

    With the trivial subgroup this is the full four-sheet surface; with the
    whole Klein group it is the one-sheet quotient.  Cell coordinates are
    centered so the scatterer is [-a/2,a/2] x [-b/2,b/2] and each sheet
    fills the rest of [-1/2,1/2]^2 with four rectangles named L/R/B/T.
    """
    h = _subgroup_closure(subgroup)
    a2 = table.a / 2.0
    b2 = table.b / 2.0
    reps = sorted({_coset_rep(k, h) for k in GROUP})

    def nm(region, kappa):
        return f"{region}{sheet_name(_coset_rep(kappa, h))}"

    rects = []
    for k in reps:
        s = sheet_name(k)
        rects.append(Rect(f"L{s}", -0.5, -0.5, -a2, 0.5))
        rects.append(Rect(f"R{s}", a2, -0.5, 0.5, 0.5))
        rects.append(Rect(f"B{s}", -a2, -0.5, a2, -b2))
        rects.append(Rect(f"T{s}", -a2, b2, a2, 0.5))

    gluings = []
    seen = set()

    def glue(seg_a, seg_b, deck):
        key = tuple(sorted([seg_a, seg_b]))
        if key in seen:
            return
        seen.add(key)
        gluings.append(Gluing(Seg(*seg_a), Seg(*seg_b), deck))

    for k in reps:
        # cell periodicity, no wall crossed
        glue((nm("L", k), "L", -0.5, 0.5), (nm("R", k), "R", -0.5, 0.5), 0)
        glue((nm("L", k), "B", -0.5, -a2), (nm("L", k), "T", -0.5, -a2), 0)
        glue((nm("R", k), "B", a2, 0.5), (nm("R", k), "T", a2, 0.5), 0)
        glue((nm("B", k), "B", -a2, a2), (nm("T", k), "T", -a2, a2), 0)
        # seams between the four rectangles of one sheet
        glue((nm("L", k), "R", -0.5, -b2), (nm("B", k), "L", -0.5, -b2), 0)
        glue((nm("L", k), "R", b2, 0.5), (nm("T", k), "L", b2, 0.5), 0)
        glue((nm("R", k), "L", -0.5, -b2), (nm("B", k), "R", -0.5, -b2), 0)
        glue((nm("R", k), "L", b2, 0.5), (nm("T", k), "R", b2, 0.5), 0)
        # scatterer walls, crossing to a flipped sheet
        glue((nm("L", k), "R", -b2, b2), (nm("R", k ^ 1), "L", -b2, b2), 1)
        glue((nm("B", k), "T", -a2, a2), (nm("T", k ^ 2), "B", -a2, a2), 2)

    return PolygonalSurface(rects, gluings)


def build_surface_X(table: TableParams) -> PolygonalSurface:
    """The full four-sheet translation surface of the table."""
    return build_surface(table, subgroup=(0,))


def build_lshape(table: TableParams) -> PolygonalSurface:
    """One-sheet quotient by the whole deck group."""
    return build_surface(table, subgroup=GROUP)


def build_torus(width: float = 1.0, height: float = 1.0) -> PolygonalSurface:
    """Flat torus with the corner as a marked regular point (fixture)."""
    r = Rect("A", 0.0, 0.0, width, height)
    gl = [
        Gluing(Seg("A", "L", 0.0, height), Seg("A", "R", 0.0, height), 0),
        Gluing(Seg("A", "B", 0.0, width), Seg("A", "T", 0.0, width), 0),
    ]
    return PolygonalSurface([r], gl, marked=[("A", (0.0, 0.0))])
