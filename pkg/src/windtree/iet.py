"""First-return interval exchanges and their renormalization.

A horizontal transversal on a glued-rectangle surface is cut at the landing
points of the backward separatrices from singular (or marked) vertex
classes; flowing one point of each piece to its first return yields a
labeled interval exchange.  Labels are deck markers accumulated through the
gluings, so induction on the exchange can drive character-twisted cocycles.
The construction validates itself: the return strips must tile the surface,
so the swept area is compared with the exact surface area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Degenerate, DomainError, NonReturning, SaddleConnection, TieBreak
from .homology import leg_crossing
from .surface import GROUP, PolygonalSurface, character_value

TOL_HIT = 1e-12      # distance to a vertex or segment endpoint that aborts
TOL_LAND = 1e-10     # separation required between separatrix landings
CUT_TOL = 1e-12      # crossing this close to a sub-range cut passes through
TIE_TOL = 1e-14      # relative tie tolerance in induction
AREA_RTOL = 1e-8
MAX_LEGS = 200000

# Where inside each continuity interval the return orbit is sampled.  Not the
# midpoint: on symmetric tables the backward ray from a regular (angle 2 pi)
# vertex can land exactly halfway between two cut points for every direction,
# and the tracer cannot flow through any vertex instance.  A transcendental
# fraction cannot coincide with such a landing identically in the direction.
SAMPLE_FRAC = 1.0 / math.pi


# -- transversal ------------------------------------------------------------


@dataclass(frozen=True)
class InteriorPiece:
    """Horizontal open segment inside one rectangle, oriented +x."""

    rect: str
    y: float
    x0: float
    x1: float

    @property
    def length(self):
        return self.x1 - self.x0


@dataclass(frozen=True)
class EdgePiece:
    """Horizontal gluing edge used as a section, in bottom-side coords."""

    pair: int
    x0: float
    x1: float

    @property
    def length(self):
        return self.x1 - self.x0


@dataclass(frozen=True)
class Transversal:
    pieces: tuple

    @property
    def length(self):
        return sum(p.length for p in self.pieces)

    def offsets(self):
        out = []
        s = 0.0
        for p in self.pieces:
            out.append(s)
            s += p.length
        return out


def main_transversal(surface: PolygonalSurface, table) -> Transversal:
    """Default section: the horizontal through the sheet-00 cone point.

    Runs rightward at the scatterer top height from the right wall's upper
    corner, through the R and L rectangles of sheet 00, ending on the left
    wall's upper corner.  Both endpoints are singular instances.
    """
    a2 = table.a / 2.0
    b2 = table.b / 2.0
    for name in ("R00", "L00"):
        if name not in surface.rects:
            raise DomainError(f"surface has no rectangle {name}")
    return Transversal(pieces=(
        InteriorPiece("R00", b2, a2, 0.5),
        InteriorPiece("L00", b2, -0.5, -a2),
    ))


def torus_transversal(surface: PolygonalSurface) -> Transversal:
    """Section along the bottom/top gluing edge of the torus fixture."""
    for gi, g in enumerate(surface.gluings):
        if g.a.side in ("B", "T"):
            return Transversal(pieces=(EdgePiece(gi, g.a.lo, g.a.hi),))
    raise DomainError("no horizontal gluing found")


# -- geodesic tracer --------------------------------------------------------


class _Tracer:
    def __init__(self, surface: PolygonalSurface, transversal: Transversal,
                 s_range=None, curves=None):
        self.surface = surface
        self.trans = transversal
        self.offsets = transversal.offsets()
        self.s_max = transversal.length if s_range is None else s_range
        if not (0.0 < self.s_max <= transversal.length + 1e-12):
            raise DomainError("sub-range must lie inside the transversal")
        # a proper sub-range removes the right endpoint from the section, so
        # an orbit through the cut point continues instead of grazing
        self.sub = self.s_max < transversal.length - CUT_TOL
        self.curves = curves or {}
        # interior pieces grouped by rect, edge pieces by gluing pair
        self.interior = {}
        self.edges = {}
        for off, p in zip(self.offsets, transversal.pieces):
            if isinstance(p, InteriorPiece):
                self.interior.setdefault(p.rect, []).append((off, p))
            else:
                self.edges[p.pair] = (off, p)

    def point_at(self, s):
        """Start point (rect, x, y) of the upward flow at parameter s.

        Only strictly interior points of a piece are usable; a parameter on
        a piece junction sits on a rectangle boundary and cannot seed a
        clean flow leg.
        """
        for off, p in zip(self.offsets, self.trans.pieces):
            if off + TOL_HIT < s < off + p.length - TOL_HIT:
                local = s - off
                if isinstance(p, InteriorPiece):
                    return (p.rect, p.x0 + local, p.y)
                g = self.surface.gluings[p.pair]
                seg = g.a if g.a.side == "B" else g.b
                r = self.surface.rects[seg.rect]
                return (seg.rect, p.x0 + local, r.y0)
        raise SaddleConnection(f"section parameter {s:.12g} sits on a piece boundary")

    def _exit_leg(self, rect, x, y, dx, dy):
        r = self.surface.rects[rect]
        t_best = np.inf
        side = "?"
        if dx > 0.0:
            t_best, side = (r.x1 - x) / dx, "R"
        elif dx < 0.0:
            t_best, side = (r.x0 - x) / dx, "L"
        if dy > 0.0:
            t = (r.y1 - y) / dy
            if t < t_best:
                t_best, side = t, "T"
        elif dy < 0.0:
            t = (r.y0 - y) / dy
            if t < t_best:
                t_best, side = t, "B"
        if not np.isfinite(t_best):
            raise DomainError("direction parallel to both axes")
        return t_best, side, x + dx * t_best, y + dy * t_best

    def _cross(self, rect, side, ex, ey):
        """Pass through a gluing; returns (rect2, x2, y2, deck, pair)."""
        c = ey if side in ("L", "R") else ex
        for lo, hi, partner, deck, gi in self.surface.side_segments(rect, side):
            if lo - TOL_HIT <= c <= hi + TOL_HIT:
                if c < lo + TOL_HIT or c > hi - TOL_HIT:
                    raise SaddleConnection(
                        f"orbit hits a vertex on {rect}.{side} at {c:.12g}")
                c2 = c - lo + partner.lo
                r2 = self.surface.rects[partner.rect]
                fixed = r2.side_coord(partner.side)
                if partner.side in ("L", "R"):
                    return (partner.rect, fixed, c2, deck, gi)
                return (partner.rect, c2, fixed, deck, gi)
        raise DomainError(f"no gluing covers {rect}.{side} at {c}")

    def _leg_curve_counts(self, rect, x, y, ex, ey, acc):
        for name, segs in self.curves.items():
            for seg in segs:
                if seg[0] != rect:
                    continue
                acc[name] = acc.get(name, 0) + leg_crossing(x, y, ex, ey, seg)
        return acc

    def _admit(self, s):
        """Whether a section crossing at parameter s stops the flow.

        Crossings beyond the active range are ignored, and so is one that
        grazes the cut point of a proper sub-range: induction removes that
        endpoint from the section, so the orbit passes through.  A crossing
        too close to the cut to classify aborts, as does one grazing the
        genuine endpoint of the full section.
        """
        if s > self.s_max + CUT_TOL:
            return False
        if s > self.s_max - CUT_TOL:
            if self.sub:
                return False
            raise SaddleConnection(
                f"orbit grazes the section endpoint at s={s:.12g}")
        if s > self.s_max - TOL_LAND:
            raise SaddleConnection(
                f"orbit lands too close to the cut at s={s:.12g}")
        return True

    def flow_to_crossing(self, rect, x, y, dx, dy, collect_curves=False):
        """Flow until the transversal is crossed inside the active range.

        Returns (s, flow time, deck product, curve crossing counts).
        """
        g_acc = 0
        t_acc = 0.0
        counts = {}
        for _leg in range(MAX_LEGS):
            t_leg, side, ex, ey = self._exit_leg(rect, x, y, dx, dy)
            # interior crossings within this leg
            hit = None
            for off, p in self.interior.get(rect, []):
                if (y - p.y) * (ey - p.y) < 0.0:
                    tc = (p.y - y) / dy
                    if tc <= TOL_HIT:
                        continue
                    xc = x + dx * tc
                    if not (p.x0 - TOL_HIT <= xc <= p.x1 + TOL_HIT):
                        continue
                    s = off + (xc - p.x0)
                    if not self._admit(s):
                        continue
                    if xc < p.x0 + TOL_HIT or xc > p.x1 - TOL_HIT:
                        raise SaddleConnection(
                            f"orbit grazes the section end at x={xc:.12g}")
                    if hit is None or tc < hit[0]:
                        hit = (tc, s, xc, p.y)
            if hit is not None:
                tc, s, xc, yc = hit
                if collect_curves:
                    self._leg_curve_counts(rect, x, y, xc, yc, counts)
                return s, t_acc + tc, g_acc, counts
            if collect_curves:
                self._leg_curve_counts(rect, x, y, ex, ey, counts)
            rect2, x2, y2, deck, gi = self._cross(rect, side, ex, ey)
            t_acc += t_leg
            # edge-section crossing happens at the gluing traversal
            if gi in self.edges:
                off, p = self.edges[gi]
                g = self.surface.gluings[gi]
                bseg = g.a if g.a.side == "B" else g.b
                cb = ex if side in ("B", "T") else ey
                exit_seg = None
                for lo, hi, partner, _d, gj in self.surface.side_segments(rect, side):
                    if gj == gi and lo - TOL_HIT <= cb <= hi + TOL_HIT:
                        exit_seg = (lo, hi)
                        break
                if exit_seg is None:
                    raise DomainError("edge section bookkeeping failed")
                if (rect, side) != (bseg.rect, bseg.side):
                    cb = cb - exit_seg[0] + bseg.lo
                if p.x0 - TOL_HIT <= cb <= p.x1 + TOL_HIT and t_acc > TOL_HIT:
                    s = off + (cb - p.x0)
                    if self._admit(s):
                        if cb < p.x0 + TOL_HIT or cb > p.x1 - TOL_HIT:
                            raise SaddleConnection(
                                f"orbit grazes the edge-section end at {cb:.12g}")
                        g_acc ^= deck
                        return s, t_acc, g_acc, counts
            g_acc ^= deck
            rect, x, y = rect2, x2, y2
        raise NonReturning(f"no section crossing within {MAX_LEGS} legs")


# -- separatrix landings ----------------------------------------------------


def _snap_instance(surface, rect, px, py):
    """Exact boundary coordinates for a quantized vertex instance.

    Vertex classes identify instances by coordinates rounded for keying, so
    a member can sit a few 1e-10 off the rectangle boundary.  A separatrix
    trace seeded from such a point may cross the section right at its own
    origin instead of flowing a full return, so pin each coordinate back to
    the exact rect bound, or for a point interior to a side, to the exact
    gluing-segment junction on that side.
    """
    r = surface.rects[rect]
    snap = 1e-8
    x_pinned = y_pinned = False
    for v in (r.x0, r.x1):
        if abs(px - v) < snap:
            px, x_pinned = v, True
            break
    for v in (r.y0, r.y1):
        if abs(py - v) < snap:
            py, y_pinned = v, True
            break
    if x_pinned and not y_pinned:
        side = "L" if px == r.x0 else "R"
        for lo, hi, _p, _d, _g in surface.side_segments(rect, side):
            for v in (lo, hi):
                if abs(py - v) < snap:
                    return px, v
    if y_pinned and not x_pinned:
        side = "B" if py == r.y0 else "T"
        for lo, hi, _p, _d, _g in surface.side_segments(rect, side):
            for v in (lo, hi):
                if abs(px - v) < snap:
                    return v, py
    return px, py


def _instance_admits(surface, rect, px, py, dx, dy):
    """Whether direction (dx, dy) points into `rect` from boundary point."""
    r = surface.rects[rect]
    if abs(px - r.x0) < 1e-9 and dx <= 0.0:
        return False
    if abs(px - r.x1) < 1e-9 and dx >= 0.0:
        return False
    if abs(py - r.y0) < 1e-9 and dy <= 0.0:
        return False
    if abs(py - r.y1) < 1e-9 and dy >= 0.0:
        return False
    return True


def separatrix_landings(surface: PolygonalSurface, theta: float,
                        tracer: _Tracer):
    """Landing parameters of the backward rays from all singular classes."""
    ddx = -math.cos(theta)
    ddy = -math.sin(theta)
    landings = []
    classes = surface.cone_classes()
    for ci in surface.singular_classes():
        _units, members = classes[ci]
        for (rect, px, py) in members:
            px, py = _snap_instance(surface, rect, px, py)
            if not _instance_admits(surface, rect, px, py, ddx, ddy):
                continue
            s, _t, _g, _c = tracer.flow_to_crossing(rect, px, py, ddx, ddy)
            landings.append(s)
    landings.sort()
    for i in range(1, len(landings)):
        if landings[i] - landings[i - 1] < TOL_LAND:
            raise SaddleConnection(
                f"two separatrices land together at s={landings[i]:.12g}")
    if landings and (landings[0] < TOL_LAND
                     or landings[-1] > tracer.s_max - TOL_LAND):
        raise SaddleConnection("separatrix lands on the section boundary")
    return landings


# -- labeled interval exchanges ---------------------------------------------


@dataclass
class LabeledIET:
    """Interval exchange with deck labels, lengths indexed by symbol.

    top and bot list the symbols in domain and image order; lab[i] is the
    Klein marker of the return loop through symbol i; fvec[i] optionally
    holds integer counter evaluations of that loop.
    """

    lam: np.ndarray
    top: list
    bot: list
    lab: np.ndarray
    fvec: np.ndarray | None = None

    def __post_init__(self):
        d = len(self.lam)
        if sorted(self.top) != list(range(d)) or sorted(self.bot) != list(range(d)):
            raise DomainError("top and bot must both list every symbol once")
        if np.any(self.lam <= 0.0):
            raise DomainError("lengths must be positive")

    @property
    def d(self):
        return len(self.lam)

    @property
    def total(self):
        return float(np.sum(self.lam))

    def copy(self):
        return LabeledIET(
            lam=self.lam.copy(), top=list(self.top), bot=list(self.bot),
            lab=self.lab.copy(),
            fvec=None if self.fvec is None else self.fvec.copy(),
        )

    def normalized(self):
        out = self.copy()
        out.lam = out.lam / out.total
        return out


@dataclass(frozen=True)
class FirstReturnResult:
    iet: LabeledIET
    landings: tuple
    return_times: tuple
    area_error: float
    transversal: Transversal


def first_return_iet(surface: PolygonalSurface, theta: float,
                     transversal: Transversal, s_range=None,
                     curves=None) -> FirstReturnResult:
    """Compute the first-return exchange of the flow in direction theta.

    `s_range` restricts the section to the initial subinterval of that
    length (used to cross-check induction against geometry).  `curves`
    maps names to polyline segments; signed crossing counts of each return
    loop with the two counter cocycles are then stored in fvec.
    """
    if not (0.0 < theta < math.pi) or math.sin(theta) <= 0.0:
        raise DomainError("need sin(theta) > 0")
    tracer = _Tracer(surface, transversal, s_range=s_range, curves=curves)
    L = tracer.s_max
    landings = separatrix_landings(surface, theta, tracer)
    bounds = [0.0] + landings + [L]
    d = len(bounds) - 1
    dx = math.cos(theta)
    dy = math.sin(theta)

    lam = np.array([bounds[i + 1] - bounds[i] for i in range(d)])
    images = []
    times = []
    labels = []
    fvecs = []
    for i in range(d):
        s_mid = bounds[i] + SAMPLE_FRAC * (bounds[i + 1] - bounds[i])
        rect, x, y = tracer.point_at(s_mid)
        s_hit, t_ret, g_acc, counts = tracer.flow_to_crossing(
            rect, x, y, dx, dy, collect_curves=curves is not None)
        left_image = s_hit - (s_mid - bounds[i])
        images.append(left_image)
        times.append(t_ret)
        labels.append(g_acc)
        if curves is not None:
            fvecs.append(_f_from_counts(tracer, counts, s_mid, s_hit))

    # the images must tile [0, L)
    order = sorted(range(d), key=lambda i: images[i])
    cur = 0.0
    for k in order:
        if abs(images[k] - cur) > 1e-7 * max(1.0, L):
            raise SaddleConnection(
                f"return images do not tile the section (gap at {cur:.12g})")
        cur += lam[k]
    if abs(cur - L) > 1e-7 * max(1.0, L):
        raise SaddleConnection("return images overrun the section")

    swept = float(sum(lam[i] * times[i] for i in range(d))) * dy
    area_err = abs(swept - surface.area) / surface.area
    if area_err > AREA_RTOL:
        raise Degenerate(
            f"return strips sweep {swept:.12g}, surface area {surface.area:.12g}")

    iet = LabeledIET(
        lam=lam, top=list(range(d)), bot=order,
        lab=np.array(labels, dtype=np.int64),
        fvec=np.array(fvecs, dtype=np.int64) if curves is not None else None,
    )
    return FirstReturnResult(
        iet=iet, landings=tuple(landings), return_times=tuple(times),
        area_error=area_err, transversal=transversal,
    )


def _f_from_counts(tracer, counts, s_from, s_to):
    """Counter pair of a return loop, closing back along the section."""
    closing = {}
    if abs(s_to - s_from) > 1e-15:
        sgn = 1.0 if s_to < s_from else -1.0  # closing runs from s_to to s_from
        lo, hi = min(s_from, s_to), max(s_from, s_to)
        for off, p in zip(tracer.offsets, tracer.trans.pieces):
            if not isinstance(p, InteriorPiece):
                raise DomainError("counter evaluation needs an interior section")
            a = max(lo, off)
            b = min(hi, off + p.length)
            if b <= a + 1e-15:
                continue
            xa = p.x0 + (a - off)
            xb = p.x0 + (b - off)
            if sgn > 0:
                legs = (xa, xb)
            else:
                legs = (xb, xa)
            for name, segs in tracer.curves.items():
                for seg in segs:
                    if seg[0] != p.rect:
                        continue
                    closing[name] = closing.get(name, 0) + leg_crossing(
                        legs[0], p.y, legs[1], p.y, seg)
    f1 = 0
    f2 = 0
    for kappa in GROUP:
        suffix = f"{kappa & 1}{(kappa >> 1) & 1}"
        cv = counts.get("v" + suffix, 0) + closing.get("v" + suffix, 0)
        ch = counts.get("h" + suffix, 0) + closing.get("h" + suffix, 0)
        f1 += character_value(1, kappa) * cv
        f2 += character_value(2, kappa) * ch
    return (f1, -f2)


# -- Rauzy and Zorich induction --------------------------------------------


@dataclass(frozen=True)
class RauzyRecord:
    """One elementary induction step, enough to rebuild any cocycle matrix."""

    kind: str          # "top" or "bottom": which row's last symbol won
    winner: int
    loser: int
    winner_label: int  # labels before the step
    loser_label: int
    d: int

    def matrix(self, char: int = 0) -> np.ndarray:
        """Twisted step matrix acting on symbol-indexed column stacks."""
        m = np.eye(self.d, dtype=np.int64)
        if self.kind == "top":
            m[self.loser, self.winner] = character_value(char, self.loser_label)
        else:
            m[self.loser, self.loser] = character_value(char, self.winner_label)
            m[self.loser, self.winner] = 1
        return m


def rauzy_step(iet: LabeledIET) -> tuple[LabeledIET, RauzyRecord]:
    """One elementary induction step (the longer last symbol wins)."""
    out = iet.copy()
    alpha = out.top[-1]
    beta = out.bot[-1]
    la = float(out.lam[alpha])
    lb = float(out.lam[beta])
    if abs(la - lb) <= TIE_TOL * max(la, lb):
        raise TieBreak(f"last lengths tie at {la:.17g}")
    if la > lb:
        kind, w, l = "top", alpha, beta
        row = out.bot
    else:
        kind, w, l = "bottom", beta, alpha
        row = out.top
    rec = RauzyRecord(kind=kind, winner=w, loser=l,
                      winner_label=int(out.lab[w]), loser_label=int(out.lab[l]),
                      d=out.d)
    out.lam[w] -= out.lam[l]
    row.pop()
    row.insert(row.index(w) + 1, l)
    if out.fvec is not None:
        out.fvec[l] += out.fvec[w]
    out.lab[l] ^= out.lab[w]
    return out, rec


@dataclass(frozen=True)
class ZorichRecord:
    records: tuple
    kind: str
    run: int
    shrink: float    # total length ratio across the run

    @property
    def dt(self):
        return -math.log(self.shrink)


def zorich_step(iet: LabeledIET, max_run: int = 10 ** 6):
    """Maximal run of same-type steps; returns (new iet, ZorichRecord)."""
    total0 = iet.total
    cur = iet
    recs = []
    kind = None
    while True:
        alpha = cur.top[-1]
        beta = cur.bot[-1]
        la = float(cur.lam[alpha])
        lb = float(cur.lam[beta])
        if abs(la - lb) <= TIE_TOL * max(la, lb):
            if not recs:
                raise TieBreak(f"last lengths tie at {la:.17g}")
            break
        step_kind = "top" if la > lb else "bottom"
        if kind is None:
            kind = step_kind
        elif step_kind != kind:
            break
        cur, rec = rauzy_step(cur)
        recs.append(rec)
        if len(recs) > max_run:
            raise NonReturning(f"induction run exceeded {max_run} steps")
    return cur, ZorichRecord(records=tuple(recs), kind=kind, run=len(recs),
                             shrink=cur.total / total0)


def cocycle_product(records, char: int = 0) -> np.ndarray:
    """Product of twisted step matrices, latest applied last."""
    if not records:
        raise DomainError("no records")
    m = np.eye(records[0].d, dtype=np.int64)
    for rec in records:
        m = rec.matrix(char) @ m
    return m
