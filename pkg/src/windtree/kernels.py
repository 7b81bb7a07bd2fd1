"""Numba kernels for the event loop, the ray-march oracle, crossing
trackers, and the renormalization stream.

Everything in this module works on plain scalars and preallocated arrays so
the hot loops stay allocation-free.  Wrappers in the neighbouring modules
own validation, types, and error raising; kernels communicate failure
through integer status codes.

Status codes: 0 ok, 1 corner abort, 2 tie (connection), 3 frame collapse,
4 run cap exceeded.
"""

import numba as nb
import numpy as np

CORNER_TOL = 1e-12

# leg outcomes, internal to this module
_EXIT_X = 0
_EXIT_Y = 1
_VWALL = 2
_HWALL = 3
_CORNER = 4

STATUS_OK = 0
STATUS_CORNER = 1
STATUS_TIE = 2
STATUS_DEGENERATE = 3
STATUS_RUNCAP = 4


@nb.njit(cache=True, inline="always", error_model="numpy")
def _next_leg(a2, b2, u, v, sx, sy, ax, ay, tol):
    """Next event of the flight inside the current unit cell.

    The cell-local obstacle picture: scatterer quarters fill the corner
    regions ``|u| < a2 (mod 1)`` times ``|v| < b2 (mod 1)``; the vertical
    wall lines sit at u = a2 and u = 1-a2 and carry wall segments where
    v < b2 or v > 1-b2 (and symmetrically for horizontal wall lines).

    Returns (kind, t, u2, v2, clearance): kind is one of the leg outcome
    codes, (u2, v2) the offset at the event (walls are snapped exactly onto
    the wall line; cell exits are left un-wrapped), and clearance the
    smallest distance to a scatterer corner seen among the wall-line
    crossings of this leg.
    """
    dx = sx * ax
    dy = sy * ay
    if sx > 0:
        tx = (1.0 - u) / ax
        gapx = (1.0 - a2) - u
    else:
        tx = u / ax
        gapx = u - a2
    if sy > 0:
        ty = (1.0 - v) / ay
        gapy = (1.0 - b2) - v
    else:
        ty = v / ay
        gapy = v - b2
    t_exit = tx if tx < ty else ty

    twv = gapx / ax if gapx > 0.0 else -1.0
    twh = gapy / ay if gapy > 0.0 else -1.0

    # classify each wall-line crossing: -1 none, 0 free pass, 1 hit, 2 corner
    zone_v = -1
    vc = 0.0
    cv = 2.0
    if 0.0 < twv < t_exit:
        vc = v + dy * twv
        d0 = vc - b2 if vc > b2 else b2 - vc
        d1 = vc - (1.0 - b2) if vc > (1.0 - b2) else (1.0 - b2) - vc
        cv = d0 if d0 < d1 else d1
        if cv < tol and ay > 0.0:
            zone_v = 2
        elif vc < b2 or vc > 1.0 - b2:
            zone_v = 1
        else:
            zone_v = 0
    zone_h = -1
    uc = 0.0
    ch = 2.0
    if 0.0 < twh < t_exit:
        uc = u + dx * twh
        d0 = uc - a2 if uc > a2 else a2 - uc
        d1 = uc - (1.0 - a2) if uc > (1.0 - a2) else (1.0 - a2) - uc
        ch = d0 if d0 < d1 else d1
        if ch < tol and ax > 0.0:
            zone_h = 2
        elif uc < a2 or uc > 1.0 - a2:
            zone_h = 1
        else:
            zone_h = 0

    kind = _EXIT_X if tx < ty else _EXIT_Y
    ev_t = t_exit
    if zone_v == 1 and twv < ev_t:
        kind = _VWALL
        ev_t = twv
    if zone_h == 1 and twh < ev_t:
        kind = _HWALL
        ev_t = twh
    if zone_v == 2 and twv <= ev_t:
        kind = _CORNER
        ev_t = twv
    if zone_h == 2 and twh <= ev_t:
        kind = _CORNER
        if twh < ev_t:
            ev_t = twh

    clearance = 2.0
    if zone_v >= 0 and twv <= ev_t and cv < clearance:
        clearance = cv
    if zone_h >= 0 and twh <= ev_t and ch < clearance:
        clearance = ch

    if kind == _VWALL:
        u2 = (1.0 - a2) if sx > 0 else a2
        v2 = vc
    elif kind == _HWALL:
        u2 = uc
        v2 = (1.0 - b2) if sy > 0 else b2
    else:
        u2 = u + dx * ev_t
        v2 = v + dy * ev_t
        # snap the exiting coordinate so the caller can wrap exactly
        if kind == _EXIT_X:
            u2 = 1.0 if sx > 0 else 0.0
        else:
            v2 = 1.0 if sy > 0 else 0.0
    return kind, ev_t, u2, v2, clearance


@nb.njit(cache=True, error_model="numpy")
def advance_state(a, b, ci, cj, u, v, sx, sy, ax, ay, clock, t_target, tol):
    """Event loop until the clock reaches t_target.

    Returns (status, ci, cj, u, v, sx, sy, clock, events, clearance) where
    events counts wall reflections and clearance is the smallest corner
    distance seen at wall-line crossings.
    """
    a2 = 0.5 * a
    b2 = 0.5 * b
    events = 0
    clearance = 2.0
    while clock < t_target:
        kind, t, u2, v2, clr = _next_leg(a2, b2, u, v, sx, sy, ax, ay, tol)
        if clr < clearance:
            clearance = clr
        remain = t_target - clock
        if t >= remain:
            u = u + sx * ax * remain
            v = v + sy * ay * remain
            clock = t_target
            break
        if kind == _CORNER:
            clock += t
            return STATUS_CORNER, ci, cj, u2, v2, sx, sy, clock, events, clearance
        u = u2
        v = v2
        clock += t
        if kind == _VWALL:
            sx = -sx
            events += 1
        elif kind == _HWALL:
            sy = -sy
            events += 1
        elif kind == _EXIT_X:
            # v is strictly interior here since tx < ty was strict
            if sx > 0:
                ci += 1
                u = 0.0
            else:
                ci -= 1
                u = 1.0
        else:
            if sy > 0:
                cj += 1
                v = 0.0
            else:
                cj -= 1
                v = 1.0
            if u >= 1.0:  # diagonal co-exit through a cell corner
                ci += 1
                u -= 1.0
            elif u <= 0.0 and sx < 0:
                ci -= 1
                u += 1.0
    if u >= 1.0:
        ci += 1
        u -= 1.0
    if v >= 1.0:
        cj += 1
        v -= 1.0
    return STATUS_OK, ci, cj, u, v, sx, sy, clock, events, clearance


@nb.njit(cache=True, error_model="numpy")
def displacement_series(a, b, ci0, cj0, u0, v0, sx0, sy0, ax, ay, sched, out_d, tol):
    """Distance from the start sampled at the schedule times.

    Fills out_d[k] with the Euclidean distance at flow time sched[k] and
    returns (status, filled, events, clearance, ci, cj, u, v, sx, sy).  On a
    corner abort the series is truncated at `filled`.
    """
    ci = ci0
    cj = cj0
    u = u0
    v = v0
    sx = sx0
    sy = sy0
    a2 = 0.5 * a
    b2 = 0.5 * b
    clock = 0.0
    events = 0
    clearance = 2.0
    k = 0
    n = sched.shape[0]
    while k < n:
        kind, t, u2, v2, clr = _next_leg(a2, b2, u, v, sx, sy, ax, ay, tol)
        if clr < clearance:
            clearance = clr
        while k < n and sched[k] <= clock + t:
            dt = sched[k] - clock
            px = u + sx * ax * dt
            py = v + sy * ay * dt
            ddx = np.float64(ci - ci0) + (px - u0)
            ddy = np.float64(cj - cj0) + (py - v0)
            out_d[k] = np.sqrt(ddx * ddx + ddy * ddy)
            k += 1
        if k >= n:
            break
        if kind == _CORNER:
            return STATUS_CORNER, k, events, clearance, ci, cj, u2, v2, sx, sy
        u = u2
        v = v2
        clock += t
        if kind == _VWALL:
            sx = -sx
            events += 1
        elif kind == _HWALL:
            sy = -sy
            events += 1
        elif kind == _EXIT_X:
            if sx > 0:
                ci += 1
                u = 0.0
            else:
                ci -= 1
                u = 1.0
        else:
            if sy > 0:
                cj += 1
                v = 0.0
            else:
                cj -= 1
                v = 1.0
            if u >= 1.0:
                ci += 1
                u -= 1.0
            elif u <= 0.0 and sx < 0:
                ci -= 1
                u += 1.0
    if u >= 1.0:
        ci += 1
        u -= 1.0
    if v >= 1.0:
        cj += 1
        v -= 1.0
    return STATUS_OK, k, events, clearance, ci, cj, u, v, sx, sy


@nb.njit(cache=True, error_model="numpy")
def track_crossings(a, b, u0, v0, sx0, sy0, ax, ay, t_target, max_events,
                    mutate, sched, out_fx, out_fy, out_vert, out_mm, tol):
    """Quotient billiard with sheet bits and lattice crossing counters.

    The two sheet bits (e1, e2) start at (0, 0); a vertical wall reflection
    toggles e1 and a horizontal one toggles e2 (swapped when `mutate` is
    set, which is the deliberate-fault fixture).  Every crossing of an
    integer lattice line bumps the counters with sheet-determined signs:

        x-crossing:  fx += (-1)^e1
        y-crossing:  fy += (-1)^e2,  vert += 1,  mm += (-1)^(e1+e2)

    No counter consults the direction signs, so agreement of (fx, fy) with
    the displacement is a real check of the sheet bookkeeping.  The maximum
    over events of | (fx, fy) - displacement | is returned; every counter
    is sampled at the schedule times.

    Stops at flow time t_target, or after max_events reflections if
    max_events > 0.  Returns (status, filled, events, max_dev, fx, fy,
    vert, mm, clock).
    """
    ci = np.int64(0)
    cj = np.int64(0)
    u = u0
    v = v0
    sx = sx0
    sy = sy0
    e1 = 0
    e2 = 0
    fx = np.int64(0)
    fy = np.int64(0)
    vert = np.int64(0)
    mm = np.int64(0)
    a2 = 0.5 * a
    b2 = 0.5 * b
    clock = 0.0
    events = 0
    max_dev = 0.0
    k = 0
    n = sched.shape[0]
    while clock < t_target:
        kind, t, u2, v2, clr = _next_leg(a2, b2, u, v, sx, sy, ax, ay, tol)
        while k < n and sched[k] <= clock + t:
            out_fx[k] = fx
            out_fy[k] = fy
            out_vert[k] = vert
            out_mm[k] = mm
            k += 1
        remain = t_target - clock
        if t >= remain:
            clock = t_target
            break
        if kind == _CORNER:
            clock += t
            return STATUS_CORNER, k, events, max_dev, fx, fy, vert, mm, clock
        u = u2
        v = v2
        clock += t
        if kind == _VWALL:
            if mutate:
                e2 ^= 1
            else:
                e1 ^= 1
            sx = -sx
            events += 1
        elif kind == _HWALL:
            if mutate:
                e1 ^= 1
            else:
                e2 ^= 1
            sy = -sy
            events += 1
        elif kind == _EXIT_X:
            # the straightened flow crosses lattice lines in the positive
            # sense by construction, so the increment is the sheet sign
            # alone, independent of the travel direction
            fx += 1 - 2 * e1
            if sx > 0:
                ci += 1
                u = 0.0
            else:
                ci -= 1
                u = 1.0
        else:
            fy += 1 - 2 * e2
            vert += 1
            mm += (1 - 2 * e1) * (1 - 2 * e2)
            if sy > 0:
                cj += 1
                v = 0.0
            else:
                cj -= 1
                v = 1.0
            if u >= 1.0:
                fx += 1 - 2 * e1
                ci += 1
                u -= 1.0
            elif u <= 0.0 and sx < 0:
                fx += 1 - 2 * e1
                ci -= 1
                u += 1.0
        ddx = np.float64(fx) - (np.float64(ci) + (u - u0))
        ddy = np.float64(fy) - (np.float64(cj) + (v - v0))
        dev = np.sqrt(ddx * ddx + ddy * ddy)
        if dev > max_dev:
            max_dev = dev
        if max_events > 0 and events >= max_events:
            break
    return STATUS_OK, k, events, max_dev, fx, fy, vert, mm, clock


@nb.njit(cache=True, error_model="numpy")
def raymarch(a, b, x0, y0, sx0, sy0, ax, ay, t_total, step):
    """Brute-force reference integrator in absolute coordinates.

    Marches with a fixed stride, testing scatterer membership after each
    stride.  On penetration the position is mirrored across the violated
    wall plane and the matching direction sign flips; when a stride enters
    through a corner region, the later-crossed plane is the physical wall.
    Returns (x, y, sx, sy).
    """
    x = x0
    y = y0
    sx = sx0
    sy = sy0
    a2 = 0.5 * a
    b2 = 0.5 * b
    nfull = np.int64(t_total / step)
    for i in range(nfull + 1):
        h = step if i < nfull else t_total - nfull * step
        if h <= 0.0:
            continue
        x2 = x + sx * ax * h
        y2 = y + sy * ay * h
        mx = np.floor(x2 + 0.5)
        my = np.floor(y2 + 0.5)
        if np.abs(x2 - mx) < a2 and np.abs(y2 - my) < b2:
            out_x = np.abs(x - mx) >= a2
            out_y = np.abs(y - my) >= b2
            flip_x = False
            flip_y = False
            if out_x and out_y:
                wx = mx + a2 * (1.0 if x > mx else -1.0)
                wy = my + b2 * (1.0 if y > my else -1.0)
                tcx = (wx - x) / (sx * ax)
                tcy = (wy - y) / (sy * ay)
                if tcx > tcy:
                    flip_x = True
                elif tcy > tcx:
                    flip_y = True
                else:
                    flip_x = True
                    flip_y = True
            elif out_x:
                flip_x = True
            elif out_y:
                flip_y = True
            else:
                flip_x = True
                flip_y = True
            if flip_x:
                wx = mx + a2 * (1.0 if x > mx else -1.0)
                x2 = 2.0 * wx - x2
                sx = -sx
            if flip_y:
                wy = my + b2 * (1.0 if y > my else -1.0)
                y2 = 2.0 * wy - y2
                sy = -sy
        x = x2
        y = y2
    return x, y, sx, sy


@nb.njit(cache=True, inline="always", error_model="numpy")
def _orthonormalize(frame, kcols, logs, degen_tol):
    """Modified Gram-Schmidt on the leading kcols columns, accumulating the
    log of each diagonal stretch into logs.  Returns False on collapse."""
    d = frame.shape[0]
    for j in range(kcols):
        for p in range(j):
            dot = 0.0
            for r in range(d):
                dot += frame[r, p] * frame[r, j]
            for r in range(d):
                frame[r, j] -= dot * frame[r, p]
        nrm = 0.0
        for r in range(d):
            nrm += frame[r, j] * frame[r, j]
        nrm = np.sqrt(nrm)
        if nrm < degen_tol:
            return False
        logs[j] += np.log(nrm)
        for r in range(d):
            frame[r, j] /= nrm
    return True


@nb.njit(cache=True, error_model="numpy")
def induction_stream(lam, top, bot, lab, chi, frames, kcols, logs, n_accel,
                     cadence, tie_tol, max_run, overflow, degen_tol, halfway):
    """Accelerated interval-exchange renormalization with character frames.

    lam, top, bot, lab: the exchange state (lengths, the two orderings, and
    the deck label of each symbol, encoded as 2 bits).  chi is a (ncar, 4)
    array of character values on the label codes; frames is (ncar, d, kmax)
    and holds one column frame per character, advanced by the twisted step
    matrices; logs is (ncar, kmax) accumulated log stretches.

    Runs n_accel accelerated steps (maximal runs of a single induction
    type), renormalizing the total length to 1 after each and adding
    -log(shrink) to the clock.  Frames reorthonormalize every `cadence`
    accelerated steps and whenever an entry exceeds `overflow`.

    Returns (status, t_total, t_half, accel_done) and fills half_logs with a
    snapshot of logs at the halfway step for convergence diagnostics.
    """
    d = lam.shape[0]
    ncar = chi.shape[0]
    total = 0.0
    for i in range(d):
        total += lam[i]
    for i in range(d):
        lam[i] /= total
    t_clock = 0.0
    t_half = 0.0
    for c in range(ncar):
        for j in range(kcols[c]):
            logs[c, j] = 0.0
    half_logs = np.zeros((ncar, frames.shape[2]))
    for step_i in range(n_accel):
        alpha = top[d - 1]
        beta = bot[d - 1]
        la = lam[alpha]
        lb = lam[beta]
        diff = la - lb
        scale = la if la > lb else lb
        if np.abs(diff) <= tie_tol * scale:
            return STATUS_TIE, t_clock, t_half, step_i, half_logs
        kind_top = diff > 0.0
        nrun = 0
        while True:
            alpha = top[d - 1]
            beta = bot[d - 1]
            la = lam[alpha]
            lb = lam[beta]
            diff = la - lb
            scale = la if la > lb else lb
            if np.abs(diff) <= tie_tol * scale:
                return STATUS_TIE, t_clock, t_half, step_i, half_logs
            if (diff > 0.0) != kind_top:
                break
            if kind_top:
                w = alpha
                lsr = beta
            else:
                w = beta
                lsr = alpha
            lam[w] = lam[w] - lam[lsr]
            # move the loser next to the winner in the other row
            if kind_top:
                row = bot
            else:
                row = top
            pw = 0
            for i in range(d):
                if row[i] == w:
                    pw = i
                    break
            for i in range(d - 1, pw + 1, -1):
                row[i] = row[i - 1]
            row[pw + 1] = lsr
            # twisted frame updates, rows indexed by symbol
            for c in range(ncar):
                kc = kcols[c]
                if kc == 0:
                    continue
                if kind_top:
                    s = chi[c, lab[lsr]]
                    for j in range(kc):
                        frames[c, lsr, j] += s * frames[c, w, j]
                else:
                    s = chi[c, lab[w]]
                    for j in range(kc):
                        frames[c, lsr, j] = frames[c, w, j] + s * frames[c, lsr, j]
            lab[lsr] ^= lab[w]
            nrun += 1
            if nrun > max_run:
                return STATUS_RUNCAP, t_clock, t_half, step_i, half_logs
        total = 0.0
        for i in range(d):
            total += lam[i]
        t_clock += -np.log(total)
        for i in range(d):
            lam[i] /= total
        need_qr = (step_i + 1) % cadence == 0
        if not need_qr:
            big = 0.0
            for c in range(ncar):
                for j in range(kcols[c]):
                    for r in range(d):
                        v = np.abs(frames[c, r, j])
                        if v > big:
                            big = v
            if big > overflow:
                need_qr = True
        if need_qr:
            for c in range(ncar):
                if kcols[c] == 0:
                    continue
                ok = _orthonormalize(frames[c], kcols[c], logs[c], degen_tol)
                if not ok:
                    return STATUS_DEGENERATE, t_clock, t_half, step_i, half_logs
        if step_i + 1 == halfway:
            t_half = t_clock
            for c in range(ncar):
                for j in range(kcols[c]):
                    half_logs[c, j] = logs[c, j]
    return STATUS_OK, t_clock, t_half, n_accel, half_logs
