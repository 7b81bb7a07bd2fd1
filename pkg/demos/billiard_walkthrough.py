"""Walk one trajectory through the scatterer lattice, event by event.

Shows the exact event-driven flow: reflections off axis-aligned scatterer
walls only flip one direction sign, so each trajectory uses at most four
directions forever.  Also contrasts a generic direction with the free
vertical corridor, and checks the measured event rate against the mean
free path formula.
"""

import math

import numpy as np

from windtree.billiard import (count_events, displacement_series, make_state,
                               next_event, reflect)
from windtree.tables import TableParams

table = TableParams(0.5, 0.5)
start = (0.5, 0.0)
theta = 0.9137560109347862

# a handful of individual reflections
state = make_state(table, start, theta)
print(f"scatterer half-sides a/2={table.a / 2}, b/2={table.b / 2}")
print(f"start {start}, direction theta={theta:.6f}")
print("first reflections (clock, position, direction signs, wall):")
for k in range(6):
    event = next_event(table, state, horizon=1000.0)
    state = reflect(state, event)
    x, y = state.position
    print(f"  {k + 1}: t={state.clock:9.4f}  ({x:+9.4f}, {y:+9.4f})"
          f"  signs {state.dir_signs}  {event.kind.value}")
print(f"base angle stays {state.base_angle:.6f} at every event")

# measured event rate against (a sin + b cos) / (1 - a b)
t_total = 5000.0
events = count_events(table, make_state(table, start, theta), t_total)
formula = ((table.a * math.sin(theta) + table.b * math.cos(theta))
           / (1.0 - table.a * table.b))
print(f"\nevents per unit time {events / t_total:.5f}, mean free path "
      f"formula {formula:.5f}")

# displacement growth sampled at powers of ten
times = 10.0 ** np.arange(5)
series = displacement_series(table, make_state(table, start, theta), times)
print("\ndisplacement from the start at geometric times:")
for t, d in zip(series.times, series.distances):
    print(f"  T={t:8.0f}  |x(T)-x(0)| = {d:10.4f}")

# the vertical corridor never meets a scatterer
corridor = displacement_series(table, make_state(table, start, math.pi / 2),
                               times)
print("\nsame schedule along the free vertical corridor (ballistic):")
for t, d in zip(corridor.times, corridor.distances):
    print(f"  T={t:8.0f}  |x(T)-x(0)| = {d:10.4f}")
print(f"corridor reflections: {corridor.events}")
