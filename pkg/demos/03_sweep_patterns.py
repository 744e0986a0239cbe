"""Candidate coverage patterns for one cell.

Each feasible sweep edge yields four patterns (two start corners, each flown
either way). The solver later keeps exactly one per cell.

Run: python3 demos/03_sweep_patterns.py
"""

from __future__ import annotations

import numpy as np

from energy_cpp import WH, UavModel, generate_patterns, sweep_lines
from energy_cpp.geometry import Cell, feasible_sweep_edges

model = UavModel(mass=3.5, a_max=2.0, v_r=8.39, P_h=426.03, P_r=465.23, d_max=0.5)
cell = Cell(np.array([(0, 0), (120, 0), (95, 60), (20, 45)], float))
s = 10.0

for edge in feasible_sweep_edges(cell, 3):
    chords = sweep_lines(cell, edge, s)
    print(f"edge {edge.index}: {edge.length:5.1f} m long, {len(chords)} chords")

print()
for p in generate_patterns(cell, model, s, 3):
    start = np.round(p.start, 1)
    print(f"edge {p.sweep_edge.index} variant {p.direction_variant}: "
          f"{len(p.waypoints):2d} waypoints from {start}, {p.energy / WH:.3f} Wh")
