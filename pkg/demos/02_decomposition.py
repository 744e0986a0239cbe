"""Cutting an area with a no-fly zone into sweepable cells.

Run: python3 demos/02_decomposition.py
"""

from __future__ import annotations

import math

import numpy as np

from energy_cpp import Region, bcd_decompose, select_best_rotations, split_to_count
from energy_cpp.geometry import rotate_region

outer = np.array([(0, 0), (500, 0), (560, 150), (700, 180), (720, 420), (520, 520),
                  (460, 380), (330, 400), (300, 620), (120, 640), (40, 420), (-60, 300)], float)
nfz = np.array([(250, 150), (360, 170), (340, 270), (230, 250)], float)
region = Region(outer, (nfz,))
print(f"area {region.area:.0f} m^2, one no-fly zone")

# every outer edge direction is a candidate; fewer cells after the cut is better
cands = select_best_rotations(region, 4)
for c in cands:
    print(f"  rotate {math.degrees(c.angle):7.2f} deg -> cost {c.cost:.0f}")

best = cands[0]
cells = bcd_decompose(rotate_region(region, -best.angle))
print(f"\nbest rotation gives {len(cells)} cells:")
for i, c in enumerate(cells):
    print(f"  cell {i}: {len(c.boundary)} vertices, {c.area:8.0f} m^2")
total = sum(c.area for c in cells)
print(f"cells add up to {total:.0f} m^2 (region {region.area:.0f})")

more = split_to_count(cells, 2 * len(cells))
print(f"\nsplitting the widest cells until there are {len(more)} of them")
print("  areas:", ", ".join(f"{c.area:.0f}" for c in sorted(more, key=lambda c: -c.area)))
