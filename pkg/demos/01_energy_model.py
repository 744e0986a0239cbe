"""How much energy does a waypoint path cost?

Walks through the fast estimator on a few toy paths and compares it with the
spline oracle. Run: python3 demos/01_energy_model.py
"""

from __future__ import annotations

import math

import numpy as np

from energy_cpp import WH, UavModel, path_energy_fast, path_energy_oracle, turn_properties
from energy_cpp.energy import segment_energy

model = UavModel(mass=3.5, a_max=2.0, v_r=8.39, P_h=426.03, P_r=465.23, d_max=0.5)

print("Turn speeds: the sharper the corner, the slower the UAV has to enter it.")
for deg in (30, 60, 90, 135, 170):
    tp = turn_properties(math.radians(deg), model)
    print(f"  {deg:3d} deg  v_in {tp.v_in:5.2f} m/s  v_ym {tp.v_ym:5.2f} m/s")

print("\nOne straight 839 m leg, starting and ending at cruise speed:")
rep = segment_energy(839.0, model.v_r, model.v_r, model)
print(f"  {rep.energy:.0f} J = {rep.energy_wh:.3f} Wh over {rep.duration:.1f} s")

print("\nSame 839 m flown from rest to rest (two speed ramps, kinetic energy paid once):")
rep = segment_energy(839.0, 0.0, 0.0, model)
print(f"  {rep.energy:.0f} J over {rep.duration:.1f} s")

# a back-and-forth over a 100 m x 40 m strip, 8 m apart
ys = np.arange(4, 40, 8)
pts = []
for i, y in enumerate(ys):
    xs = (0, 100) if i % 2 == 0 else (100, 0)
    pts += [(xs[0], y), (xs[1], y)]
path = np.array(pts, float)

fast = path_energy_fast(path, model)
oracle = path_energy_oracle(path, model, sample_dt=0.05)
print(f"\nBack-and-forth, {len(ys)} passes, {fast.distance:.0f} m:")
print(f"  fast   {fast.energy / WH:6.2f} Wh  {fast.duration:6.1f} s")
print(f"  oracle {oracle.energy / WH:6.2f} Wh  {oracle.duration:6.1f} s")
print(f"  gap    {100 * (fast.energy - oracle.energy) / oracle.energy:+.1f}%")
