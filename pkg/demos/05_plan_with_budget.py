"""Planning a fleet mission under a battery budget.

With no budget the planner solves once. With a budget it keeps adding flights
until every flight fits; the trace shows each round.

Run: python3 demos/05_plan_with_budget.py
"""

from __future__ import annotations

import numpy as np

from energy_cpp import WH, PlanConfig, Region, SolverParams, UavModel, plan

model = UavModel(mass=3.5, a_max=2.0, v_r=8.39, P_h=426.03, P_r=465.23, d_max=0.5)
outer = np.array([(0, 0), (140, -10), (170, 60), (120, 120), (20, 110)], float)
nfz = np.array([(60, 40), (95, 40), (95, 70), (60, 70)], float)
region = Region(outer, (nfz,))
solver = SolverParams(i_max=150)

free = plan(region, model, PlanConfig(n_uav=1, sweep_step=8, seed=1, solver=solver))
print(f"one UAV, no budget: {free.e_max / WH:.1f} Wh, {free.length:.0f} m")

bound = 0.6 * free.e_max
cfg = PlanConfig(n_uav=1, sweep_step=8, seed=1, solver=solver, e_bound=bound)
result = plan(region, model, cfg)
print(f"\nbudget {bound / WH:.1f} Wh per flight:")
for t in result.trace:
    print(f"  {t['n_paths']} flights -> longest {t['e_max'] / WH:.1f} Wh, "
          f"total {t['e_tot'] / WH:.1f} Wh")
for j, rep in enumerate(result.reports):
    print(f"  flight {j} (UAV {result.path_uav[j]}): {rep.energy / WH:.1f} Wh, "
          f"{rep.distance:.0f} m, {rep.duration / 60:.1f} min")
