"""Regenerates the bundled scenario files under src/energy_cpp/scenarios.

The areas are synthetic. They are sized so the whole suite plans in about a
minute on one core while still producing more than 30 km of path for the
desk-scale case. Run from the repository root: python3 demos/make_scenarios.py
"""

import json
from energy_cpp.io import LocalFrame
UAV = {"mass": 3.5, "a_max": 2.0, "v_r": 8.39, "P_h": 426.03, "P_r": 465.23, "d_max": 0.5}
def feat(outer, holes=(), frame=None):
    rings = []
    for r in [outer, *holes]:
        pts = frame.to_geo(r).tolist() if frame else [list(map(float, p)) for p in r]
        rings.append(pts + [pts[0]])
    return {"type": "Feature", "properties": {}, "geometry": {"type": "Polygon", "coordinates": rings}}
def solver(i): return {"i_max": i, "tabu_len": 100, "neighborhood_size": 30, "rcl_size": 3}
complex_o=[(0,0),(500,0),(560,150),(700,180),(720,420),(520,520),(460,380),(330,400),(300,620),(120,640),(40,420),(-60,300)]
complex_h=[[(250,150),(360,170),(340,270),(230,250)]]
island_o=[(0,0),(140,-10),(170,60),(120,120),(20,110)]
island_h=[[(60,40),(95,40),(95,70),(60,70)]]
cape=[(0,0),(260,-60),(520,-20),(700,80),(880,60),(1000,240),(940,470),(1010,700),(820,860),(560,800),(380,900),(150,780),(40,560),(-60,330)]
S = {
 "rectangle": dict(description="Axis-aligned 250 m x 150 m field, three UAVs.",
    region=feat([(0,0),(250,0),(250,150),(0,150)]),
    planner=dict(n_uav=3, sweep_step=8, seed=1, uav_starts=[[10,10],[12,10],[14,10]], solver=solver(200))),
 "simple": dict(description="Convex hexagonal field, three UAVs.",
    region=feat([(0,0),(320,30),(360,170),(250,260),(60,230),(-20,120)]),
    planner=dict(n_uav=3, sweep_step=6, seed=2, solver=solver(200))),
 "island": dict(description="Small pentagon with a rectangular no-fly zone, three UAVs.",
    region=feat(island_o, island_h),
    planner=dict(n_uav=3, sweep_step=8, seed=3, solver=solver(300))),
 "complex15": dict(description="Non-convex area with notches and a no-fly zone, 15 m sweep step.",
    region=feat(complex_o, complex_h),
    planner=dict(n_uav=4, sweep_step=15, seed=4, solver=solver(150))),
 "complex10": dict(description="Same area as complex15 with a 10 m sweep step (over 30 km of path).",
    region=feat(complex_o, complex_h),
    planner=dict(n_uav=3, sweep_step=10, seed=5, solver=solver(150))),
}
frame = LocalFrame((169.25, -77.46))
S["cape"] = dict(description="Irregular coastal area given in WGS84 longitude/latitude, 20 m sweep step.",
    origin=[169.25, -77.46], region=feat(cape, frame=frame),
    planner=dict(n_uav=4, sweep_step=20, seed=6, solver=solver(150)))
for name, d in S.items():
    doc = {"name": name, "description": d["description"]}
    if "origin" in d: doc["origin"] = d["origin"]
    doc.update(region=d["region"], uav=UAV, planner=d["planner"], output={"oracle": True, "oracle_dt": 0.05})
    with open(f"src/energy_cpp/scenarios/{name}.json", "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
budget = {"name": "island_budget",
  "description": "Island area flown by one UAV whose battery cannot cover it in a single flight.",
  "region": feat(island_o, island_h), "uav": UAV,
  "planner": {"n_uav": 1, "sweep_step": 8, "seed": 7, "e_bound_wh": 28.0, "solver": solver(200)}}
with open("src/energy_cpp/scenarios/budget/island_budget.json", "w") as fh:
    json.dump(budget, fh, indent=2)
