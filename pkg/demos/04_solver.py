"""Picking one pattern per cell and ordering them across UAVs.

Builds a tiny random set-TSP instance, runs GRASP plus tabu search and checks
the answer against exhaustive enumeration.

Run: python3 demos/04_solver.py
"""

from __future__ import annotations

import io

import numpy as np

from energy_cpp import MstspInstance, SolverParams, brute_force_solve, solve
from energy_cpp.mstsp import dump_instance, load_instance

rng = np.random.default_rng(7)
sets = [list(range(4 * k, 4 * k + 4)) for k in range(4)]
inst = MstspInstance(sets, rng.uniform(1, 10, 16), rng.uniform(0, 10, (16, 16)),
                     rng.uniform(0, 10, (2, 16)), rng.uniform(0, 10, (16, 2)))

for n_paths in (1, 2):
    got = solve(inst, n_paths, SolverParams(i_max=200), np.random.default_rng(0))
    best = brute_force_solve(inst, n_paths)
    print(f"{n_paths} path(s), (max, mean) path cost: tabu {got.cost.max_path_cost:.3f} / {got.cost.average_path_cost:.3f}, "
          f"exhaustive {best.cost.max_path_cost:.3f} / {best.cost.average_path_cost:.3f}")
    for j, p in enumerate(got.paths):
        print(f"  path {j}: nodes {list(p)}")

buf = io.StringIO()
dump_instance(inst, buf)
again = load_instance(io.StringIO(buf.getvalue()))
print(f"\ntext dump is {len(buf.getvalue().splitlines())} lines and reloads to "
      f"{again.n_sets} sets / {again.n_nodes} nodes")
