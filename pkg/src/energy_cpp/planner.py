"""Energy-aware multi-UAV coverage planning.

The planner searches the most promising area rotations, decomposes the
rotated area, generates sweep patterns for every cell and solves the
resulting MS-TSP instance. When the largest path energy exceeds the battery
budget the number of paths is raised and planning starts over.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import clean_waypoints, path_energy_fast, path_energy_oracle
from .geometry import (ConnectorRouter, bcd_decompose, rotate_region,
                       select_best_rotations, split_to_count)
from .mstsp import SolverParams, build_instance, solve
from .sweep import generate_patterns

log = logging.getLogger(__name__)


class PlanInfeasibleError(RuntimeError):
    """The energy budget could not be met within the path-count cap."""

    def __init__(self, message, best_plan=None):
        super().__init__(message)
        self.best_plan = best_plan


@dataclass(frozen=True)
class PlanConfig:
    n_uav: int = 1
    e_bound: float = math.inf  # J
    n_min: int = 4
    n_angles: int = 7
    n_e: int = 4
    sweep_step: float = 10.0
    solver: SolverParams = field(default_factory=SolverParams)
    seed: int = 0
    max_paths: int = 64
    clearance: float = 0.0
    uav_starts: tuple = None
    uav_ends: tuple = None
    workers: int = 1

    def __post_init__(self):
        if self.n_uav < 1 or self.n_min < 1 or self.n_angles < 1 or self.n_e < 1:
            raise ValueError("n_uav, n_min, n_angles and n_e must be >= 1")
        if not self.sweep_step > 0:
            raise ValueError("sweep_step must be > 0")
        if not self.e_bound > 0:
            raise ValueError("e_bound must be > 0 (use inf for no budget)")
        if self.max_paths < self.n_uav:
            raise ValueError("max_paths must be >= n_uav")
        if self.uav_starts is not None and len(self.uav_starts) != self.n_uav:
            raise ValueError("uav_starts needs one position per UAV")


@dataclass(eq=False)
class Plan:
    paths: list            # waypoint arrays in the world frame, one per flight
    reports: list          # EnergyReport per path (fast estimator)
    path_uav: list         # UAV flying each path
    e_max: float
    e_tot: float
    n_paths: int
    rotation: float
    patterns: list = field(default_factory=list)
    solution: object = None
    trace: list = field(default_factory=list)

    @property
    def length(self):
        return sum(r.distance for r in self.reports)

    def oracle_reports(self, model, sample_dt=0.05):
        out = []
        for p in self.paths:
            if len(clean_waypoints(p)) < 2:
                out.append(path_energy_fast(p, model))
            else:
                out.append(path_energy_oracle(p, model, sample_dt))
        return out


def next_path_count(e_tot, e_bound, n_paths):
    """Path count for the next planning round."""
    return max(math.ceil(e_tot / e_bound), n_paths + 1)


def recover_paths(sol, patterns, region, inst, router=None):
    """Expand a solution into waypoint paths.

    Each path is depot -> connector -> pattern -> connector -> ... -> depot,
    with duplicated junction points removed.
    """
    router = router or ConnectorRouter(region)
    n_uav = inst.n_uav
    ends = inst.end_depots if inst.end_depots is not None else inst.depots
    out = []
    for j, seq in enumerate(sol.paths):
        start = np.asarray(inst.depots[j % n_uav], dtype=float)
        if not seq:
            out.append(start[None, :].copy())
            continue
        pts = [start[None, :]]
        cur = start
        for x in seq:
            pat = patterns[x]
            pts.append(router.path(cur, pat.start)[1:])
            pts.append(pat.waypoints)
            cur = pat.end
        pts.append(router.path(cur, ends[j % n_uav])[1:])
        out.append(clean_waypoints(np.vstack(pts)))
    return out


def _plan_rotation(region, model, cfg, angle, n_paths, router, seed):
    rotated = rotate_region(region, -angle)
    cells = split_to_count(bcd_decompose(rotated), cfg.n_min * n_paths)
    patterns = []
    for i, cell in enumerate(cells):
        for p in generate_patterns(cell, model, cfg.sweep_step, cfg.n_e, cell_id=i):
            patterns.append(p.rotated(angle))
    starts = _starts(region, cfg)
    inst = build_instance(patterns, region, model, starts, cfg.uav_ends, router=router)
    rng = np.random.default_rng(seed)
    sol = solve(inst, n_paths, cfg.solver, rng)
    paths = recover_paths(sol, patterns, region, inst, router)
    reports = [path_energy_fast(p, model) for p in paths]
    energies = [r.energy for r in reports]
    return Plan(paths=paths, reports=reports,
                path_uav=[j % cfg.n_uav for j in range(n_paths)],
                e_max=max(energies), e_tot=sum(energies), n_paths=n_paths,
                rotation=angle, patterns=patterns, solution=sol)


def _starts(region, cfg):
    if cfg.uav_starts is not None:
        return np.asarray(cfg.uav_starts, dtype=float)
    return np.repeat(region.outer[:1], cfg.n_uav, axis=0)


def _run_candidate(args):
    return _plan_rotation(*args)


def plan(region, model, cfg):
    """Plan energy-bounded coverage paths for ``cfg.n_uav`` vehicles."""
    router = ConnectorRouter(region, cfg.clearance)
    angles = [c.angle for c in select_best_rotations(region, cfg.n_angles)]
    n_paths = cfg.n_uav
    best = None
    trace = []
    round_idx = 0
    while True:
        if n_paths > cfg.max_paths:
            raise PlanInfeasibleError(
                f"energy budget {cfg.e_bound:.1f} J not met with up to max_paths={cfg.max_paths} "
                f"paths (best E_max {best.e_max:.1f} J)", best)
        e_max = math.inf
        e_tot = math.inf
        best = None
        jobs = [(region, model, cfg, a, n_paths, router, [cfg.seed, round_idx, k])
                for k, a in enumerate(angles)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                results = list(pool.map(_run_candidate, jobs))
        else:
            results = [_run_candidate(job) for job in jobs]
        for cand in results:
            if cand.e_max < e_max:
                e_max = cand.e_max
                e_tot = cand.e_tot
                best = cand
        trace.append({"n_paths": n_paths, "e_max": e_max, "e_tot": e_tot,
                      "rotation": best.rotation,
                      "candidates": [c.e_max for c in results]})
        log.info("round %d: %d paths, E_max %.1f Wh, E_tot %.1f Wh", round_idx, n_paths,
                 e_max / 3600.0, e_tot / 3600.0)
        if e_max <= cfg.e_bound:
            break
        n_paths = next_path_count(e_tot, cfg.e_bound, n_paths)
        round_idx += 1
    best.trace = trace
    return best
