"""Command line interface: ``plan``, ``validate`` and ``bench``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

from . import io
from .energy import WH, clean_waypoints, path_energy_fast, path_energy_oracle
from .planner import PlanInfeasibleError, plan

log = logging.getLogger("energy_cpp")

VALIDATE_LIMIT = 0.10


def _plan_scenario(path, seed):
    sc = io.load_scenario(path, seed=seed)
    t0 = time.perf_counter()
    result = plan(sc.region, sc.model, sc.config)
    return sc, result, time.perf_counter() - t0


def validation_rows(paths, model, sample_dt=0.05, knot_spacing=None):
    """Fast and oracle energy of every path with their relative deviation.

    Paths with fewer than two distinct waypoints have nothing to compare
    and are skipped.
    """
    rows = []
    for j, p in enumerate(paths):
        if len(clean_waypoints(p)) < 2:
            continue
        fast = path_energy_fast(p, model).energy
        oracle = path_energy_oracle(p, model, sample_dt, knot_spacing=knot_spacing).energy
        rows.append({"path": j, "fast_j": fast, "oracle_j": oracle,
                     "deviation": abs(fast - oracle) / oracle})
    return rows


def run_plan(scenario_path, out_dir=None, seed=None, oracle=False, oracle_dt=None):
    """Plan a scenario file and write every output.

    Returns ``(scenario, plan, seconds, out_dir)``.
    """
    sc, result, elapsed = _plan_scenario(scenario_path, seed)
    out = Path(out_dir or f"{sc.name}_plan")
    out.mkdir(parents=True, exist_ok=True)
    summary = io.plan_summary(result, sc)
    if oracle or sc.output.get("oracle", False):
        dt = oracle_dt or sc.output.get("oracle_dt", 0.05)
        rows = validation_rows(result.paths, sc.model, dt)
        summary["oracle"] = {"sample_dt": dt,
                             "energy_wh": [r["oracle_j"] / WH for r in rows],
                             "max_deviation": max((r["deviation"] for r in rows), default=0.0)}
    # wall-clock time lives apart from the summary so that the summary is reproducible
    io.write_json(summary, out / "summary.json")
    io.write_json({"scenario": sc.name, "computation_time_s": elapsed}, out / "timing.json")
    geo = io.plan_to_geojson(result, sc.frame)
    geo["features"].insert(0, io.region_to_geojson(sc.region, sc.frame))
    io.write_json(geo, out / "paths.geojson")
    io.write_waypoints_csv(result, sc.model, out / "waypoints.csv", sc.frame)
    (out / "plan.svg").write_text(io.plan_svg(result, sc.region))
    return sc, result, elapsed, out


def cmd_plan(args):
    sc, result, elapsed, out = run_plan(args.scenario, args.out, args.seed, args.oracle,
                                        args.oracle_dt)
    print(f"{sc.name}: {result.n_paths} paths, E_max {result.e_max / WH:.2f} Wh, "
          f"E_tot {result.e_tot / WH:.2f} Wh, {result.length / 1000:.2f} km, {elapsed:.1f} s -> {out}")
    return 0


def cmd_validate(args):
    sc, result, _ = _plan_scenario(args.scenario, args.seed)
    rows = validation_rows(result.paths, sc.model, args.oracle_dt, args.knot_spacing)
    print(f"{'path':>4} {'fast[Wh]':>10} {'oracle[Wh]':>11} {'dev[%]':>7}")
    for r in rows:
        flag = "" if r["deviation"] <= VALIDATE_LIMIT else "  > limit"
        print(f"{r['path']:>4} {r['fast_j'] / WH:>10.3f} {r['oracle_j'] / WH:>11.3f} "
              f"{100 * r['deviation']:>7.2f}{flag}")
    worst = max((r["deviation"] for r in rows), default=0.0)
    ok = worst <= VALIDATE_LIMIT
    print(f"max deviation {100 * worst:.2f}% ({'ok' if ok else 'FAIL'}, limit {100 * VALIDATE_LIMIT:.0f}%)")
    return 0 if ok else 1


BENCH_COLUMNS = ["scenario", "n_uav", "E_o[Wh]", "E_t[Wh]", "length[km]", "t_c[s]"]


def cmd_bench(args):
    suite = Path(args.suite_dir) if args.suite_dir else None
    files = sorted(suite.glob("*.json")) if suite else io.bundled_scenarios()
    if not files:
        print(f"no scenario files found in {suite}", file=sys.stderr)
        return 2
    rows = []
    failed = 0
    for f in files:
        try:
            sc, result, elapsed = _plan_scenario(f, args.seed)
        except (io.ScenarioError, PlanInfeasibleError, ValueError) as exc:
            failed += 1
            print(f"{f.stem}: FAILED ({exc})", file=sys.stderr)
            rows.append({"scenario": f.stem, "n_uav": "", "E_o[Wh]": "", "E_t[Wh]": "",
                         "length[km]": "", "t_c[s]": "", "error": str(exc)})
            continue
        # E_o: fast estimate, E_t: trajectory (oracle) estimate, both summed over paths
        e_t = sum(r["oracle_j"] for r in validation_rows(result.paths, sc.model, args.oracle_dt))
        rows.append({"scenario": sc.name, "n_uav": sc.config.n_uav,
                     "E_o[Wh]": f"{result.e_tot / WH:.2f}", "E_t[Wh]": f"{e_t / WH:.2f}",
                     "length[km]": f"{result.length / 1000:.2f}", "t_c[s]": f"{elapsed:.2f}",
                     "error": ""})
    fields = BENCH_COLUMNS + ["error"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 1 if failed else 0


def build_parser():
    ap = argparse.ArgumentParser(prog="energy-cpp",
                                 description="Energy-aware multi-UAV coverage path planning")
    ap.add_argument("-v", "--verbose", action="store_true", help="log planning rounds")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a scenario and write its outputs")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", help="output directory (default: <name>_plan)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--oracle", action="store_true", help="add oracle energies to the summary")
    p.add_argument("--oracle-dt", type=float, help="oracle sampling period [s]")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="compare fast and oracle energy on a planned scenario")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--oracle-dt", type=float, default=0.05)
    p.add_argument("--knot-spacing", type=float,
                   help="add spline knots along long legs (default: waypoints only)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="plan every scenario in a directory and tabulate results")
    p.add_argument("suite_dir", nargs="?", help="directory of scenario files (default: bundled)")
    p.add_argument("--seed", type=int)
    p.add_argument("--oracle-dt", type=float, default=0.05)
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except io.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PlanInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
