"""Scenario files and plan exports (GeoJSON, CSV, JSON summary, SVG)."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .energy import WH, UavModel, waypoint_speeds
from .geometry import Region
from .mstsp import SolverParams
from .planner import PlanConfig

EARTH_RADIUS = 6371008.8

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["uav", "planner"],
    "oneOf": [{"required": ["region"]}, {"required": ["region_file"]}],
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "region": {"type": "object"},
        "region_file": {"type": "string"},
        "origin": _POINT,
        "uav": {
            "type": "object",
            "required": ["mass", "a_max", "v_r", "P_h", "P_r"],
            "properties": {k: _POS for k in ("mass", "a_max", "v_r", "P_h", "P_r", "d_max")},
            "additionalProperties": False,
        },
        "planner": {
            "type": "object",
            "required": ["n_uav", "sweep_step"],
            "properties": {
                "n_uav": _COUNT,
                "e_bound_wh": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "e_bound_j": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "n_min": _COUNT,
                "n_angles": _COUNT,
                "n_e": _COUNT,
                "sweep_step": _POS,
                "seed": {"type": "integer"},
                "max_paths": _COUNT,
                "clearance": {"type": "number", "minimum": 0},
                "workers": _COUNT,
                "uav_starts": {"type": "array", "items": _POINT},
                "uav_ends": {"type": "array", "items": _POINT},
                "solver": {
                    "type": "object",
                    "properties": {
                        "i_max": _COUNT,
                        "tabu_len": _COUNT,
                        "neighborhood_size": _COUNT,
                        "rcl_size": _COUNT,
                    },
                    "additionalProperties": False,
                },
            },
            "not": {"required": ["e_bound_wh", "e_bound_j"]},
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"oracle": {"type": "boolean"}, "oracle_dt": _POS},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    pass


# ---------------------------------------------------------------------------
# coordinate frames

class LocalFrame:
    """Equirectangular projection about ``origin = (lon, lat)``; identity if None."""

    def __init__(self, origin=None):
        self.origin = None if origin is None else (float(origin[0]), float(origin[1]))

    def to_local(self, coords):
        pts = np.asarray(coords, dtype=float).reshape(-1, 2)
        if self.origin is None:
            return pts
        lon0, lat0 = self.origin
        k = math.pi / 180.0 * EARTH_RADIUS
        x = (pts[:, 0] - lon0) * k * math.cos(math.radians(lat0))
        y = (pts[:, 1] - lat0) * k
        return np.column_stack([x, y])

    def to_geo(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if self.origin is None:
            return pts
        lon0, lat0 = self.origin
        k = math.pi / 180.0 * EARTH_RADIUS
        lon = lon0 + pts[:, 0] / (k * math.cos(math.radians(lat0)))
        lat = lat0 + pts[:, 1] / k
        return np.column_stack([lon, lat])


# ---------------------------------------------------------------------------
# GeoJSON

def _polygon_geometry(obj):
    kind = obj.get("type")
    if kind == "FeatureCollection":
        feats = obj.get("features", [])
        polys = [f for f in feats if (f.get("geometry") or {}).get("type") == "Polygon"]
        if len(polys) != 1:
            raise ScenarioError("region FeatureCollection must hold exactly one Polygon feature")
        return polys[0]["geometry"]
    if kind == "Feature":
        return _polygon_geometry(obj["geometry"])
    if kind == "Polygon":
        return obj
    raise ScenarioError(f"expected a GeoJSON Polygon, got {kind!r}")


def read_region_geojson(obj, frame=None):
    """Region from a GeoJSON Polygon: first ring is the area, the rest no-fly zones."""
    if isinstance(obj, (str, Path)):
        obj = json.loads(Path(obj).read_text())
    frame = frame or LocalFrame()
    rings = _polygon_geometry(obj)["coordinates"]
    if not rings:
        raise ScenarioError("region polygon has no rings")
    outer = frame.to_local(rings[0])
    holes = tuple(frame.to_local(r) for r in rings[1:])
    return Region(outer, holes)


def _ring_coords(ring, frame):
    pts = frame.to_geo(ring)
    pts = np.vstack([pts, pts[:1]])
    return pts.tolist()


def region_to_geojson(region, frame=None):
    frame = frame or LocalFrame()
    outer = region.outer
    holes = [h for h in region.holes]
    # RFC 7946: exterior counter-clockwise, holes clockwise
    return {
        "type": "Feature",
        "properties": {"role": "area_of_interest"},
        "geometry": {"type": "Polygon",
                     "coordinates": [_ring_coords(outer, frame)] + [_ring_coords(h, frame) for h in holes]},
    }


def plan_to_geojson(plan, frame=None):
    frame = frame or LocalFrame()
    feats = []
    for j, (path, rep) in enumerate(zip(plan.paths, plan.reports)):
        pts = frame.to_geo(path)
        if len(pts) == 1:
            pts = np.vstack([pts, pts])
        feats.append({
            "type": "Feature",
            "properties": {"path": j, "uav": int(plan.path_uav[j]),
                           "energy_wh": rep.energy_wh, "energy_j": rep.energy,
                           "duration_s": rep.duration, "length_m": rep.distance},
            "geometry": {"type": "LineString", "coordinates": pts.tolist()},
        })
    return {"type": "FeatureCollection", "features": feats}


def read_paths_geojson(obj, frame=None):
    if isinstance(obj, (str, Path)):
        obj = json.loads(Path(obj).read_text())
    frame = frame or LocalFrame()
    out = []
    for f in obj.get("features", []):
        geom = f.get("geometry") or {}
        if geom.get("type") == "LineString":
            out.append(frame.to_local(geom["coordinates"]))
    return out


# ---------------------------------------------------------------------------
# scenarios

class Scenario:
    def __init__(self, name, region, model, config, frame, output):
        self.name = name
        self.region = region
        self.model = model
        self.config = config
        self.frame = frame
        self.output = output


def load_scenario(path, seed=None):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(data, base=path.parent, default_name=path.stem, seed=seed)


def scenario_from_dict(data, base=Path("."), default_name="scenario", seed=None):
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"scenario schema violation at {where}: {exc.message}") from exc
    frame = LocalFrame(data.get("origin"))
    region_obj = data.get("region")
    if region_obj is None:
        region_obj = json.loads((Path(base) / data["region_file"]).read_text())
    region = read_region_geojson(region_obj, frame)
    model = UavModel(**data["uav"])

    pl = dict(data["planner"])
    solver = SolverParams(**pl.pop("solver", {}))
    e_wh = pl.pop("e_bound_wh", None)
    e_j = pl.pop("e_bound_j", None)
    e_bound = math.inf
    if e_wh is not None:
        e_bound = e_wh * WH
    elif e_j is not None:
        e_bound = float(e_j)
    for key in ("uav_starts", "uav_ends"):
        if key in pl:
            pl[key] = tuple(tuple(p) for p in frame.to_local(pl[key]).tolist())
    if seed is not None:
        pl["seed"] = seed
    try:
        config = PlanConfig(e_bound=e_bound, solver=solver, **pl)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(data.get("name", default_name), region, model, config, frame,
                    data.get("output", {}))


def bundled_scenarios():
    """Paths of the scenario files shipped with the package."""
    root = Path(__file__).with_name("scenarios")
    return sorted(root.glob("*.json"))


# ---------------------------------------------------------------------------
# exports

def plan_summary(plan, scenario):
    cfg = scenario.config
    return {
        "scenario": scenario.name,
        "n_uav": cfg.n_uav,
        "n_paths": plan.n_paths,
        "e_bound_wh": None if math.isinf(cfg.e_bound) else cfg.e_bound / WH,
        "e_max_wh": plan.e_max / WH,
        "e_tot_wh": plan.e_tot / WH,
        "e_max_j": plan.e_max,
        "e_tot_j": plan.e_tot,
        "rotation_deg": math.degrees(plan.rotation),
        "total_length_m": plan.length,
        "paths": [
            {"path": j, "uav": int(plan.path_uav[j]), "energy_wh": r.energy_wh,
             "energy_j": r.energy, "duration_s": r.duration, "length_m": r.distance,
             "n_waypoints": int(len(plan.paths[j]))}
            for j, r in enumerate(plan.reports)
        ],
        "rounds": [{"n_paths": t["n_paths"], "e_max_wh": t["e_max"] / WH,
                    "e_tot_wh": t["e_tot"] / WH} for t in plan.trace],
    }


def write_waypoints_csv(plan, model, path, frame=None):
    frame = frame or LocalFrame()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["uav_id", "path_id", "seq", "x", "y", "v_hint"])
        for j, pts in enumerate(plan.paths):
            speeds = waypoint_speeds(pts, model)
            out = frame.to_geo(pts) if frame.origin else pts
            for k, (xy, v) in enumerate(zip(out, speeds)):
                w.writerow([plan.path_uav[j], j, k, repr(float(xy[0])), repr(float(xy[1])),
                            f"{v:.3f}"])


_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def plan_svg(plan, region, width=800):
    """SVG drawing of the area, no-fly zones and coloured paths."""
    pts = np.vstack([region.outer, *plan.paths])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float((hi - lo).max()), 1e-9)
    pad = 0.03 * span
    scale = width / (span + 2 * pad)
    height = int(math.ceil((hi[1] - lo[1] + 2 * pad) * scale))

    def fmt(ring):
        xy = (np.asarray(ring) - lo + pad) * scale
        xy[:, 1] = height - xy[:, 1]
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in xy)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    out.append(f'<polygon class="aoi" points="{fmt(region.outer)}" fill="#cfe8cf" stroke="#2e7d32"/>')
    for h in region.holes:
        out.append(f'<polygon class="nfz" points="{fmt(h)}" fill="#f4b6b6" stroke="#c62828"/>')
    for j, p in enumerate(plan.paths):
        color = _COLORS[plan.path_uav[j] % len(_COLORS)]
        out.append(f'<polyline class="path" data-path="{j}" points="{fmt(p)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.2"/>')
    starts = {tuple(p[0]) for p in plan.paths}
    for s in sorted(starts):
        xy = fmt(np.array([s])).split(",")
        out.append(f'<circle class="start" cx="{xy[0]}" cy="{xy[1]}" r="4" fill="#c62828"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
