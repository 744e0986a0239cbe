"""Multirotor energy model.

Two estimators are provided for a waypoint path flown at the optimal-range
speed ``v_r``:

* :func:`path_energy_fast` works directly on the waypoints in O(N). Every turn
  limits the speed through it, every segment gets a trapezoidal (or
  triangular) speed profile.
* :func:`path_energy_oracle` interpolates the path with a cubic spline, builds
  a curvature- and acceleration-limited speed profile with a forward/backward
  pass, samples it in time and integrates.

Power below ``v_r`` is approximated by hover power, power at ``v_r`` by
``P_r``. Kinetic energy is only charged for speed increases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

WH = 3600.0

_PHI_EPS = 1e-6


class InfeasibleSegmentError(ValueError):
    """Raised when a segment is too short for the requested speed change."""

    def __init__(self, message, min_length):
        super().__init__(message)
        self.min_length = min_length


@dataclass(frozen=True)
class UavModel:
    mass: float
    a_max: float
    v_r: float
    P_h: float
    P_r: float
    d_max: float = 0.5

    def __post_init__(self):
        for name in ("mass", "a_max", "v_r", "P_h", "P_r", "d_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"UavModel.{name} must be finite and > 0, got {value!r}")

    def power(self, v):
        """Electrical power at speed ``v`` (step model)."""
        return self.P_r if v >= self.v_r * (1.0 - 1e-12) else self.P_h


@dataclass(frozen=True)
class TurnProfile:
    phi: float
    a_x: float
    a_y: float
    dv_x: float
    dv_y: float
    v_ym: float
    v_in: float


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    duration: float
    distance: float

    @property
    def energy_wh(self):
        return self.energy / WH

    def __add__(self, other):
        return EnergyReport(self.energy + other.energy,
                            self.duration + other.duration,
                            self.distance + other.distance)


ZERO_REPORT = EnergyReport(0.0, 0.0, 0.0)


def turn_properties(phi, model):
    """Speeds allowed through a turn of angle ``phi``.

    ``phi`` is the heading change at the waypoint (0 for a straight
    continuation, pi for a U-turn). ``v_in`` is the highest speed at which
    the turn can be entered, ``v_ym`` the speed component kept along the
    incoming direction at the middle of the turn.
    """
    if not math.isfinite(phi):
        raise ValueError(f"turning angle must be finite, got {phi!r}")
    phi = min(max(phi, _PHI_EPS), math.pi - _PHI_EPS)
    half = phi / 2.0
    a_x = model.a_max * math.cos(half)
    a_y = model.a_max * math.sin(half)
    dv_x = min(math.sqrt(2.0 * model.d_max * a_x),
               math.cos(math.pi / 2.0 - phi) * model.v_r / 2.0)
    dv_y = math.tan(half) * dv_x
    v_ym = dv_x / math.tan(half)
    v_in = v_ym + dv_y
    v_ym = min(max(v_ym, 0.0), model.v_r)
    v_in = min(max(v_in, 0.0), model.v_r)
    return TurnProfile(phi, a_x, a_y, dv_x, dv_y, v_ym, v_in)


def segment_energy(length, v_entry, v_exit, model):
    """Energy of one straight segment with a trapezoidal speed profile.

    The vehicle accelerates at ``a_max`` from ``v_entry`` towards ``v_r``,
    cruises if ``v_r`` is reachable and brakes at ``a_max`` to ``v_exit``.
    When ``v_r`` cannot be reached the profile is triangular.
    """
    a = model.a_max
    vr = model.v_r
    if length < 0:
        raise ValueError(f"segment length must be >= 0, got {length}")
    if v_entry < 0 or v_exit < 0 or v_entry > vr * (1 + 1e-12) or v_exit > vr * (1 + 1e-12):
        raise ValueError(f"boundary speeds must lie in [0, v_r], got {v_entry}, {v_exit}")
    v_entry = min(v_entry, vr)
    v_exit = min(v_exit, vr)
    slack = 1e-9 * max(1.0, vr * vr)
    if v_entry ** 2 - v_exit ** 2 > 2 * a * length + slack:
        need = (v_entry ** 2 - v_exit ** 2) / (2 * a)
        raise InfeasibleSegmentError(
            f"cannot brake from {v_entry:.4g} to {v_exit:.4g} m/s within {length:.4g} m "
            f"(needs {need:.4g} m)", need)
    if v_exit ** 2 - v_entry ** 2 > 2 * a * length + slack:
        need = (v_exit ** 2 - v_entry ** 2) / (2 * a)
        raise InfeasibleSegmentError(
            f"cannot accelerate from {v_entry:.4g} to {v_exit:.4g} m/s within {length:.4g} m "
            f"(needs {need:.4g} m)", need)

    half_m = 0.5 * model.mass
    v_peak_sq = (2 * a * length + v_entry ** 2 + v_exit ** 2) / 2.0
    if v_peak_sq >= vr * vr:
        t_acc = (vr - v_entry) / a
        t_dec = (vr - v_exit) / a
        d_acc = (vr ** 2 - v_entry ** 2) / (2 * a)
        d_dec = (vr ** 2 - v_exit ** 2) / (2 * a)
        d_cruise = max(length - d_acc - d_dec, 0.0)
        t_cruise = d_cruise / vr
        energy = (half_m * (vr ** 2 - v_entry ** 2)
                  + model.P_h * (t_acc + t_dec) + model.P_r * t_cruise)
        return EnergyReport(energy, t_acc + t_dec + t_cruise, length)

    v_peak = math.sqrt(max(v_peak_sq, v_entry ** 2, v_exit ** 2))
    duration = (v_peak - v_entry) / a + (v_peak - v_exit) / a
    energy = half_m * (v_peak ** 2 - v_entry ** 2) + model.P_h * duration
    return EnergyReport(energy, duration, length)


def clean_waypoints(waypoints, tol=1e-9):
    """Drop consecutive duplicate waypoints."""
    pts = np.asarray(waypoints, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > tol
    return pts[keep]


def turning_angles(pts):
    """Heading change at every interior waypoint of ``pts``."""
    d = np.diff(pts, axis=0)
    if len(d) < 2:
        return np.empty(0)
    a, b = d[:-1], d[1:]
    cos = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    return np.arccos(np.clip(cos, -1.0, 1.0))


def _legs(waypoints, tol=1e-9):
    """Leg lengths and interior turning angles, skipping duplicate waypoints.

    Plain floats: connector legs have a handful of points and numpy's
    per-call overhead would dominate.
    """
    pts = np.asarray(waypoints, dtype=float).reshape(-1, 2).tolist()
    lengths, dirs = [], []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        dx, dy = x1 - x0, y1 - y0
        d = math.hypot(dx, dy)
        if d > tol:
            lengths.append(d)
            dirs.append((dx, dy))
    angles = []
    for (ax, ay), (bx, by), la, lb in zip(dirs, dirs[1:], lengths, lengths[1:]):
        c = (ax * bx + ay * by) / (la * lb)
        angles.append(math.acos(min(1.0, max(-1.0, c))))
    return lengths, angles


def _fast_profile(lengths, angles, model, v_start, v_end):
    turns = [turn_properties(phi, model) for phi in angles]
    a2 = 2.0 * model.a_max
    entry = min(v_start, model.v_r)
    segments = []
    for i, length in enumerate(lengths):
        last = i == len(lengths) - 1
        cap = v_end if last else turns[i].v_in
        exit_ = min(cap, model.v_r, math.sqrt(entry * entry + a2 * length))
        if entry * entry - exit_ * exit_ > a2 * length:
            entry = math.sqrt(exit_ * exit_ + a2 * length)
        segments.append((length, entry, exit_))
        if not last:
            entry = min(turns[i].v_ym, exit_)
    return segments


def path_energy_fast(waypoints, model, v_start=0.0, v_end=0.0):
    """O(N) energy estimate of a waypoint path.

    ``v_start``/``v_end`` are the speeds at the first and last waypoint
    (rest by default).
    """
    lengths, angles = _legs(waypoints)
    if not lengths:
        return ZERO_REPORT
    energy = duration = distance = 0.0
    for length, v_in, v_out in _fast_profile(lengths, angles, model, v_start, v_end):
        rep = segment_energy(length, v_in, v_out, model)
        energy += rep.energy
        duration += rep.duration
        distance += rep.distance
    return EnergyReport(energy, duration, distance)


def waypoint_speeds(waypoints, model, v_start=0.0, v_end=0.0):
    """Speed the fast estimator assumes at each (deduplicated) waypoint."""
    lengths, angles = _legs(waypoints)
    if not lengths:
        return np.zeros(len(clean_waypoints(waypoints)))
    segments = _fast_profile(lengths, angles, model, v_start, v_end)
    speeds = [segments[0][1]] + [seg[2] for seg in segments]
    return np.asarray(speeds)


def _spline_samples(pts, ds):
    chord = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    knots = np.concatenate([[0.0], np.cumsum(chord)])
    if len(pts) == 2:
        n = max(2, int(math.ceil(chord[0] / ds)) + 1)
        t = np.linspace(0.0, knots[-1], n)
        xy = pts[0] + np.outer(t / knots[-1], pts[1] - pts[0])
        return xy, np.zeros(n)
    spline = CubicSpline(knots, pts, bc_type="natural")
    per_piece = np.maximum(np.ceil(chord / ds).astype(int), 4)
    t = np.concatenate([np.linspace(knots[i], knots[i + 1], per_piece[i], endpoint=False)
                        for i in range(len(chord))] + [knots[-1:]])
    xy = spline(t)
    d1 = spline(t, 1)
    d2 = spline(t, 2)
    cross = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    speed = np.linalg.norm(d1, axis=1)
    kappa = cross / np.maximum(speed, 1e-12) ** 3
    return xy, kappa


def densify(waypoints, spacing):
    """Insert collinear points so that no segment is longer than ``spacing``."""
    pts = np.asarray(waypoints, dtype=float)
    if len(pts) < 2:
        return pts.copy()
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / spacing)))
        t = np.arange(1, k + 1)[:, None] / k
        out.append(a + t * (b - a))
    return np.vstack(out)


def path_energy_oracle(waypoints, model, sample_dt=0.05, v_start=0.0, v_end=0.0, ds=0.1,
                       knot_spacing=None):
    """Trajectory-generation energy estimate (reference for the fast method).

    The path is interpolated with a natural cubic spline over chord length,
    a speed profile honouring ``v_r``, the tangential limit ``a_max`` and the
    centripetal limit ``sqrt(a_max / kappa)`` is built on an arc-length grid
    of spacing ``ds``, and the timed trajectory is sampled every
    ``sample_dt`` seconds.

    By default the spline passes through the given waypoints only, so long
    legs let it swing wide of the polyline. ``knot_spacing`` adds collinear
    knots along each leg, which keeps the trajectory close to the path.
    """
    if sample_dt <= 0:
        raise ValueError("sample_dt must be > 0")
    pts = clean_waypoints(waypoints)
    if len(pts) < 2:
        raise ValueError("the oracle estimator needs at least 2 distinct waypoints")
    if knot_spacing is not None:
        pts = densify(pts, knot_spacing)

    xy, kappa = _spline_samples(pts, ds)
    step = np.linalg.norm(np.diff(xy, axis=0), axis=1)
    a = model.a_max
    vr = model.v_r
    with np.errstate(divide="ignore"):
        vmax = np.minimum(vr, np.sqrt(a / kappa))

    v = vmax.copy()
    v[0] = min(v[0], v_start)
    v[-1] = min(v[-1], v_end)
    two_a_ds = 2.0 * a * step
    for i in range(len(step)):
        reach = math.sqrt(v[i] * v[i] + two_a_ds[i])
        if v[i + 1] > reach:
            v[i + 1] = reach
    for i in range(len(step) - 1, -1, -1):
        reach = math.sqrt(v[i + 1] * v[i + 1] + two_a_ds[i])
        if v[i] > reach:
            v[i] = reach

    vsum = v[:-1] + v[1:]
    dt = np.divide(2.0 * step, vsum, out=np.zeros_like(step), where=vsum > 0)
    t = np.concatenate([[0.0], np.cumsum(dt)])
    total_time = float(t[-1])
    n = int(math.floor(total_time / sample_dt))
    ts = np.append(np.arange(n + 1) * sample_dt, total_time)
    ts = ts[np.concatenate([[True], np.diff(ts) > 1e-12])]
    vs = np.interp(ts, t, v)

    dts = np.diff(ts)
    power = np.where(vs[:-1] >= vr * (1.0 - 1e-9), model.P_r, model.P_h)
    dke = 0.5 * model.mass * np.diff(vs ** 2)
    energy = float(np.sum(np.maximum(dke, 0.0)) + np.sum(power * dts))
    return EnergyReport(energy, total_time, float(np.sum(step)))
