"""Planar geometry for coverage planning.

Regions are an outer ring (counter-clockwise) with no-fly-zone holes
(clockwise), all in a local metric frame. The boustrophedon decomposition
sweeps a vertical line from left to right; cells are therefore monotone
with respect to vertical lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import shapely
from scipy.optimize import brentq
from scipy.sparse.csgraph import shortest_path
from shapely.geometry import Polygon


class GeometryError(ValueError):
    pass


class NoPathError(GeometryError):
    pass


# ---------------------------------------------------------------------------
# ring helpers

def signed_area(ring):
    ring = np.asarray(ring, dtype=float)
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_area(ring):
    return abs(signed_area(ring))


def _scale(ring):
    return max(1.0, float(np.max(np.abs(ring))))


def clean_ring(ring, tol=1e-9):
    """Drop a closing vertex, duplicate vertices and collinear vertices."""
    pts = np.asarray(ring, dtype=float).reshape(-1, 2)
    if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    tol = tol * _scale(pts) if len(pts) else tol
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        prev = np.roll(pts, 1, axis=0)
        nxt = np.roll(pts, -1, axis=0)
        a = pts - prev
        b = nxt - pts
        la = np.linalg.norm(a, axis=1)
        lb = np.linalg.norm(b, axis=1)
        dup = la <= tol
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = np.einsum("ij,ij->i", a, b)
        # drop straight-through vertices; keep reversals (spikes) for validity checks
        collinear = (np.abs(cross) <= tol * np.maximum(la + lb, 1.0)) & (dot > 0)
        drop = dup | collinear
        if drop.any():
            # remove one at a time so neighbours are re-evaluated
            idx = int(np.flatnonzero(drop)[0])
            pts = np.delete(pts, idx, axis=0)
            changed = True
    return pts


def orient(ring, ccw=True):
    ring = np.asarray(ring, dtype=float)
    if (signed_area(ring) > 0) != ccw:
        ring = ring[::-1].copy()
    return ring


def rotation_matrix(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotate_points(points, angle):
    pts = np.asarray(points, dtype=float)
    return pts @ rotation_matrix(angle).T


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True, eq=False)
class Region:
    """Area of interest with no-fly-zone holes."""

    outer: np.ndarray
    holes: tuple = ()

    def __post_init__(self):
        outer = orient(clean_ring(self.outer), ccw=True)
        holes = tuple(orient(clean_ring(h), ccw=False) for h in self.holes)
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)
        if len(outer) < 3 or polygon_area(outer) <= 0:
            raise GeometryError("region outer ring is degenerate (zero area)")
        for h in holes:
            if len(h) < 3 or polygon_area(h) <= 0:
                raise GeometryError("no-fly zone ring is degenerate (zero area)")
        shell = Polygon(outer)
        if not shell.is_valid:
            raise GeometryError("region outer ring is not simple")
        for i, h in enumerate(holes):
            hp = Polygon(h)
            if not hp.is_valid:
                raise GeometryError(f"no-fly zone {i} is not simple")
            if not shell.contains(hp):
                raise GeometryError(f"no-fly zone {i} is not strictly inside the area of interest")
            for j in range(i):
                if hp.intersects(Polygon(holes[j])):
                    raise GeometryError(f"no-fly zones {j} and {i} overlap")

    @cached_property
    def polygon(self):
        return Polygon(self.outer, [h for h in self.holes])

    @property
    def area(self):
        return polygon_area(self.outer) - sum(polygon_area(h) for h in self.holes)

    def rings(self):
        return [self.outer, *self.holes]

    def contains(self, points, tol=1e-6):
        """Vectorised test for points in the free area (outer minus holes)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        geom = self.polygon.buffer(tol, join_style="mitre") if tol > 0 else self.polygon
        shapely.prepare(geom)
        return shapely.covers(geom, shapely.points(pts))


@dataclass(frozen=True, eq=False)
class Cell:
    boundary: np.ndarray
    source_rotation: float = 0.0

    def __post_init__(self):
        ring = orient(clean_ring(self.boundary), ccw=True)
        object.__setattr__(self, "boundary", ring)

    @property
    def area(self):
        return polygon_area(self.boundary)

    @property
    def centroid(self):
        c = Polygon(self.boundary).centroid
        return np.array([c.x, c.y])

    def edges(self):
        ring = self.boundary
        return list(zip(ring, np.roll(ring, -1, axis=0)))


@dataclass(frozen=True)
class RotationCandidate:
    angle: float
    cost: float


@dataclass(frozen=True, eq=False)
class SweepEdge:
    """A boundary edge of a cell that sweep lines run parallel to.

    ``index`` is the edge position in the cell boundary (edge ``i`` goes
    from vertex ``i`` to vertex ``i + 1``); ``-1`` marks the synthetic
    vertical edge used when no boundary edge is feasible.
    """

    index: int
    start: np.ndarray
    end: np.ndarray

    @property
    def length(self):
        return float(np.linalg.norm(self.end - self.start))

    @property
    def angle(self):
        d = self.end - self.start
        return math.atan2(d[1], d[0])


# ---------------------------------------------------------------------------
# operations

def rotate_region(region, angle):
    """Rotate every vertex of ``region`` about the origin by ``angle``."""
    return Region(rotate_points(region.outer, angle),
                  tuple(rotate_points(h, angle) for h in region.holes))


def _cluster(values, tol):
    values = np.sort(values)
    out = [values[0]]
    for v in values[1:]:
        if v - out[-1] > tol:
            out.append(v)
    return np.asarray(out)


@dataclass
class _Piece:
    xa: float
    xb: float
    bottom: tuple  # (y at xa, y at xb)
    top: tuple


@dataclass
class _Chain:
    pieces: list = field(default_factory=list)


def _edge_array(rings):
    segs = []
    for ring in rings:
        segs.append(np.hstack([ring, np.roll(ring, -1, axis=0)]))
    return np.vstack(segs)


def bcd_decompose(region):
    """Boustrophedon cellular decomposition with a vertical sweep line.

    The free space is cut into slabs at every vertex abscissa; slab pieces
    are then glued left to right whenever the vertical chord they share is
    identical, i.e. wherever the sweep line neither splits, merges nor jumps.
    """
    rings = region.rings()
    if region.area <= 0:
        raise GeometryError("cannot decompose a region with zero area")
    scale = max(_scale(r) for r in rings)
    xtol = 1e-9 * scale
    ytol = 1e-7 * scale
    segs = _edge_array(rings)
    x0, y0, x1, y1 = segs.T
    lo = np.minimum(x0, x1)
    hi = np.maximum(x0, x1)
    xs = _cluster(np.concatenate([r[:, 0] for r in rings]), xtol)

    cells = []
    open_chains = []  # (chain, right chord) for chains ending at the previous slab
    for k in range(len(xs) - 1):
        xa, xb = xs[k], xs[k + 1]
        xm = 0.5 * (xa + xb)
        hit = np.flatnonzero((lo < xm) & (hi > xm))
        slope = (y1[hit] - y0[hit]) / (x1[hit] - x0[hit])
        ym = y0[hit] + slope * (xm - x0[hit])
        ya = y0[hit] + slope * (xa - x0[hit])
        yb = y0[hit] + slope * (xb - x0[hit])
        order = np.argsort(ym, kind="stable")
        pieces = []
        for j in range(0, len(order) - 1, 2):
            b, t = order[j], order[j + 1]
            pieces.append(_Piece(xa, xb, (ya[b], yb[b]), (ya[t], yb[t])))

        next_open = []
        for piece in pieces:
            left = (piece.bottom[0], piece.top[0])
            match = None
            for idx, (chain, chord) in enumerate(open_chains):
                if abs(chord[0] - left[0]) <= ytol and abs(chord[1] - left[1]) <= ytol:
                    match = idx
                    break
            if match is None:
                chain = _Chain()
            else:
                chain = open_chains.pop(match)[0]
            chain.pieces.append(piece)
            next_open.append((chain, (piece.bottom[1], piece.top[1])))
        cells.extend(chain for chain, _ in open_chains)
        open_chains = next_open
    cells.extend(chain for chain, _ in open_chains)

    out = []
    for chain in cells:
        lower = [(p.xa, p.bottom[0]) for p in chain.pieces] + [(chain.pieces[-1].xb, chain.pieces[-1].bottom[1])]
        upper = [(p.xa, p.top[0]) for p in chain.pieces] + [(chain.pieces[-1].xb, chain.pieces[-1].top[1])]
        ring = np.array(lower + upper[::-1])
        out.append(Cell(ring))
    out.sort(key=lambda c: (float(c.boundary[:, 0].min()), float(c.boundary[:, 1].min())))
    return out


def rotation_cost(cells):
    """Sum of the vertical extents of ``cells``."""
    return float(sum(c.boundary[:, 1].max() - c.boundary[:, 1].min() for c in cells))


def select_best_rotations(region, n_angles):
    """Rank the outer-ring edge directions by decomposition cost.

    For each edge direction ``theta`` the region is rotated by ``-theta``
    (aligning the edge with the x axis), decomposed and scored with
    :func:`rotation_cost`. The ``n_angles`` cheapest are returned, cheapest
    first, ties broken by the smaller angle.
    """
    if n_angles < 1:
        raise ValueError("n_angles must be >= 1")
    ring = region.outer
    d = np.roll(ring, -1, axis=0) - ring
    angles = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * math.pi)
    cands = []
    for theta in angles:
        cells = bcd_decompose(rotate_region(region, -theta))
        cands.append(RotationCandidate(float(theta), rotation_cost(cells)))
    # costs equal up to rounding count as ties
    cands.sort(key=lambda c: (round(c.cost, 6), c.angle))
    return cands[:n_angles]


def clip_vertical(ring, x, keep_left):
    """Clip a polygon ring by the half-plane ``X <= x`` (or ``X >= x``)."""
    ring = np.asarray(ring, dtype=float)
    sign = 1.0 if keep_left else -1.0
    inside = sign * (x - ring[:, 0]) >= 0
    out = []
    n = len(ring)
    for i in range(n):
        p, q = ring[i], ring[(i + 1) % n]
        pin, qin = inside[i], inside[(i + 1) % n]
        if pin:
            out.append(p)
        if pin != qin:
            t = (x - p[0]) / (q[0] - p[0])
            out.append(np.array([x, p[1] + t * (q[1] - p[1])]))
    return np.asarray(out)


def _bisect_cell(cell):
    ring = cell.boundary
    total = cell.area
    xmin, xmax = float(ring[:, 0].min()), float(ring[:, 0].max())

    def left_area(x):
        part = clip_vertical(ring, x, True)
        return (polygon_area(part) if len(part) >= 3 else 0.0) - total / 2.0

    x = brentq(left_area, xmin, xmax, xtol=1e-12 * max(1.0, abs(xmax)), rtol=1e-14)
    return (Cell(clip_vertical(ring, x, True), cell.source_rotation),
            Cell(clip_vertical(ring, x, False), cell.source_rotation))


def split_to_count(cells, target):
    """Bisect the largest cell with a vertical line until ``target`` cells exist."""
    if target < 1:
        raise ValueError("target must be >= 1")
    cells = list(cells)
    while len(cells) < target:
        idx = max(range(len(cells)), key=lambda i: (cells[i].area, -i))
        left, right = _bisect_cell(cells.pop(idx))
        cells[idx:idx] = [left, right]
    return cells


def is_monotone(ring, direction, tol=1e-9):
    """True when every line perpendicular to ``direction`` meets the ring once.

    Equivalently, projecting the boundary onto ``direction`` gives exactly
    one ascending and one descending run.
    """
    ring = np.asarray(ring, dtype=float)
    direction = np.asarray(direction, dtype=float)
    h = ring @ (direction / np.linalg.norm(direction))
    tol = tol * _scale(ring)
    dh = np.diff(np.append(h, h[0]))
    signs = np.sign(np.where(np.abs(dh) <= tol, 0.0, dh))
    signs = signs[signs != 0]
    if len(signs) == 0:
        return False
    changes = int(np.count_nonzero(signs != np.roll(signs, 1)))
    return changes == 2


def feasible_sweep_edges(cell, n_e):
    """Up to ``n_e`` longest boundary edges whose sweep direction is feasible.

    Sweeping along an edge means chords parallel to it; this is feasible
    when each such line meets the cell in a single segment.
    """
    ring = cell.boundary
    edges = []
    for i, (p, q) in enumerate(cell.edges()):
        d = q - p
        normal = np.array([-d[1], d[0]])
        if is_monotone(ring, normal):
            edges.append(SweepEdge(i, p.copy(), q.copy()))
    edges.sort(key=lambda e: (-e.length, e.index))
    return edges[:n_e]


# ---------------------------------------------------------------------------
# connector routing

class ConnectorRouter:
    """Shortest obstacle-avoiding polylines inside a region.

    Routes run on the visibility graph of the query points and the region's
    vertices; no-fly-zone vertices can be pushed outward by ``clearance``.
    A leg is admissible when it stays inside the outer ring and out of every
    hole interior (touching boundaries is allowed).
    """

    def __init__(self, region, clearance=0.0, tol=1e-6):
        self.region = region
        self.clearance = clearance
        scale = max(_scale(r) for r in region.rings())
        self.tol = tol * max(1.0, scale / 1000.0)
        self._free = region.polygon.buffer(self.tol, join_style="mitre")
        shapely.prepare(self._free)

        verts = [region.outer]
        for h in region.holes:
            if clearance > 0:
                grown = Polygon(h).buffer(clearance, join_style="mitre")
                verts.append(np.asarray(grown.exterior.coords)[:-1])
            else:
                verts.append(h)
        v = np.vstack(verts)
        v = v[shapely.covers(self._free, shapely.points(v))]
        self.vertices = v
        n = len(v)
        if n:
            vis = self.visible_matrix(v, v)
            dist = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)
            graph = np.where(vis, dist, 0.0)
            np.fill_diagonal(graph, 0.0)
            self._dist, self._pred = shortest_path(graph, method="D", directed=False,
                                                   return_predecessors=True)
        else:
            self._dist = np.zeros((0, 0))
            self._pred = np.zeros((0, 0), dtype=int)

    def visible(self, p, q):
        """Elementwise admissibility of straight legs ``p[i] -> q[i]``."""
        p = np.asarray(p, dtype=float).reshape(-1, 2)
        q = np.asarray(q, dtype=float).reshape(-1, 2)
        if len(p) == 0:
            return np.zeros(0, dtype=bool)
        lines = shapely.linestrings(np.stack([p, q], axis=1))
        same = np.all(np.abs(p - q) <= 1e-12, axis=1)
        if same.any():
            out = np.empty(len(p), dtype=bool)
            out[same] = shapely.covers(self._free, shapely.points(p[same]))
            if (~same).any():
                out[~same] = shapely.covers(self._free, lines[~same])
            return out
        return shapely.covers(self._free, lines)

    def visible_matrix(self, a, b):
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        p = np.repeat(a, len(b), axis=0)
        q = np.tile(b, (len(a), 1))
        return self.visible(p, q).reshape(len(a), len(b))

    def _vertex_path(self, i, j):
        seq = [j]
        while seq[-1] != i:
            k = self._pred[i, seq[-1]]
            if k < 0:
                raise NoPathError("vertex graph is disconnected")
            seq.append(k)
        return seq[::-1]

    def route_many(self, a, b):
        """Shortest routes between every point of ``a`` and every point of ``b``.

        Returns ``(length, via)`` where ``length[i, j]`` is the route length
        (``inf`` when unreachable) and ``via[i, j]`` is ``None`` for a
        straight leg or the pair of graph vertices entered and left.
        """
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        straight = self.visible_matrix(a, b)
        direct = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
        length = np.where(straight, direct, np.inf)
        via = {}
        blocked = np.argwhere(~straight)
        if len(blocked) and len(self.vertices):
            va = np.where(self.visible_matrix(a, self.vertices),
                          np.linalg.norm(a[:, None] - self.vertices[None], axis=2), np.inf)
            vb = np.where(self.visible_matrix(b, self.vertices),
                          np.linalg.norm(b[:, None] - self.vertices[None], axis=2), np.inf)
            # best entry vertex u for every (point in a, exit vertex v)
            through = va[:, :, None] + self._dist[None, :, :]
            entry = np.argmin(through, axis=1)
            to_v = np.take_along_axis(through, entry[:, None, :], axis=1)[:, 0, :]
            for i, j in blocked:
                tot = to_v[i] + vb[j]
                v = int(np.argmin(tot))
                if np.isfinite(tot[v]):
                    length[i, j] = tot[v]
                    via[(int(i), int(j))] = (int(entry[i, v]), v)
        return length, via

    def polyline(self, p, q, via):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if via is None:
            return np.array([p, q])
        u, v = via
        inner = self.vertices[self._vertex_path(u, v)]
        return np.vstack([p, inner, q])

    def path(self, p, q):
        """Shortest admissible polyline from ``p`` to ``q``."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if not shapely.covers(self._free, shapely.points(np.array([p, q]))).all():
            raise GeometryError("connector endpoints must lie inside the region")
        length, via = self.route_many(p[None], q[None])
        if not np.isfinite(length[0, 0]):
            raise NoPathError(f"no admissible path from {tuple(p)} to {tuple(q)}")
        if np.linalg.norm(p - q) <= 1e-12:
            return np.array([p])
        return self.polyline(p, q, via.get((0, 0)))


def connector_path(p, q, region, clearance=0.0):
    """Shortest polyline from ``p`` to ``q`` that stays out of every no-fly zone."""
    return ConnectorRouter(region, clearance).path(p, q)


def polyline_length(pts):
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
