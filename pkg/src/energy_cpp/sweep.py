"""Back-and-forth coverage patterns for single cells."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import shapely

from .energy import clean_waypoints, path_energy_fast
from .geometry import SweepEdge, feasible_sweep_edges, polyline_length, rotate_points


@dataclass(frozen=True, eq=False)
class SweepPattern:
    cell_id: int
    waypoints: np.ndarray
    energy: float
    sweep_edge: SweepEdge
    direction_variant: int  # 0/1: start near edge.start (fwd/rev), 2/3: near edge.end

    @property
    def start(self):
        return self.waypoints[0]

    @property
    def end(self):
        return self.waypoints[-1]

    def rotated(self, angle):
        """Same pattern rotated about the origin; energy is rotation invariant."""
        edge = SweepEdge(self.sweep_edge.index,
                         rotate_points(self.sweep_edge.start, angle),
                         rotate_points(self.sweep_edge.end, angle))
        return replace(self, waypoints=rotate_points(self.waypoints, angle), sweep_edge=edge)


def _frame(cell, edge):
    """Rotate the cell so ``edge`` runs along +x.

    Chords are offset from the lowest point of the rotated cell. That is the
    edge itself when the edge is a supporting line; otherwise (the cell
    extends to both sides of the edge's line) the whole cell still gets swept.
    """
    theta = edge.angle
    ring = rotate_points(cell.boundary, -theta)
    base = float(ring[:, 1].min())
    return theta, ring, base


def _offsets(height, s, tol):
    if height <= tol:
        return []
    if height < s:
        return [height / 2.0]
    out = []
    o = s / 2.0
    while o < height - tol:
        out.append(o)
        o += s
    if height - out[-1] > s / 2.0 + tol:
        out.append(height - s / 2.0)
    return out


def _chord_at(ring, y):
    p = ring
    q = np.roll(ring, -1, axis=0)
    lo = np.minimum(p[:, 1], q[:, 1])
    hi = np.maximum(p[:, 1], q[:, 1])
    hit = (lo <= y) & (hi >= y)
    xs = []
    for a, b in zip(p[hit], q[hit]):
        if b[1] == a[1]:
            xs.extend([a[0], b[0]])
        else:
            t = (y - a[1]) / (b[1] - a[1])
            xs.append(a[0] + t * (b[0] - a[0]))
    if not xs:
        return None
    return min(xs), max(xs)


def _sweep_frame_chords(ring, base, s):
    tol = 1e-9 * max(1.0, float(np.max(np.abs(ring))))
    height = float(ring[:, 1].max()) - base
    chords = []
    for o in _offsets(height, s, tol):
        y = base + o
        span = _chord_at(ring, y)
        if span is not None:
            chords.append((span[0], span[1], y))
    return chords


def sweep_lines(cell, edge, s):
    """Chords of ``cell`` parallel to ``edge`` at offsets s/2, 3s/2, ...

    Each chord is a 2x2 array ordered from the ``edge.start`` side to the
    ``edge.end`` side.
    """
    if s <= 0:
        raise ValueError("sweep step must be > 0")
    theta, ring, base = _frame(cell, edge)
    out = []
    for x0, x1, y in _sweep_frame_chords(ring, base, s):
        out.append(rotate_points(np.array([[x0, y], [x1, y]]), theta))
    return out


def _side_chains(ring):
    """Right (ascending) and left (descending) boundary chains of a y-monotone ring."""
    n = len(ring)
    y = ring[:, 1]
    tol = 1e-9 * max(1.0, float(np.max(np.abs(ring))))
    ymin, ymax = y.min(), y.max()
    bottoms = np.flatnonzero(y <= ymin + tol)
    start = int(bottoms[np.argmax(ring[bottoms, 0])])
    right = []
    i = start
    for _ in range(n):
        right.append(ring[i])
        if y[i] >= ymax - tol:
            break
        i = (i + 1) % n
    tops = np.flatnonzero(y >= ymax - tol)
    top_left = int(tops[np.argmin(ring[tops, 0])])
    left = []
    i = top_left
    for _ in range(n):
        left.append(ring[i])
        if y[i] <= ymin + tol:
            break
        i = (i + 1) % n
    return np.array(right), np.array(left)


def _chain_between(chain, y0, y1):
    """Chain vertices strictly between heights y0 and y1, in travel order."""
    lo, hi = min(y0, y1), max(y0, y1)
    sel = chain[(chain[:, 1] > lo) & (chain[:, 1] < hi)]
    if len(sel) == 0:
        return sel.reshape(0, 2)
    # keep chain order: sorting by height would scramble horizontal jogs
    ascending = chain[-1, 1] >= chain[0, 1]
    return sel if (y1 >= y0) == ascending else sel[::-1]


def _inside(cell_poly, a, b):
    if cell_poly is None:
        return True
    return cell_poly.covers(shapely.LineString([a, b]))


def _boustrophedon(chords, right, left, start_side, cell_poly=None):
    """Chain chords end to end; start on chord 0 at side 0 (left) or 1 (right).

    A diagonal hop to the far end of the next chord is only taken when it stays
    inside ``cell_poly``; in a non-convex cell it could cut a no-fly zone.
    """
    x0, x1, y = chords[0]
    ends = [np.array([x0, y]), np.array([x1, y])]
    side = start_side
    pts = [ends[side], ends[1 - side]]
    side = 1 - side
    for x0, x1, y_next in chords[1:]:
        cur = pts[-1]
        nxt = [np.array([x0, y_next]), np.array([x1, y_next])]
        chain = right if side == 1 else left
        along = _chain_between(chain, cur[1], y_next)
        same = np.vstack([cur[None], along, nxt[side][None]])
        cross_len = float(np.linalg.norm(nxt[1 - side] - cur))
        if polyline_length(same) <= cross_len or not _inside(cell_poly, cur, nxt[1 - side]):
            pts.extend(along)
            entry = side
        else:
            entry = 1 - side
        pts.append(nxt[entry])
        pts.append(nxt[1 - entry])
        side = 1 - entry
    return np.array(pts)


GAP_TOL = 0.05        # gaps thinner than about 2 * GAP_TOL * s are ignored
MAX_FILL_ROUNDS = 4


def _gap_heights(cell_poly, path, s):
    """Frame heights of chords that would close the gaps ``path`` leaves."""
    swept = shapely.buffer(shapely.LineString(path) if len(path) > 1 else shapely.Point(path[0]),
                           s / 2, quad_segs=16)
    gaps = shapely.difference(cell_poly, swept)
    out = []
    for g in shapely.get_parts(gaps):
        if shapely.buffer(g, -GAP_TOL * s).is_empty:
            continue
        _, y0, _, y1 = g.bounds
        out.append(0.5 * (y0 + y1))
    return out


def _filled_boustrophedon(ring, chords, right, left, start_side, s):
    """Boustrophedon over ``chords`` plus extra chords until the cell is covered.

    A cell side nearly parallel to the chords can leave a wedge that neither
    neighbouring chord reaches; each such wedge gets a chord through it.
    """
    cell_poly = shapely.Polygon(ring)
    # chord ends lie on the boundary; the slack absorbs rounding
    inside = shapely.buffer(cell_poly, 1e-7 * max(1.0, float(np.max(np.abs(ring)))))
    shapely.prepare(inside)
    for _ in range(MAX_FILL_ROUNDS):
        path = _boustrophedon(chords, right, left, start_side, inside)
        have = [c[2] for c in chords]
        new = []
        for y in _gap_heights(cell_poly, path, s):
            span = _chord_at(ring, y)
            if span is not None and min(abs(y - h) for h in have) > GAP_TOL * s:
                new.append((span[0], span[1], y))
                have.append(y)
        if not new:
            break
        chords = sorted(chords + new, key=lambda c: c[2])
    else:
        path = _boustrophedon(chords, right, left, start_side, inside)
    return path


def generate_patterns(cell, model, s, n_e, cell_id=0):
    """Four boustrophedon variants along each of the best sweep edges.

    Variants per edge: start near ``edge.start`` or ``edge.end``, each flown
    forward or reversed.
    """
    if s <= 0 or n_e < 1:
        raise ValueError("need s > 0 and n_e >= 1")
    edges = feasible_sweep_edges(cell, n_e)
    if not edges:
        # cells are always monotone along the decomposition axis
        ring = cell.boundary
        lowest = ring[np.lexsort((ring[:, 1], ring[:, 0]))[0]]
        edges = [SweepEdge(-1, lowest.copy(), lowest - np.array([0.0, 1.0]))]

    patterns = []
    for edge in edges:
        theta, ring, base = _frame(cell, edge)
        chords = _sweep_frame_chords(ring, base, s)
        if not chords:
            wp = cell.centroid[None, :]
            for variant in range(4):
                patterns.append(SweepPattern(cell_id, wp.copy(), 0.0, edge, variant))
            continue
        right, left = _side_chains(ring)
        for start_side in (0, 1):
            frame_path = _filled_boustrophedon(ring, chords, right, left, start_side, s)
            wp = clean_waypoints(rotate_points(frame_path, theta))
            fwd = path_energy_fast(wp, model).energy
            rev_wp = wp[::-1].copy()
            rev = path_energy_fast(rev_wp, model).energy
            patterns.append(SweepPattern(cell_id, wp, fwd, edge, 2 * start_side))
            patterns.append(SweepPattern(cell_id, rev_wp, rev, edge, 2 * start_side + 1))
    return patterns
