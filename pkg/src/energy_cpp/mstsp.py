"""Multiple Set TSP: instance construction and a GRASP + tabu search solver.

Every coverage pattern is a node; patterns of the same cell form a set. A
solution picks one node per set and orders the picked nodes into one path
per vehicle, each path starting and ending at that vehicle's depot. Paths
are compared by ``(max path cost, mean path cost)`` lexicographically.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations, product
from typing import NamedTuple

import numpy as np

from .energy import path_energy_fast
from .geometry import ConnectorRouter, NoPathError


class SolutionError(ValueError):
    pass


class SearchSpaceTooLarge(ValueError):
    pass


class CostTuple(NamedTuple):
    max_path_cost: float
    average_path_cost: float


@dataclass(eq=False)
class MstspInstance:
    """Weights of an MS-TSP instance.

    ``edge_weight[x, y]`` is the cost of flying from the end of node ``x``
    to the start of node ``y`` (``inf`` inside a set). ``depot_out[u, x]``
    and ``depot_in[x, u]`` connect vehicle ``u``'s depots with node ``x``.
    """

    sets: list
    node_weight: np.ndarray
    edge_weight: np.ndarray
    depot_out: np.ndarray
    depot_in: np.ndarray
    depots: np.ndarray = None
    end_depots: np.ndarray = None
    node_set: np.ndarray = field(init=False)

    def __post_init__(self):
        self.sets = [np.asarray(s, dtype=int) for s in self.sets]
        self.node_weight = np.asarray(self.node_weight, dtype=float)
        self.edge_weight = np.asarray(self.edge_weight, dtype=float)
        self.depot_out = np.atleast_2d(np.asarray(self.depot_out, dtype=float))
        self.depot_in = np.asarray(self.depot_in, dtype=float).reshape(len(self.node_weight), -1)
        n = len(self.node_weight)
        self.node_set = np.full(n, -1, dtype=int)
        for k, s in enumerate(self.sets):
            if np.any(self.node_set[s] >= 0):
                raise ValueError("a node belongs to more than one set")
            self.node_set[s] = k
        if np.any(self.node_set < 0):
            raise ValueError("every node must belong to a set")
        if self.edge_weight.shape != (n, n):
            raise ValueError("edge_weight must be (n_nodes, n_nodes)")
        if self.depot_out.shape != (self.n_uav, n):
            raise ValueError("depot_out must be (n_uav, n_nodes)")
        same = self.node_set[:, None] == self.node_set[None, :]
        self.edge_weight = np.where(same, np.inf, self.edge_weight)
        for arr in (self.node_weight, self.edge_weight[~same], self.depot_out, self.depot_in):
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError("weights must be finite and >= 0")

    @property
    def n_nodes(self):
        return len(self.node_weight)

    @property
    def n_sets(self):
        return len(self.sets)

    @property
    def n_uav(self):
        return self.depot_out.shape[0]


@dataclass(frozen=True)
class Solution:
    paths: tuple
    costs: tuple

    @property
    def cost(self):
        return _tuple(self.costs)

    def nodes(self):
        return [x for p in self.paths for x in p]


@dataclass(frozen=True)
class SolverParams:
    i_max: int = 2000
    tabu_len: int = 100
    neighborhood_size: int = 30
    rcl_size: int = 3


def _tuple(costs):
    costs = list(costs)
    if not costs:
        return CostTuple(0.0, 0.0)
    return CostTuple(float(max(costs)), float(sum(costs) / len(costs)))


# ---------------------------------------------------------------------------
# instance construction

def build_instance(patterns, region, model, uav_starts, uav_ends=None, router=None, clearance=0.0):
    """Turn coverage patterns into an MS-TSP instance.

    Legs between patterns are flown at cruise speed at both ends; depot legs
    start or end at rest. Every leg follows the shortest route that avoids
    the no-fly zones.
    """
    router = router or ConnectorRouter(region, clearance)
    starts_uav = np.asarray(uav_starts, dtype=float).reshape(-1, 2)
    ends_uav = starts_uav if uav_ends is None else np.asarray(uav_ends, dtype=float).reshape(-1, 2)
    if not region.contains(np.vstack([starts_uav, ends_uav]), tol=router.tol).all():
        raise NoPathError("UAV start/end positions must lie inside the region")

    set_ids = {}
    sets = []
    for i, p in enumerate(patterns):
        k = set_ids.setdefault(p.cell_id, len(set_ids))
        if k == len(sets):
            sets.append([])
        sets[k].append(i)
    node_weight = np.array([p.energy for p in patterns], dtype=float)
    starts = np.array([p.start for p in patterns])
    ends = np.array([p.end for p in patterns])
    node_set = np.empty(len(patterns), dtype=int)
    for k, s in enumerate(sets):
        node_set[s] = k

    vr = model.v_r
    length, via = router.route_many(ends, starts)
    edge = length * (model.P_r / vr)
    for (i, j), v in via.items():
        if node_set[i] == node_set[j]:
            continue
        poly = router.polyline(ends[i], starts[j], v)
        edge[i, j] = path_energy_fast(poly, model, v_start=vr, v_end=vr).energy
    diff = node_set[:, None] != node_set[None, :]
    bad = np.argwhere(diff & ~np.isfinite(edge))
    if len(bad):
        i, j = bad[0]
        raise NoPathError(f"no admissible connector from pattern {i} to pattern {j}")
    edge[~diff] = np.inf

    out_len, out_via = router.route_many(starts_uav, starts)
    in_len, in_via = router.route_many(ends, ends_uav)
    depot_out = np.empty((len(starts_uav), len(patterns)))
    depot_in = np.empty((len(patterns), len(ends_uav)))
    for u in range(len(starts_uav)):
        for x in range(len(patterns)):
            if not np.isfinite(out_len[u, x]):
                raise NoPathError(f"no admissible connector from depot {u} to pattern {x}")
            poly = router.polyline(starts_uav[u], starts[x], out_via.get((u, x)))
            depot_out[u, x] = path_energy_fast(poly, model, v_start=0.0, v_end=vr).energy
            if not np.isfinite(in_len[x, u]):
                raise NoPathError(f"no admissible connector from pattern {x} to depot {u}")
            poly = router.polyline(ends[x], ends_uav[u], in_via.get((x, u)))
            depot_in[x, u] = path_energy_fast(poly, model, v_start=vr, v_end=0.0).energy
    return MstspInstance(sets, node_weight, edge, depot_out, depot_in,
                         depots=starts_uav, end_depots=ends_uav)


# ---------------------------------------------------------------------------
# evaluation

class _Evaluator:
    """Path costs on an extended matrix where depots are extra nodes."""

    def __init__(self, inst, n_paths):
        n = inst.n_nodes
        self.n = n
        self.n_paths = n_paths
        size = n + 2 * n_paths
        W = np.full((size, size), np.inf)
        W[:n, :n] = inst.edge_weight
        for j in range(n_paths):
            u = j % inst.n_uav
            W[n + j, :n] = inst.depot_out[u]
            W[:n, n + n_paths + j] = inst.depot_in[:, u]
            W[n + j, n + n_paths + j] = 0.0
        self.W = W
        self.w = np.zeros(size)
        self.w[:n] = inst.node_weight
        self.Wl = W.tolist()
        self.wl = self.w.tolist()
        self.sets = inst.sets
        self.node_set = inst.node_set

    def ext(self, j, seq):
        return [self.n + j, *seq, self.n + self.n_paths + j]

    def path_cost(self, j, seq):
        if not seq:
            return 0.0
        e = self.ext(j, seq)
        Wl, wl = self.Wl, self.wl
        return sum(Wl[a][b] for a, b in zip(e[:-1], e[1:])) + sum(wl[x] for x in seq)

    def insert_deltas(self, j, seq, xs):
        """Cost increase of inserting each node of ``xs`` at each position of path ``j``."""
        e = np.asarray(self.ext(j, seq))
        prev, nxt = e[:-1, None], e[1:, None]
        W = self.W
        xs = xs[None, :]
        return W[prev, xs] + self.w[xs] + W[xs, nxt] - W[prev, nxt]

    def removal_delta(self, j, seq, i):
        e = self.ext(j, seq)
        a, x, b = e[i], e[i + 1], e[i + 2]
        Wl = self.Wl
        return Wl[a][x] + self.wl[x] + Wl[x][b] - Wl[a][b]


def _candidate_tuples(costs, j, values):
    """Cost tuples when path ``j``'s cost is replaced by each of ``values``."""
    c = np.asarray(costs, dtype=float)
    others = np.delete(c, j)
    other_max = others.max() if len(others) else -np.inf
    maxs = np.maximum(values, other_max)
    means = (c.sum() - c[j] + values) / len(c)
    return maxs, means


def _lexmin(maxs, means):
    order = np.lexsort((means.ravel(), maxs.ravel()))
    return int(order[0])


def solution_cost(sol, inst):
    """``(max path cost, mean path cost)`` of a solution, validating it first."""
    paths = [list(p) for p in sol.paths]
    _validate(paths, inst)
    ev = _Evaluator(inst, len(paths))
    return _tuple(ev.path_cost(j, p) for j, p in enumerate(paths))


def _validate(paths, inst):
    seen = [x for p in paths for x in p]
    if any(x < 0 or x >= inst.n_nodes for x in seen):
        raise SolutionError("solution references an unknown node")
    covered = sorted(int(inst.node_set[x]) for x in seen)
    if covered != list(range(inst.n_sets)):
        raise SolutionError("solution must visit exactly one node of every set")


def _make_solution(ev, paths, costs=None):
    if costs is None:
        costs = [ev.path_cost(j, p) for j, p in enumerate(paths)]
    return Solution(tuple(tuple(int(x) for x in p) for p in paths), tuple(float(c) for c in costs))


# ---------------------------------------------------------------------------
# construction

def grp_initial(inst, n_paths, rng, rcl_size=3):
    """Greedy randomised construction.

    Each round scores every unvisited set by its cheapest insertion (best
    node, best path, best position) and inserts one of the ``rcl_size``
    cheapest sets chosen uniformly at random.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    ev = _Evaluator(inst, n_paths)
    paths = [[] for _ in range(n_paths)]
    costs = [0.0] * n_paths
    unvisited = list(range(inst.n_sets))
    while unvisited:
        options = []
        for s in unvisited:
            xs = inst.sets[s]
            best = None
            for j in range(n_paths):
                d = ev.insert_deltas(j, paths[j], xs)
                maxs, means = _candidate_tuples(costs, j, costs[j] + d)
                k = _lexmin(maxs, means)
                pos, xi = divmod(k, len(xs))
                cand = (CostTuple(float(maxs.ravel()[k]), float(means.ravel()[k])), j, pos, int(xs[xi]))
                if best is None or cand[0] < best[0]:
                    best = cand
            options.append((best[0], s, best))
        options.sort(key=lambda o: (o[0], o[1]))
        rcl = options[:max(1, rcl_size)]
        _, s, (_, j, pos, x) = rcl[int(rng.integers(len(rcl)))]
        paths[j].insert(pos, x)
        costs[j] = ev.path_cost(j, paths[j])
        unvisited.remove(s)
    return _make_solution(ev, paths, costs)


# ---------------------------------------------------------------------------
# tabu search

class _Neighbourhood:
    def __init__(self, ev, rng):
        self.ev = ev
        self.rng = rng

    def _best_replacement(self, paths, costs, j, pos):
        """Swap the node at ``paths[j][pos]`` for the cheapest node of its set."""
        ev = self.ev
        seq = paths[j]
        x = seq[pos]
        xs = ev.sets[ev.node_set[x]]
        if len(xs) == 1:
            return
        rest = seq[:pos] + seq[pos + 1:]
        d = ev.insert_deltas(j, rest, xs)[pos]
        base = ev.path_cost(j, rest)
        k = int(np.argmin(d))
        seq[pos] = int(xs[k])
        costs[j] = base + float(d[k])

    def _pick(self, paths):
        flat = [(j, i) for j, p in enumerate(paths) for i in range(len(p))]
        return flat[int(self.rng.integers(len(flat)))]

    def random_shift(self, paths, costs):
        ev, rng = self.ev, self.rng
        j, i = self._pick(paths)
        x = paths[j].pop(i)
        costs[j] = ev.path_cost(j, paths[j])
        q = int(rng.integers(len(paths)))
        pos = int(rng.integers(len(paths[q]) + 1))
        paths[q].insert(pos, x)
        costs[q] = ev.path_cost(q, paths[q])
        self._best_replacement(paths, costs, q, pos)

    def best_shift(self, paths, costs):
        ev = self.ev
        j, i = self._pick(paths)
        x = paths[j][i]
        costs[j] -= ev.removal_delta(j, paths[j], i)
        paths[j].pop(i)
        xs = ev.sets[ev.node_set[x]]
        best = None
        for q in range(len(paths)):
            d = ev.insert_deltas(q, paths[q], xs)
            maxs, means = _candidate_tuples(costs, q, costs[q] + d)
            k = _lexmin(maxs, means)
            key = (float(maxs.ravel()[k]), float(means.ravel()[k]))
            if best is None or key < best[0]:
                pos, xi = divmod(k, len(xs))
                best = (key, q, pos, int(xs[xi]), float(d.ravel()[k]))
        _, q, pos, y, delta = best
        paths[q].insert(pos, y)
        costs[q] += delta

    def best_swap(self, paths, costs):
        ev = self.ev
        j, i = self._pick(paths)
        x = paths[j][i]
        exts = [ev.ext(q, p) for q, p in enumerate(paths)]
        # every other placed node y, with its path, position and neighbours
        cand = [(q, k, e[k + 1], e[k], e[k + 2])
                for q, e in enumerate(exts) for k in range(len(e) - 2)
                if not (q == j and k == i)]
        if not cand:
            return
        q, k, y, a_y, b_y = (np.array(c) for c in zip(*cand))
        W, w = ev.W, ev.w
        e = exts[j]
        a_x, b_x = e[i], e[i + 2]
        drop_x = W[a_x, x] + w[x] + W[x, b_x]
        d_j = W[a_x, y] + w[y] + W[y, b_x] - drop_x
        d_q = W[a_y, x] + w[x] + W[x, b_y] - (W[a_y, y] + w[y] + W[y, b_y])
        same = q == j
        new_j = np.where(same, costs[j] + d_j + d_q, costs[j] + d_j)
        new_q = np.asarray(costs)[q] + d_q
        after = same & (k == i + 1)
        if after.any():
            yy, bb = y[after], b_y[after]
            new_j[after] = costs[j] + (W[a_x, yy] + W[yy, x] + W[x, bb]
                                       - W[a_x, x] - W[x, yy] - W[yy, bb])
        before = same & (k == i - 1)
        if before.any():
            yy, aa = y[before], a_y[before]
            new_j[before] = costs[j] + (W[aa, x] + W[x, yy] + W[yy, b_x]
                                        - W[aa, yy] - W[yy, x] - W[x, b_x])
        C = np.tile(np.asarray(costs, dtype=float), (len(y), 1))
        rows = np.arange(len(y))
        C[rows[~same], q[~same]] = new_q[~same]
        C[:, j] = new_j
        best = _lexmin(C.max(axis=1), C.mean(axis=1))
        q, k = int(q[best]), int(k[best])
        y = paths[q][k]
        paths[j][i] = y
        paths[q][k] = x
        costs[j] = ev.path_cost(j, paths[j])
        costs[q] = ev.path_cost(q, paths[q])
        self._best_replacement(paths, costs, q, k)
        self._best_replacement(paths, costs, j, i)

    def change_direction(self, paths, costs):
        ev, rng = self.ev, self.rng
        j, i = self._pick(paths)
        x = paths[j][i]
        xs = ev.sets[ev.node_set[x]]
        others = xs[xs != x]
        if len(others) == 0:
            return
        paths[j][i] = int(others[int(rng.integers(len(others)))])
        costs[j] = ev.path_cost(j, paths[j])

    def sample(self, sol):
        paths = [list(p) for p in sol.paths]
        costs = list(sol.costs)
        move = int(self.rng.integers(4))
        (self.random_shift, self.best_shift, self.best_swap, self.change_direction)[move](paths, costs)
        return paths, costs


def tabu_search(inst, init, params=None, rng=None):
    """Improve ``init`` with tabu search over four randomised moves.

    Every iteration samples ``neighborhood_size`` neighbours, moves to the
    cheapest one not in the tabu list and stops after ``i_max`` iterations
    without improving the best solution found.
    """
    params = params or SolverParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    n_paths = len(init.paths)
    ev = _Evaluator(inst, n_paths)
    _validate([list(p) for p in init.paths], inst)
    current = _make_solution(ev, [list(p) for p in init.paths])
    best = current
    if inst.n_sets == 0:
        return best
    tabu = deque([current.paths], maxlen=max(1, params.tabu_len))
    tabu_set = {current.paths}
    hood = _Neighbourhood(ev, rng)
    stale = 0
    while stale < params.i_max:
        chosen = None
        for _ in range(params.neighborhood_size):
            paths, costs = hood.sample(current)
            key = tuple(tuple(p) for p in paths)
            if key in tabu_set:
                continue
            cost = _tuple(costs)
            if chosen is None or cost < chosen[0]:
                chosen = (cost, key, costs)
        if chosen is None:
            stale += 1
            continue
        cost, key, costs = chosen
        # recompute from scratch to keep incremental rounding out of the comparison
        current = _make_solution(ev, [list(p) for p in key])
        if len(tabu) == tabu.maxlen:
            tabu_set.discard(tabu[0])
        tabu.append(key)
        tabu_set.add(key)
        if current.cost < best.cost:
            best = current
            stale = 0
        else:
            stale += 1
    return best


def solve(inst, n_paths, params=None, rng=None):
    """GRP construction followed by tabu search."""
    params = params or SolverParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    init = grp_initial(inst, n_paths, rng, params.rcl_size)
    return tabu_search(inst, init, params, rng)


# ---------------------------------------------------------------------------
# exhaustive oracle

def search_space_size(inst, n_paths):
    m = inst.n_sets
    nodes = math.prod(len(s) for s in inst.sets)
    return math.factorial(m) * nodes * math.comb(m + n_paths - 1, n_paths - 1)


def brute_force_solve(inst, n_paths, limit=10 ** 7):
    """Enumerate every solution and return the lexicographic minimum."""
    size = search_space_size(inst, n_paths)
    if size > limit:
        raise SearchSpaceTooLarge(f"{size} candidate solutions exceed the limit of {limit}")
    ev = _Evaluator(inst, n_paths)
    m = inst.n_sets
    best = None
    for order in permutations(range(m)):
        for choice in product(*(inst.sets[s].tolist() for s in order)):
            for cuts in combinations_with_replacement(range(m + 1), n_paths - 1):
                bounds = (0, *cuts, m)
                paths = [list(choice[bounds[j]:bounds[j + 1]]) for j in range(n_paths)]
                costs = [ev.path_cost(j, p) for j, p in enumerate(paths)]
                key = _tuple(costs)
                if best is None or key < best[0]:
                    best = (key, paths, costs)
    return _make_solution(ev, best[1], best[2])


# ---------------------------------------------------------------------------
# text format

def _fmt(v):
    return "inf" if math.isinf(v) else repr(float(v))


def dump_instance(inst, fh=None):
    """Write ``inst`` in the line-oriented text format; returns the text."""
    buf = io.StringIO()
    w = buf.write
    w("MSTSP 1\n")
    w(f"NODES {inst.n_nodes}\n")
    w(f"SETS {inst.n_sets}\n")
    for s in inst.sets:
        w(" ".join(str(int(x)) for x in s) + "\n")
    w("NODE_WEIGHTS\n")
    w(" ".join(_fmt(v) for v in inst.node_weight) + "\n")
    w(f"UAVS {inst.n_uav}\n")
    if inst.depots is not None:
        ends = inst.end_depots if inst.end_depots is not None else inst.depots
        for (sx, sy), (ex, ey) in zip(inst.depots, ends):
            w(f"DEPOT {_fmt(sx)} {_fmt(sy)} {_fmt(ex)} {_fmt(ey)}\n")
    w("DEPOT_OUT\n")
    for row in inst.depot_out:
        w(" ".join(_fmt(v) for v in row) + "\n")
    w("DEPOT_IN\n")
    for row in inst.depot_in.T:
        w(" ".join(_fmt(v) for v in row) + "\n")
    w("EDGES\n")
    for row in inst.edge_weight:
        w(" ".join(_fmt(v) for v in row) + "\n")
    w("END\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def load_instance(source):
    """Parse the text format produced by :func:`dump_instance`."""
    text = source.read() if hasattr(source, "read") else source
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    it = iter(lines)

    def expect(tag):
        parts = next(it).split()
        if parts[0] != tag:
            raise ValueError(f"expected {tag}, got {parts[0]}")
        return parts[1:]

    def floats(line):
        return [float(v) for v in line.split()]

    expect("MSTSP")
    n = int(expect("NODES")[0])
    m = int(expect("SETS")[0])
    sets = [[int(v) for v in next(it).split()] for _ in range(m)]
    expect("NODE_WEIGHTS")
    node_weight = floats(next(it))
    u = int(expect("UAVS")[0])
    depots, ends = [], []
    line = next(it)
    while line.startswith("DEPOT "):
        vals = floats(line[len("DEPOT "):])
        depots.append(vals[:2])
        ends.append(vals[2:])
        line = next(it)
    if line != "DEPOT_OUT":
        raise ValueError(f"expected DEPOT_OUT, got {line}")
    depot_out = [floats(next(it)) for _ in range(u)]
    expect("DEPOT_IN")
    depot_in = np.array([floats(next(it)) for _ in range(u)]).T
    expect("EDGES")
    edges = np.array([floats(next(it)) for _ in range(n)])
    expect("END")
    return MstspInstance(sets, node_weight, edges, depot_out, depot_in,
                         depots=np.array(depots) if depots else None,
                         end_depots=np.array(ends) if ends else None)
