"""Slow reference implementations used only by the test suite.

Each function here recomputes a result the library produces by a faster or
structurally different algorithm, so the two can be compared independently:
plain Dijkstra and branch-and-bound search for grid paths, dense ray marching
for ray/box hits, a Graham-scan point classifier for occupancy labels, and a
loop-free rescoring of action chains. Everything is deliberately simple and
guarded by OracleTooLarge rather than optimized.
"""

from __future__ import annotations

import heapq
import math
from typing import Optional, Sequence

import numpy as np

from .errors import OracleTooLarge
from .geometry import Box3D, Vec3
from .kernels import FREE, SQRT2

_DIRS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

_MAX_DIJKSTRA_CELLS = 64 * 64
_MAX_BRUTE_CELLS = 100


def dijkstra_path(cells, sr, sc, gr, gc, turn_penalty):
    """Optimal path cost by uniform-cost search over (cell, direction) states.

    Same cost model as the A* kernels (that is the contract under test) but a
    different search: no heuristic, dict-based distances, lazy deletion.
    Returns (cost, ncard, ndiag, nturns) or None when unreachable.
    """
    h, w = cells.shape
    if h * w > _MAX_DIJKSTRA_CELLS:
        raise OracleTooLarge("dijkstra oracle capped at {} cells".format(_MAX_DIJKSTRA_CELLS))
    if cells[sr, sc] != FREE or cells[gr, gc] != FREE:
        return None
    if (sr, sc) == (gr, gc):
        return 0.0, 0, 0, 0

    dist: dict[tuple[int, int, int], float] = {(sr, sc, 8): 0.0}
    counts = {(sr, sc, 8): (0, 0, 0)}
    heap = [(0.0, sr * w + sc, 8)]
    done: set[tuple[int, int, int]] = set()
    best_goal = None
    while heap:
        g, idx, d_in = heapq.heappop(heap)
        r, c = divmod(idx, w)
        key = (r, c, d_in)
        if key in done:
            continue
        done.add(key)
        if (r, c) == (gr, gc):
            if best_goal is None or g < best_goal[0]:
                best_goal = (g,) + counts[key]
            continue
        ncard, ndiag, nturn = counts[key]
        for d, (dr, dc) in enumerate(_DIRS):
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or cells[nr, nc] != FREE:
                continue
            if dr != 0 and dc != 0:
                if cells[r, nc] != FREE or cells[nr, c] != FREE:
                    continue
                t = (ncard, ndiag + 1, nturn + (1 if d_in != 8 and d_in != d else 0))
            else:
                t = (ncard + 1, ndiag, nturn + (1 if d_in != 8 and d_in != d else 0))
            ng = t[0] + t[1] * SQRT2 + t[2] * turn_penalty
            nkey = (nr, nc, d)
            if ng < dist.get(nkey, math.inf):
                dist[nkey] = ng
                counts[nkey] = t
                heapq.heappush(heap, (ng, nr * w + nc, d))
    return best_goal


def brute_force_path_cost(cells, sr, sc, gr, gc, turn_penalty, node_cap=5_000_000):
    """Optimal path cost by exhaustive search over simple paths.

    Depth-first branch-and-bound; branches are cut only when the cost so far
    plus the Chebyshev distance to the goal (a lower bound, since every move
    costs at least 1 and reduces it by at most 1) cannot beat the incumbent.
    Returns the optimal cost or None when unreachable.
    """
    h, w = cells.shape
    if h * w > _MAX_BRUTE_CELLS:
        raise OracleTooLarge("brute-force oracle capped at {} cells".format(_MAX_BRUTE_CELLS))
    if cells[sr, sc] != FREE or cells[gr, gc] != FREE:
        return None

    def cheb(r, c):
        return float(max(abs(r - gr), abs(c - gc)))

    best = [math.inf]
    visited = np.zeros((h, w), dtype=bool)
    expanded = [0]

    def walk(r, c, d_in, ncard, ndiag, nturn):
        expanded[0] += 1
        if expanded[0] > node_cap:
            raise OracleTooLarge("brute-force oracle exceeded node cap")
        g = ncard + ndiag * SQRT2 + nturn * turn_penalty
        if (r, c) == (gr, gc):
            if g < best[0]:
                best[0] = g
            return
        if g + cheb(r, c) >= best[0]:
            return
        moves = []
        for d, (dr, dc) in enumerate(_DIRS):
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or cells[nr, nc] != FREE:
                continue
            if visited[nr, nc]:
                continue
            if dr != 0 and dc != 0 and (cells[r, nc] != FREE or cells[nr, c] != FREE):
                continue
            moves.append((cheb(nr, nc), d, nr, nc, dr != 0 and dc != 0))
        moves.sort()
        for _, d, nr, nc, diag in moves:
            nturn2 = nturn + (1 if d_in is not None and d_in != d else 0)
            visited[nr, nc] = True
            walk(
                nr,
                nc,
                d,
                ncard + (0 if diag else 1),
                ndiag + (1 if diag else 0),
                nturn2,
            )
            visited[nr, nc] = False

    visited[sr, sc] = True
    walk(sr, sc, None, 0, 0, 0)
    return None if math.isinf(best[0]) else best[0]


def ray_march_hit(
    origin: Vec3,
    direction: Vec3,
    box: Box3D,
    step: float = 1e-4,
    max_t: float = 20.0,
    max_steps: int = 2_000_000,
) -> Optional[tuple[float, str]]:
    """First ray/box contact found by dense marching plus bisection.

    Returns (t, face) with face one of '-x', '+x', '-y', '+y', '-z', '+z', or
    'interior' when the origin already sits inside the box; None on a miss.
    The face is whichever bounding plane is nearest to the refined hit point.
    """
    u = direction.normalized()
    if box.contains(origin):
        return 0.0, "interior"
    n = int(max_t / step) + 1
    if n > max_steps:
        raise OracleTooLarge("ray march would take {} steps".format(n))
    ts = np.arange(n, dtype=np.float64) * step
    px = origin.x + ts * u.x
    py = origin.y + ts * u.y
    pz = origin.z + ts * u.z
    lo, hi = box.min_corner, box.max_corner
    inside = (
        (px >= lo.x) & (px <= hi.x)
        & (py >= lo.y) & (py <= hi.y)
        & (pz >= lo.z) & (pz <= hi.z)
    )
    if not inside.any():
        return None
    i = int(np.argmax(inside))
    t_hi = float(ts[i])
    t_lo = float(ts[i - 1]) if i > 0 else 0.0

    def contains_at(t: float) -> bool:
        p = Vec3(origin.x + t * u.x, origin.y + t * u.y, origin.z + t * u.z)
        return box.contains(p)

    for _ in range(80):
        mid = 0.5 * (t_lo + t_hi)
        if contains_at(mid):
            t_hi = mid
        else:
            t_lo = mid
    p = Vec3(origin.x + t_hi * u.x, origin.y + t_hi * u.y, origin.z + t_hi * u.z)
    planes = [
        (abs(p.x - lo.x), "-x"),
        (abs(p.x - hi.x), "+x"),
        (abs(p.y - lo.y), "-y"),
        (abs(p.y - hi.y), "+y"),
        (abs(p.z - lo.z), "-z"),
        (abs(p.z - hi.z), "+z"),
    ]
    planes.sort(key=lambda pair: pair[0])
    return t_hi, planes[0][1]


def _graham_hull(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    pts = sorted(set((float(x), float(y)) for x, y in points), key=lambda p: (p[1], p[0]))
    pivot = pts[0]
    rest = sorted(
        pts[1:],
        key=lambda p: (
            math.atan2(p[1] - pivot[1], p[0] - pivot[0]),
            (p[0] - pivot[0]) ** 2 + (p[1] - pivot[1]) ** 2,
        ),
    )
    hull = [pivot]
    for p in rest:
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def cell_label_oracle(
    boxes: Sequence[Box3D],
    resolution: float,
    margin_cells: int,
    x: float,
    y: float,
) -> Optional[int]:
    """Label of the grid cell containing a world point, computed from scratch.

    Re-derives the grid geometry, classifies the cell center against every
    footprint and against a Graham-scan hull. Returns None outside the grid
    extent; otherwise 0 free, 1 obstacle, 2 out of bounds.
    """
    corners: list[tuple[float, float]] = []
    for b in boxes:
        corners.extend(
            [
                (b.min_corner.x, b.min_corner.y),
                (b.max_corner.x, b.min_corner.y),
                (b.max_corner.x, b.max_corner.y),
                (b.min_corner.x, b.max_corner.y),
            ]
        )
    min_x = min(p[0] for p in corners)
    max_x = max(p[0] for p in corners)
    min_y = min(p[1] for p in corners)
    max_y = max(p[1] for p in corners)
    w = int(math.ceil((max_x - min_x) / resolution)) + 2 * margin_cells
    h = int(math.ceil((max_y - min_y) / resolution)) + 2 * margin_cells
    origin_x = min_x - margin_cells * resolution
    origin_y = min_y - margin_cells * resolution
    col = int(math.floor((x - origin_x) / resolution))
    row = int(math.floor((y - origin_y) / resolution))
    if not (0 <= row < h and 0 <= col < w):
        return None
    cx = origin_x + (col + 0.5) * resolution
    cy = origin_y + (row + 0.5) * resolution

    for b in boxes:
        if b.min_corner.x <= cx <= b.max_corner.x and b.min_corner.y <= cy <= b.max_corner.y:
            return 1
    hull = _graham_hull(corners)
    if len(hull) >= 3:
        inside = True
        k = len(hull)
        for i in range(k):
            x1, y1 = hull[i]
            x2, y2 = hull[(i + 1) % k]
            if (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1) < 0:
                inside = False
                break
        if inside:
            return 0
    return 2


_RING_INDEX = {"C": 0, "F": 1, "B": 2, "G": 3, "D": 4, "H": 5, "A": 6, "E": 7}


def exhaustive_chain_score(
    pred_nodes: Sequence[int],
    pred_dirs: Sequence[str],
    gt_chains: Sequence[tuple[Sequence[int], Sequence[str]]],
) -> tuple[bool, Optional[float], Optional[float]]:
    """Rescore a chain prediction against every ground-truth chain.

    Returns (node_sequence_correct, strict_edge_fraction, loose_edge_fraction)
    where the fractions are None unless some ground-truth node sequence is
    matched exactly. Strict requires equal direction letters per edge; loose
    also accepts the two adjacent letters on the 8-way compass ring. Multiple
    matching chains keep the best fractions.
    """
    act = False
    best_s: Optional[float] = None
    best_l: Optional[float] = None
    for nodes, dirs in gt_chains:
        if list(nodes) != list(pred_nodes):
            continue
        act = True
        n_edges = len(nodes) - 1
        strict = 0
        loose = 0
        for j in range(n_edges):
            if j >= len(pred_dirs):
                continue
            got = _RING_INDEX.get(str(pred_dirs[j]).upper())
            want = _RING_INDEX[str(dirs[j]).upper()]
            if got is None:
                continue
            delta = (got - want) % 8
            if delta == 0:
                strict += 1
                loose += 1
            elif delta in (1, 7):
                loose += 1
        s = strict / n_edges
        l = loose / n_edges
        if best_s is None or (s, l) > (best_s, best_l):
            best_s, best_l = s, l
    if not act:
        return False, None, None
    return True, best_s, best_l


def chain_placement_oracle(
    intervals: Sequence[tuple[float, float]],
    min_future: int = 3,
    max_future: int = 5,
) -> Optional[tuple[int, int, int]]:
    """Exhaustively score every keystep window split for chain sampling.

    ``intervals`` are (start, end) pairs sorted by onset. Enumerates every
    contiguous window [i, j] and every boundary inside it that leaves at
    least one step behind and ``min_future``..``max_future`` ahead, scoring
    each by steps-per-minute over the window span. Returns the winning
    (first_index, boundary_index, future_count) or None; ties prefer more
    steps, then the earliest boundary.
    """
    n = len(intervals)
    best_key = None
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            span = intervals[j][1] - intervals[i][0]
            if span <= 0:
                continue
            total = j - i + 1
            density = total / (span / 60.0)
            for boundary in range(i + 1, j + 1):
                k = j - boundary + 1
                if not min_future <= k <= max_future:
                    continue
                if intervals[i][0] >= intervals[boundary][0]:
                    continue
                key = (density, total, -boundary)
                if best_key is None or key > best_key:
                    best_key = key
                    best = (i, boundary, k)
    return best
