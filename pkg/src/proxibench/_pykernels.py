"""Pure-Python kernels: 8-connected A* and convex-polygon rasterization.

This is the fallback backend; proxibench._ckernels implements the same two
functions in Cython. Both must produce bit-identical results, so the float
expressions and tie-break rules here are normative:

* path cost is derived canonically from integer move counts as
  ``ncard + ndiag * SQRT2 + nturns * penalty`` (evaluated left to right),
* the open list orders states by ``(f, h, cell_index, incoming_direction)``,
* relaxation only replaces a state cost on strict improvement.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

FREE = 0
OBSTACLE = 1
OUT_OF_BOUNDS = 2

# Neighbor expansion order; index doubles as the incoming-direction id.
# 8 means "no incoming direction" (start state); its moves carry no turn cost.
DIRS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
NO_DIR = 8


def _octile(dr: int, dc: int) -> float:
    lo, hi = (dr, dc) if dr <= dc else (dc, dr)
    return (hi - lo) + lo * SQRT2


def astar_search(cells, sr, sc, gr, gc, turn_penalty):
    """Shortest 8-connected path on a labeled grid.

    Moves cost 1 (cardinal) or sqrt(2) (diagonal); each direction change adds
    ``turn_penalty``; the first move is penalty-free. Diagonal moves require
    both flanking cardinal cells to be free. Returns ``(path, ncard, ndiag,
    nturns)`` with path as an (N, 2) int32 array of (row, col), or None when
    the goal is unreachable.
    """
    h_cells, w = cells.shape
    if cells[sr, sc] != FREE or cells[gr, gc] != FREE:
        return None
    if sr == gr and sc == gc:
        return np.array([[sr, sc]], dtype=np.int32), 0, 0, 0

    n_states = h_cells * w * 9
    g_val = np.full(n_states, np.inf, dtype=np.float64)
    g_card = np.zeros(n_states, dtype=np.int32)
    g_diag = np.zeros(n_states, dtype=np.int32)
    g_turn = np.zeros(n_states, dtype=np.int32)
    parent = np.full(n_states, -1, dtype=np.int64)
    closed = np.zeros(n_states, dtype=bool)

    start_idx = sr * w + sc
    start_state = start_idx * 9 + NO_DIR
    g_val[start_state] = 0.0
    h0 = _octile(abs(sr - gr), abs(sc - gc))
    heap = [(h0, h0, start_idx, NO_DIR)]

    goal_state = -1
    while heap:
        f, h, idx, d_in = heapq.heappop(heap)
        state = idx * 9 + d_in
        if closed[state]:
            continue
        closed[state] = True
        r, c = divmod(idx, w)
        if r == gr and c == gc:
            goal_state = state
            break
        nc_card = int(g_card[state])
        nc_diag = int(g_diag[state])
        nc_turn = int(g_turn[state])
        for d in range(8):
            dr, dc = DIRS[d]
            nr, ncl = r + dr, c + dc
            if not (0 <= nr < h_cells and 0 <= ncl < w):
                continue
            if cells[nr, ncl] != FREE:
                continue
            if dr != 0 and dc != 0:
                # Diagonal-cut rule: both flanking cardinal cells must be free.
                if cells[r, ncl] != FREE or cells[nr, c] != FREE:
                    continue
                ncard, ndiag = nc_card, nc_diag + 1
            else:
                ncard, ndiag = nc_card + 1, nc_diag
            nturn = nc_turn + (1 if (d_in != NO_DIR and d_in != d) else 0)
            g_new = ncard + ndiag * SQRT2 + nturn * turn_penalty
            nstate = (nr * w + ncl) * 9 + d
            if g_new < g_val[nstate]:
                g_val[nstate] = g_new
                g_card[nstate] = ncard
                g_diag[nstate] = ndiag
                g_turn[nstate] = nturn
                parent[nstate] = state
                hn = _octile(abs(nr - gr), abs(ncl - gc))
                heapq.heappush(heap, (g_new + hn, hn, nr * w + ncl, d))

    if goal_state < 0:
        return None

    path = []
    state = goal_state
    while state >= 0:
        path.append(divmod(state // 9, w))
        state = parent[state]
    path.reverse()
    return (
        np.array(path, dtype=np.int32),
        int(g_card[goal_state]),
        int(g_diag[goal_state]),
        int(g_turn[goal_state]),
    )


def convex_polygon_mask(xs, ys, verts):
    """Inclusive containment of grid points in a CCW convex polygon.

    ``xs`` are the x coordinates of the columns, ``ys`` of the rows; ``verts``
    is a (K, 2) array, K >= 3, counterclockwise. A point on an edge counts as
    inside. Returns a (len(ys), len(xs)) uint8 mask.
    """
    if len(verts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    mask = np.ones((ys.size, xs.size), dtype=bool)
    k = len(verts)
    for i in range(k):
        x1, y1 = float(verts[i][0]), float(verts[i][1])
        x2, y2 = float(verts[(i + 1) % k][0]), float(verts[(i + 1) % k][1])
        # cross((v2 - v1), (p - v1)) >= 0 for every edge of a CCW polygon.
        cross = (x2 - x1) * (ys - y1)[:, None] - (y2 - y1) * (xs - x1)[None, :]
        mask &= cross >= 0.0
    return mask.astype(np.uint8)


BACKEND = "python"
