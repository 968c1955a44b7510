# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled kernels: 8-connected A* and convex-polygon rasterization.

Must stay bit-identical to proxibench._pykernels — same cost expressions in
the same order, same (f, h, cell_index, direction) heap ordering, same
strict-improvement relaxation. The build disables floating-point contraction
so fused multiply-adds cannot change rounding relative to the pure backend.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

cdef extern from "stdlib.h":
    long labs(long) nogil

cdef double SQRT2 = sqrt(2.0)
cdef int FREE = 0
cdef int NO_DIR = 8

cdef int[8] DIR_R = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] DIR_C = [-1, 0, 1, -1, 1, -1, 0, 1]

BACKEND = "compiled"


cdef inline double _octile(int dr, int dc) nogil:
    cdef int lo, hi
    if dr <= dc:
        lo = dr
        hi = dc
    else:
        lo = dc
        hi = dr
    return (hi - lo) + lo * SQRT2


cdef inline bint _key_less(
    double f1, double h1, long i1, int d1,
    double f2, double h2, long i2, int d2,
) nogil:
    if f1 != f2:
        return f1 < f2
    if h1 != h2:
        return h1 < h2
    if i1 != i2:
        return i1 < i2
    return d1 < d2


def astar_search(cells, long sr, long sc, long gr, long gc, double turn_penalty):
    """Same contract as proxibench._pykernels.astar_search."""
    cdef cnp.uint8_t[:, ::1] grid = np.ascontiguousarray(cells, dtype=np.uint8)
    cdef long h_cells = grid.shape[0]
    cdef long w = grid.shape[1]
    if grid[sr, sc] != FREE or grid[gr, gc] != FREE:
        return None
    if sr == gr and sc == gc:
        return np.array([[sr, sc]], dtype=np.int32), 0, 0, 0

    cdef long n_states = h_cells * w * 9
    g_val_arr = np.full(n_states, np.inf, dtype=np.float64)
    g_card_arr = np.zeros(n_states, dtype=np.int32)
    g_diag_arr = np.zeros(n_states, dtype=np.int32)
    g_turn_arr = np.zeros(n_states, dtype=np.int32)
    parent_arr = np.full(n_states, -1, dtype=np.int64)
    closed_arr = np.zeros(n_states, dtype=np.uint8)
    cdef double[::1] g_val = g_val_arr
    cdef cnp.int32_t[::1] g_card = g_card_arr
    cdef cnp.int32_t[::1] g_diag = g_diag_arr
    cdef cnp.int32_t[::1] g_turn = g_turn_arr
    cdef cnp.int64_t[::1] parent = parent_arr
    cdef cnp.uint8_t[::1] closed = closed_arr

    # Binary min-heap keyed by (f, h, cell index, direction).
    cdef long cap = 1024
    heap_f_arr = np.empty(cap, dtype=np.float64)
    heap_h_arr = np.empty(cap, dtype=np.float64)
    heap_i_arr = np.empty(cap, dtype=np.int64)
    heap_d_arr = np.empty(cap, dtype=np.int32)
    cdef double[::1] heap_f = heap_f_arr
    cdef double[::1] heap_h = heap_h_arr
    cdef cnp.int64_t[::1] heap_i = heap_i_arr
    cdef cnp.int32_t[::1] heap_d = heap_d_arr
    cdef long heap_n = 0

    cdef long start_idx = sr * w + sc
    cdef long start_state = start_idx * 9 + NO_DIR
    cdef double h0 = _octile(<int> labs(sr - gr), <int> labs(sc - gc))
    g_val[start_state] = 0.0
    heap_f[0] = h0
    heap_h[0] = h0
    heap_i[0] = start_idx
    heap_d[0] = NO_DIR
    heap_n = 1

    cdef long goal_state = -1
    cdef long state, idx, r, c, nr, ncl, nstate, child, parent_i, smallest
    cdef int d_in, d, dr, dc
    cdef int nc_card, nc_diag, nc_turn, ncard, ndiag, nturn
    cdef double f, hh, g_new, hn
    cdef double tmp_f, tmp_h
    cdef long tmp_i
    cdef int tmp_d

    while heap_n > 0:
        # Pop the root, move the last element up, sift down.
        f = heap_f[0]
        hh = heap_h[0]
        idx = heap_i[0]
        d_in = heap_d[0]
        heap_n -= 1
        if heap_n > 0:
            heap_f[0] = heap_f[heap_n]
            heap_h[0] = heap_h[heap_n]
            heap_i[0] = heap_i[heap_n]
            heap_d[0] = heap_d[heap_n]
            parent_i = 0
            while True:
                child = 2 * parent_i + 1
                if child >= heap_n:
                    break
                smallest = child
                if child + 1 < heap_n and _key_less(
                    heap_f[child + 1], heap_h[child + 1], heap_i[child + 1], heap_d[child + 1],
                    heap_f[child], heap_h[child], heap_i[child], heap_d[child],
                ):
                    smallest = child + 1
                if _key_less(
                    heap_f[smallest], heap_h[smallest], heap_i[smallest], heap_d[smallest],
                    heap_f[parent_i], heap_h[parent_i], heap_i[parent_i], heap_d[parent_i],
                ):
                    tmp_f = heap_f[parent_i]; heap_f[parent_i] = heap_f[smallest]; heap_f[smallest] = tmp_f
                    tmp_h = heap_h[parent_i]; heap_h[parent_i] = heap_h[smallest]; heap_h[smallest] = tmp_h
                    tmp_i = heap_i[parent_i]; heap_i[parent_i] = heap_i[smallest]; heap_i[smallest] = tmp_i
                    tmp_d = heap_d[parent_i]; heap_d[parent_i] = heap_d[smallest]; heap_d[smallest] = tmp_d
                    parent_i = smallest
                else:
                    break

        state = idx * 9 + d_in
        if closed[state]:
            continue
        closed[state] = 1
        r = idx / w
        c = idx - r * w
        if r == gr and c == gc:
            goal_state = state
            break
        nc_card = g_card[state]
        nc_diag = g_diag[state]
        nc_turn = g_turn[state]
        for d in range(8):
            dr = DIR_R[d]
            dc = DIR_C[d]
            nr = r + dr
            ncl = c + dc
            if nr < 0 or nr >= h_cells or ncl < 0 or ncl >= w:
                continue
            if grid[nr, ncl] != FREE:
                continue
            if dr != 0 and dc != 0:
                if grid[r, ncl] != FREE or grid[nr, c] != FREE:
                    continue
                ncard = nc_card
                ndiag = nc_diag + 1
            else:
                ncard = nc_card + 1
                ndiag = nc_diag
            if d_in != NO_DIR and d_in != d:
                nturn = nc_turn + 1
            else:
                nturn = nc_turn
            g_new = ncard + ndiag * SQRT2 + nturn * turn_penalty
            nstate = (nr * w + ncl) * 9 + d
            if g_new < g_val[nstate]:
                g_val[nstate] = g_new
                g_card[nstate] = ncard
                g_diag[nstate] = ndiag
                g_turn[nstate] = nturn
                parent[nstate] = state
                hn = _octile(<int> labs(nr - gr), <int> labs(ncl - gc))
                if heap_n == cap:
                    cap = cap * 2
                    heap_f_arr = np.resize(heap_f_arr, cap)
                    heap_h_arr = np.resize(heap_h_arr, cap)
                    heap_i_arr = np.resize(heap_i_arr, cap)
                    heap_d_arr = np.resize(heap_d_arr, cap)
                    heap_f = heap_f_arr
                    heap_h = heap_h_arr
                    heap_i = heap_i_arr
                    heap_d = heap_d_arr
                heap_f[heap_n] = g_new + hn
                heap_h[heap_n] = hn
                heap_i[heap_n] = nr * w + ncl
                heap_d[heap_n] = d
                heap_n += 1
                child = heap_n - 1
                while child > 0:
                    parent_i = (child - 1) / 2
                    if _key_less(
                        heap_f[child], heap_h[child], heap_i[child], heap_d[child],
                        heap_f[parent_i], heap_h[parent_i], heap_i[parent_i], heap_d[parent_i],
                    ):
                        tmp_f = heap_f[parent_i]; heap_f[parent_i] = heap_f[child]; heap_f[child] = tmp_f
                        tmp_h = heap_h[parent_i]; heap_h[parent_i] = heap_h[child]; heap_h[child] = tmp_h
                        tmp_i = heap_i[parent_i]; heap_i[parent_i] = heap_i[child]; heap_i[child] = tmp_i
                        tmp_d = heap_d[parent_i]; heap_d[parent_i] = heap_d[child]; heap_d[child] = tmp_d
                        child = parent_i
                    else:
                        break

    if goal_state < 0:
        return None

    path = []
    state = goal_state
    while state >= 0:
        idx = state / 9
        r = idx / w
        path.append((r, idx - r * w))
        state = parent[state]
    path.reverse()
    return (
        np.array(path, dtype=np.int32),
        int(g_card[goal_state]),
        int(g_diag[goal_state]),
        int(g_turn[goal_state]),
    )


def convex_polygon_mask(xs, ys, verts):
    """Same contract as proxibench._pykernels.convex_polygon_mask."""
    if len(verts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(ys, dtype=np.float64)
    cdef double[:, ::1] vv = np.ascontiguousarray(verts, dtype=np.float64)
    cdef long w = xv.shape[0]
    cdef long h = yv.shape[0]
    cdef long k = vv.shape[0]
    mask_arr = np.ones((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] mask = mask_arr
    cdef long i, r, c
    cdef double x1, y1, x2, y2, a, b
    for i in range(k):
        x1 = vv[i, 0]
        y1 = vv[i, 1]
        x2 = vv[(i + 1) % k, 0]
        y2 = vv[(i + 1) % k, 1]
        for r in range(h):
            a = (x2 - x1) * (yv[r] - y1)
            for c in range(w):
                b = (y2 - y1) * (xv[c] - x1)
                if not (a - b >= 0.0):
                    mask[r, c] = 0
    return mask_arr
