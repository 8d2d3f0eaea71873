# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled A* kernel over a 26-connected layered grid.

Twin of _astar_py.search: identical edge-cost expressions, neighbor order, and
tie-breaking, so both kernels return bit-identical paths and costs. Keeping
IEEE semantics matters here; the build intentionally avoids -ffast-math.
"""

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport free, malloc, realloc

import numpy as np

KERNEL_NAME = "compiled"


cdef struct HeapEntry:
    double f
    long tie       # (iz * nx + ix) * ny + iy: lower layer first, then index order
    long cell
    double g


cdef struct Heap:
    HeapEntry* items
    long size
    long capacity


cdef inline bint _less(HeapEntry a, HeapEntry b) noexcept:
    if a.f != b.f:
        return a.f < b.f
    return a.tie < b.tie


cdef bint _heap_push(Heap* h, HeapEntry entry) noexcept:
    cdef long i, parent
    cdef HeapEntry tmp
    if h.size == h.capacity:
        h.capacity *= 2
        h.items = <HeapEntry*>realloc(h.items, h.capacity * sizeof(HeapEntry))
        if h.items == NULL:
            return False
    h.items[h.size] = entry
    i = h.size
    h.size += 1
    while i > 0:
        parent = (i - 1) // 2
        if _less(h.items[i], h.items[parent]):
            tmp = h.items[i]
            h.items[i] = h.items[parent]
            h.items[parent] = tmp
            i = parent
        else:
            break
    return True


cdef HeapEntry _heap_pop(Heap* h) noexcept:
    cdef HeapEntry top = h.items[0]
    cdef long i = 0, child
    cdef HeapEntry tmp
    h.size -= 1
    h.items[0] = h.items[h.size]
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and _less(h.items[child + 1], h.items[child]):
            child += 1
        if _less(h.items[child], h.items[i]):
            tmp = h.items[i]
            h.items[i] = h.items[child]
            h.items[child] = tmp
            i = child
        else:
            break
    return top


def search(states, long nx, long ny, long nz, long start, long goal,
           double cell_size, double mult_ground, double mult_transition,
           double mult_cruise, double danger_penalty):
    """Returns (path as list of flat ids, cost) or None when unreachable."""
    cdef const unsigned char[::1] grid = np.ascontiguousarray(states, dtype=np.uint8)
    cdef long n_cells = nx * ny * nz

    cdef double* g = <double*>malloc(n_cells * sizeof(double))
    cdef long* parent = <long*>malloc(n_cells * sizeof(long))
    cdef Heap heap
    heap.capacity = 256
    heap.size = 0
    heap.items = <HeapEntry*>malloc(heap.capacity * sizeof(HeapEntry))
    if g == NULL or parent == NULL or heap.items == NULL:
        free(g); free(parent); free(heap.items)
        raise MemoryError()

    cdef long i
    for i in range(n_cells):
        g[i] = INFINITY
        parent[i] = -1
    g[start] = 0.0

    cdef double step_len[4]
    step_len[0] = 0.0
    step_len[1] = 1.0
    step_len[2] = sqrt(2.0)
    step_len[3] = sqrt(3.0)

    cdef double min_mult = mult_ground
    if mult_transition < min_mult:
        min_mult = mult_transition
    if mult_cruise < min_mult:
        min_mult = mult_cruise

    cdef long gx = (goal // nz) // ny
    cdef long gy = (goal // nz) % ny
    cdef long gz = goal % nz

    cdef long sx = (start // nz) // ny
    cdef long sy = (start // nz) % ny
    cdef long sz = start % nz

    cdef double ddx, ddy, ddz
    ddx = sx - gx; ddy = sy - gy; ddz = sz - gz

    cdef HeapEntry entry
    entry.f = min_mult * cell_size * sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
    entry.tie = (sz * nx + sx) * ny + sy
    entry.cell = start
    entry.g = 0.0
    if not _heap_push(&heap, entry):
        free(g); free(parent); free(heap.items)
        raise MemoryError()

    cdef long node, ix, iy, iz, dx, dy, dz, tx, ty, tz, target
    cdef double g_node, w, new_g, h_val, mult
    cdef unsigned char state
    cdef bint found = False

    while heap.size > 0:
        entry = _heap_pop(&heap)
        node = entry.cell
        if entry.g > g[node]:
            continue  # stale entry
        if node == goal:
            found = True
            break
        ix = (node // nz) // ny
        iy = (node // nz) % ny
        iz = node % nz
        g_node = g[node]
        for dx in range(-1, 2):
            tx = ix + dx
            if tx < 0 or tx >= nx:
                continue
            for dy in range(-1, 2):
                ty = iy + dy
                if ty < 0 or ty >= ny:
                    continue
                for dz in range(-1, 2):
                    if dx == 0 and dy == 0 and dz == 0:
                        continue
                    tz = iz + dz
                    if tz < 0 or tz >= nz:
                        continue
                    target = (tx * ny + ty) * nz + tz
                    state = grid[target]
                    if state == 2:  # occupied
                        continue
                    if tz == 0:
                        mult = mult_ground
                    elif tz == 1:
                        mult = mult_transition
                    else:
                        mult = mult_cruise
                    w = cell_size * step_len[dx * dx + dy * dy + dz * dz] * mult
                    if state == 1:  # dangerous
                        w = w + danger_penalty
                    new_g = g_node + w
                    if new_g < g[target]:
                        g[target] = new_g
                        parent[target] = node
                        ddx = tx - gx; ddy = ty - gy; ddz = tz - gz
                        h_val = min_mult * cell_size * sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
                        entry.f = new_g + h_val
                        entry.tie = (tz * nx + tx) * ny + ty
                        entry.cell = target
                        entry.g = new_g
                        if not _heap_push(&heap, entry):
                            free(g); free(parent); free(heap.items)
                            raise MemoryError()

    cdef list path
    cdef double cost
    cdef long cur
    try:
        if not found:
            return None
        path = []
        cur = goal
        while cur != -1:
            path.append(cur)
            cur = parent[cur]
        path.reverse()
        cost = g[goal]
        return path, cost
    finally:
        free(g)
        free(parent)
        free(heap.items)
