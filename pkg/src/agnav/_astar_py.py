"""Pure-Python A* kernel over a 26-connected layered grid.

Mirror of the compiled kernel in _astar.pyx: identical edge-cost expressions,
neighbor order, and tie-breaking, so both return bit-identical paths and costs.

Cells are flat indices id = (ix * ny + iy) * nz + iz over a uint8 state array
(0 free, 1 dangerous, 2 occupied). Edge cost into a target cell:

    cell_size * sqrt(dx^2 + dy^2 + dz^2) * layer_multiplier(target z)
    + danger_penalty if the target is dangerous

Heuristic: Euclidean distance to goal * min(layer multipliers). Closed nodes
are reopened when a cheaper route appears, so the returned cost is exactly
optimal even if float rounding nicks heuristic consistency.
"""

import heapq
from math import sqrt

OCCUPIED = 2
DANGEROUS = 1

_STEP_LEN = (0.0, 1.0, sqrt(2.0), sqrt(3.0))

KERNEL_NAME = "python"


def search(states, nx, ny, nz, start, goal, cell_size,
           mult_ground, mult_transition, mult_cruise, danger_penalty):
    """Returns (path as list of flat ids, cost) or None when unreachable."""
    layer_mult = [mult_ground, mult_transition] + [mult_cruise] * max(nz - 2, 0)
    min_mult = min(mult_ground, mult_transition, mult_cruise)

    gx, gy = divmod(goal // nz, ny)
    gz = goal % nz

    n_cells = nx * ny * nz
    g = [float("inf")] * n_cells
    parent = [-1] * n_cells
    g[start] = 0.0

    def heuristic(ix, iy, iz):
        dx = ix - gx
        dy = iy - gy
        dz = iz - gz
        return min_mult * cell_size * sqrt(dx * dx + dy * dy + dz * dz)

    sx, sy = divmod(start // nz, ny)
    sz = start % nz
    # heap key (f, iz, ix, iy): ties prefer the lower layer, then index order
    heap = [(heuristic(sx, sy, sz), sz, sx, sy, start, 0.0)]

    while heap:
        f, iz, ix, iy, node, g_at_push = heapq.heappop(heap)
        if g_at_push > g[node]:
            continue  # stale entry
        if node == goal:
            path = []
            cur = node
            while cur != -1:
                path.append(cur)
                cur = parent[cur]
            path.reverse()
            return path, g[node]
        g_node = g[node]
        for dx in (-1, 0, 1):
            tx = ix + dx
            if tx < 0 or tx >= nx:
                continue
            for dy in (-1, 0, 1):
                ty = iy + dy
                if ty < 0 or ty >= ny:
                    continue
                for dz in (-1, 0, 1):
                    if dx == 0 and dy == 0 and dz == 0:
                        continue
                    tz = iz + dz
                    if tz < 0 or tz >= nz:
                        continue
                    target = (tx * ny + ty) * nz + tz
                    state = states[target]
                    if state == OCCUPIED:
                        continue
                    w = cell_size * _STEP_LEN[dx * dx + dy * dy + dz * dz] * layer_mult[tz]
                    if state == DANGEROUS:
                        w += danger_penalty
                    new_g = g_node + w
                    if new_g < g[target]:
                        g[target] = new_g
                        parent[target] = node
                        heapq.heappush(
                            heap,
                            (new_g + heuristic(tx, ty, tz), tz, tx, ty, target, new_g),
                        )
    return None
