"""Benchmark the compiled A* kernel against the pure-Python fallback.

Runs both kernels on identical randomized grids of growing size, checks they
return bit-identical results, and prints a timing table.

    python3 benchmarks/bench_astar.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from agnav import _astar_py

try:
    from agnav import _astar
except ImportError:
    _astar = None


def make_instance(rng, nx, ny, nz, fill=0.12):
    states = np.zeros((nx, ny, nz), dtype=np.uint8)
    n_cells = nx * ny * nz
    occupied = rng.choice(n_cells, size=int(n_cells * fill), replace=False)
    states.reshape(-1)[occupied] = 2
    states[0, 0, 0] = 0
    states[nx - 1, ny - 1, 0] = 0
    flat = states.reshape(-1)
    start = 0
    goal = ((nx - 1) * ny + (ny - 1)) * nz + 0
    return flat, start, goal


def run_kernel(kernel, flat, dims, start, goal, repeats):
    nx, ny, nz = dims
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.search(flat, nx, ny, nz, start, goal, 0.5, 1.0, 4.0, 2.0, 5.0)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _astar is None:
        print("compiled kernel not built (pip install -e . with a C toolchain); "
              "benchmarking the pure-Python kernel only")

    sizes = [(10, 16, 6), (20, 32, 6), (40, 64, 8), (60, 96, 10)]
    header = f"{'grid':>12} {'cells':>8} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(2024)
    for dims in sizes:
        flat, start, goal = make_instance(rng, *dims)
        t_py, r_py = run_kernel(_astar_py, flat, dims, start, goal, args.repeats)
        if _astar is not None:
            t_c, r_c = run_kernel(_astar, flat, dims, start, goal, args.repeats)
            assert r_py == r_c, "kernels disagree"
            speedup = f"{t_py / t_c:8.1f}x"
            t_c_text = f"{t_c * 1e3:9.2f} ms"
        else:
            speedup, t_c_text = "-", "-"
        label = "x".join(str(d) for d in dims)
        cells = dims[0] * dims[1] * dims[2]
        print(f"{label:>12} {cells:>8} {t_py * 1e3:9.2f} ms {t_c_text:>12} {speedup:>9}")


if __name__ == "__main__":
    main()
