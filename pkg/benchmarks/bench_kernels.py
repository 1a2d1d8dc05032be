"""Compare the jit kernels against the pure-numpy fallback.

Runs each hot kernel under both backends on identical inputs and
prints median wall time plus speedup. Invoke from the repo root:

    python3 benchmarks/bench_kernels.py --edges 20000 --repeat 5
"""

import argparse
import statistics
import time

import numpy as np

from whaletracks import _kernels


def random_edges(rng, n):
    lat1 = rng.uniform(-85.0, 85.0, n)
    lat2 = rng.uniform(-85.0, 85.0, n)
    lon1 = rng.uniform(-180.0, 180.0, n)
    lon2 = rng.uniform(-180.0, 180.0, n)
    return lat1, lon1, lat2, lon2


def random_graph(rng, n_nodes, degree):
    # symmetric neighbor lists with uniform affinities
    nbrs = [set() for _ in range(n_nodes)]
    for u in range(n_nodes):
        for v in rng.integers(0, n_nodes, degree):
            v = int(v)
            if v != u:
                nbrs[u].add(v)
                nbrs[v].add(u)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    indices = []
    for u in range(n_nodes):
        indptr[u + 1] = indptr[u] + len(nbrs[u])
        indices.extend(sorted(nbrs[u]))
    indices = np.asarray(indices, dtype=np.int64)
    affinity = rng.uniform(0.5, 2.0, indices.size)
    values = rng.uniform(0.0, 100.0, n_nodes)
    return values, indptr, indices, affinity


def timed(fn, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--edges", type=int, default=20_000)
    ap.add_argument("--nodes", type=int, default=30_000)
    ap.add_argument("--iterations", type=int, default=200)
    ap.add_argument("--bin", type=float, default=5.0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    lat1, lon1, lat2, lon2 = random_edges(rng, args.edges)
    contrib = _kernels.haversine_km(lat1, lon1, lat2, lon2)
    values, indptr, indices, affinity = random_graph(rng, args.nodes, 4)

    cases = [
        ("haversine_km",
         lambda: _kernels.haversine_km(lat1, lon1, lat2, lon2)),
        ("rasterize_edges",
         lambda: _kernels.rasterize_edges(lat1, lon1, lat2, lon2, contrib, args.bin)),
        ("diffuse",
         lambda: _kernels.diffuse(values, indptr, indices, affinity, 0.5,
                                  args.iterations)),
    ]

    print(f"edges={args.edges} nodes={args.nodes} diffusion_iterations="
          f"{args.iterations} bin={args.bin} repeat={args.repeat}")
    print(f"{'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, fn in cases:
        _kernels.USE_NUMBA = True
        fn()  # trigger jit compile outside the timed region
        with_numba = timed(fn, args.repeat)
        _kernels.USE_NUMBA = False
        baseline = timed(fn, args.repeat)
        _kernels.USE_NUMBA = True
        print(f"{name:<18} {baseline:>9.4f}s {with_numba:>9.4f}s "
              f"{baseline / with_numba:>7.1f}x")


if __name__ == "__main__":
    main()
