"""Time the compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Inputs come from real meshes so the sizes match what the library sees.  The
numba column is skipped when ``LIPSPHERE_NO_NUMBA=1`` is set.  A last block
runs one whole pipeline in two subprocesses, with and without the flag.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from lipsphere import _kernels, generators, geodesic, homology, refine_surface


def _best(fn, repeat):
    fn()   # warm up, and compile on the numba path
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def diameter_case():
    s = refine_surface(generators.icosphere(3), 1)
    d = geodesic.distance_field(s, 0).dist
    R = 0.5 * d.max()
    E = s.edges
    cross = (d[E[:, 0]] - R) * (d[E[:, 1]] - R) < 0
    a, b = E[cross, 0], E[cross, 1]
    t = (R - d[a]) / (d[b] - d[a])
    L = s.edge_lengths[cross]
    verts = np.unique(np.r_[a, b])
    slot = np.full(s.n_vertices, -1, dtype=np.int64)
    slot[verts] = np.arange(len(verts))
    rows = geodesic.distance_rows(s, verts)
    args = (rows, slot, a.astype(np.int64), b.astype(np.int64), t * L, (1 - t) * L)
    return f"component_diameter ({len(a)} points)", args, _kernels._diameter_numpy, \
        getattr(_kernels, "_diameter_jit", None)


def tree_xor_case():
    rng = np.random.default_rng(0)
    n = 200_000
    order = rng.permutation(n)
    pred = np.full(n, -1, dtype=np.int64)
    pred[order[1:]] = order[(rng.random(n - 1) * np.arange(1, n)).astype(np.int64)]
    sig = rng.integers(0, 2**63, size=n, dtype=np.uint64)
    sig[pred < 0] = 0
    jit = getattr(_kernels, "_tree_xor_jit", None)
    return f"tree_xor ({n} vertices)", (pred, sig), _kernels._tree_xor_numpy, \
        (lambda p, s: jit(p, s, order.astype(np.int64))) if jit else None


def planarity_case():
    s = generators.genus_g(3, 0.3, 15)
    sig, _ = homology.edge_signatures(s)
    _, rows = homology._form_rows(s)
    d = geodesic.distance_field(s, 0).dist
    E = s.edges
    order = np.argsort(np.maximum(d[E[:, 0]], d[E[:, 1]]), kind="stable")
    args = (E[order, 0].astype(np.int64), E[order, 1].astype(np.int64),
            np.asarray(sig, dtype=np.uint64)[order], s.n_vertices, np.asarray(rows, dtype=np.uint64))
    return f"planarity_sweep ({len(order)} edges)", args, _kernels._planarity_python, \
        getattr(_kernels, "_planarity_jit", None)


PIPELINE = (
    "import time; from lipsphere import generators, levelset, homology, refine_surface;"
    "s = refine_surface(generators.genus_g(2, 0.3, 12), 1); t = time.perf_counter();"
    "levelset.estimate_D(s, 0); homology.planarity_radius(s);"
    "print(time.perf_counter() - t)"
)


def pipeline(flag):
    env = dict(os.environ)
    env.pop("LIPSPHERE_NO_NUMBA", None)
    if flag:
        env["LIPSPHERE_NO_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-pipeline", action="store_true", help="skip the subprocess comparison")
    args = ap.parse_args()

    print(f"backend: {_kernels.backend()}")
    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for case in (diameter_case, tree_xor_case, planarity_case):
        name, inputs, slow, fast = case()
        t_np = _best(lambda: slow(*inputs), args.repeat)
        if fast is None or not _kernels.USE_NUMBA:
            print(f"{name:40s} {1e3 * t_np:12.2f} {'-':>12s} {'-':>9s}")
            continue
        a, b = slow(*inputs), fast(*inputs)
        same = np.array_equal(np.asarray(a, dtype=object), np.asarray(b, dtype=object)) \
            if not isinstance(a, np.ndarray) else np.array_equal(a, b)
        t_nb = _best(lambda: fast(*inputs), args.repeat)
        print(f"{name:40s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:8.1f}x"
              + ("" if same else "  MISMATCH"))

    if not args.no_pipeline:
        # the first numba run may include compilation if the cache is cold
        t_fast = pipeline(False)
        t_slow = pipeline(True)
        print(f"{'pipeline (estimate_D + planarity)':40s} {1e3 * t_slow:12.2f} {1e3 * t_fast:12.2f} "
              f"{t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
