"""Compare the compiled and numpy kernel backends.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best-of-N wall time per call for both backends and the
speedup of the compiled one. End-to-end rows swap the backend under the
library calls that use it.
"""
import argparse
import time

import numpy as np

from modelsparse import kernels
from modelsparse.glm import Logistic
from modelsparse.model import DisjointGroups, PlainK
from modelsparse.projection import project_bounded
from modelsparse.smrh import analytic_smrh_bounds
from modelsparse.synth import gen_dataset, gen_parameter


def best_time(fn, repeat, number):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def cases(rng):
    sym = {}
    for dim in (6, 24, 64):
        a = rng.standard_normal((dim, dim))
        sym[dim] = a + a.T
    big = rng.standard_normal(100_000)
    ties = rng.integers(-3, 4, 100_000).astype(float)
    cells = np.array_split(np.arange(20_000), 2_000)
    indptr = np.concatenate([[0], np.cumsum([len(c) for c in cells])]).astype(np.int64)
    indices = np.concatenate(cells).astype(np.int64)
    seg_values = rng.standard_normal(20_000)

    groups = tuple(tuple(int(i) for i in c) for c in np.array_split(np.arange(400), 100))
    grouped = DisjointGroups(400, groups, 5)
    plain = PlainK(2_000, 50)
    v_grouped = rng.standard_normal(400)
    v_plain = rng.standard_normal(2_000)

    model = PlainK(14, 2)
    theta = gen_parameter(model, 1.0, 2, seed=0)
    data = gen_dataset(Logistic(), theta, 300, seed=0)

    return [
        ("jacobi 6x6", lambda: kernels.jacobi_eigenvalues(sym[6]), 200),
        ("jacobi 24x24", lambda: kernels.jacobi_eigenvalues(sym[24]), 20),
        ("jacobi 64x64", lambda: kernels.jacobi_eigenvalues(sym[64]), 2),
        ("top-k k=50, p=1e5", lambda: kernels.topk_stable(big, 50), 20),
        ("top-k k=50, p=1e5, heavy ties", lambda: kernels.topk_stable(ties, 50), 20),
        ("segment norms 2000 cells", lambda: kernels.segment_sq_norms(seg_values, indptr, indices), 200),
        ("project PlainK(2000, 50)", lambda: project_bounded(plain, 1.0, v_plain), 200),
        ("project 100 groups, g=5", lambda: project_bounded(grouped, 1.0, v_grouped), 500),
        ("analytic SMRH, PlainK(14,2)", lambda: analytic_smrh_bounds(model, data, Logistic(), 1.0), 1),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    rows = cases(rng)
    print(f"{'case':34s}" + "".join(f"{b:>14s}" for b in backends) + "   speedup")
    saved = kernels._impl
    try:
        for name, fn, number in rows:
            times = []
            for b in backends:
                kernels._impl = kernels.get_backend(b)
                fn()  # warm up
                times.append(best_time(fn, args.repeat, number))
            cells = "".join(f"{t * 1e6:12.1f}us" for t in times)
            speed = f"{times[-1] / times[0]:8.2f}x" if len(times) == 2 else ""
            print(f"{name:34s}{cells}  {speed}")
    finally:
        kernels._impl = saved


if __name__ == "__main__":
    main()
