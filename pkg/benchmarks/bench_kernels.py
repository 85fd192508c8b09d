"""Timing of the compiled kernels against their pure-Python twins.

Each hot loop in gptsteer.kernels exists twice: the plain function
(`*_py`, always importable, reused by the exact-rational LP mode) and the
numba-compiled version selected by backend.py.  This script feeds both a
realistic workload, checks that they produce identical results, and prints
the timings side by side.  With GPTSTEER_NO_NUMBA=1 (or numba missing)
both names resolve to the same function and the speedup column is moot;
the script says so instead of pretending.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gptsteer import backend, kernels, systems


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - start, out


def phase1_tableau(rng, m, n):
    """Fresh phase-one tableau for min 1.artificials, A x + s = b."""
    A = rng.normal(size=(m, n))
    b = np.abs(rng.normal(size=m)) + 0.1
    N = n + m
    T = np.zeros((m + 2, N + 1))
    T[:m, :n] = A
    T[:m, n:N] = np.eye(m)
    T[:m, N] = b
    T[m, :n] = rng.normal(size=n)
    T[m + 1, :n] = -A.sum(axis=0)
    T[m + 1, N] = -b.sum()
    basis = np.arange(n, N, dtype=np.int64)
    vstat = np.zeros(N, dtype=np.int64)
    vstat[basis] = kernels.BASIC
    upper = np.full(N, np.inf)
    return T, basis, vstat, upper, m, N, n


def bench_simplex(rng, rounds=40, m=40, n=120):
    problems = [phase1_tableau(rng, m, n) for _ in range(rounds)]

    def run(phase, probs):
        codes = []
        for T, basis, vstat, upper, m0, N, ncols in probs:
            T, basis, vstat, upper = (T.copy(), basis.copy(),
                                      vstat.copy(), upper.copy())
            codes.append(phase(T, basis, vstat, upper, m0, N, m0 + 1,
                               ncols, 1e-9, 5000))
            codes.append(float(T[m0 + 1, N]))
        return codes
    fast_t, fast = timed(run, kernels.simplex_phase, problems)
    slow_t, slow = timed(run, kernels.simplex_phase_py, problems)
    agree = np.allclose(fast, slow, atol=1e-6)
    return "simplex_phase", fast_t, slow_t, agree


def bench_vertex_enum(rng, m=28, d=6):
    A = rng.normal(size=(m, d))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    b = np.ones(m)
    args = (A, b, 1e-7, 1e-9, 1e-9, 4096)
    fast_t, (vf, of) = timed(kernels.enum_polytope_vertices, *args)
    slow_t, (vs, os_) = timed(kernels.enum_polytope_vertices_py, *args)
    agree = of == os_ and vf.shape == vs.shape and np.allclose(
        np.sort(vf.ravel()), np.sort(vs.ravel()), atol=1e-7)
    return "enum_polytope_vertices", fast_t, slow_t, agree


def bench_facet_enum(rng, n=22, d=6):
    V = rng.normal(size=(n, d))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    args = (V, 1e-7, 1e-9, 1e-9, 4096)
    fast_t, (ff, of) = timed(kernels.enum_cone_facets, *args)
    slow_t, (fs, os_) = timed(kernels.enum_cone_facets_py, *args)
    agree = of == os_ and ff.shape == fs.shape and np.allclose(
        np.sort(ff.ravel()), np.sort(fs.ravel()), atol=1e-7)
    return "enum_cone_facets", fast_t, slow_t, agree


def bench_symmetry(cube_g=4):
    cube = systems.hypercube(cube_g)
    V = cube.vertices
    rows = []
    for i in range(V.shape[0]):
        if np.linalg.matrix_rank(V[rows + [i]]) > len(rows):
            rows.append(i)
        if len(rows) == cube.dim:
            break
    B = V[rows]
    Binv = np.linalg.inv(B)
    fix = cube.barycenter.coords
    args = (V, Binv, fix, 1e-7, 4096)
    fast_t, (mf, pf, cf, of) = timed(kernels.symmetry_search, *args)
    slow_t, (ms, ps, cs, os_) = timed(kernels.symmetry_search_py, *args)
    agree = cf == cs and of == os_ and np.array_equal(pf, ps)
    return f"symmetry_search (hypercube {cube_g})", fast_t, slow_t, agree


def main():
    if backend.USE_NUMBA:
        print("backend: numba kernels active")
        # first calls pay the JIT/cache load; warm everything up
        rng = np.random.default_rng(99)
        bench_simplex(rng, rounds=2, m=8, n=16)
        bench_vertex_enum(rng, m=10, d=3)
        bench_facet_enum(rng, n=8, d=3)
        bench_symmetry(cube_g=2)
    else:
        print("backend: pure numpy fallback (GPTSTEER_NO_NUMBA set or "
              "numba missing); both columns time the same function")

    rng = np.random.default_rng(7)
    rows = [
        bench_simplex(rng),
        bench_vertex_enum(rng),
        bench_facet_enum(rng),
        bench_symmetry(),
    ]
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'compiled':>9}  {'python':>9}  "
          f"{'speedup':>7}  match")
    for name, fast_t, slow_t, agree in rows:
        speed = slow_t / fast_t if fast_t > 0 else float("inf")
        print(f"{name:<{width}}  {fast_t:>8.3f}s  {slow_t:>8.3f}s  "
              f"{speed:>6.1f}x  {'yes' if agree else 'NO'}")
    if not all(r[3] for r in rows):
        raise SystemExit("kernel variants disagree")


if __name__ == "__main__":
    main()
