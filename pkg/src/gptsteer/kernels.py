"""Hot numeric loops: simplex pivoting and brute-force polyhedral searches.

Each public name (`simplex_phase`, `enum_polytope_vertices`, `enum_cone_facets`,
`symmetry_search`) is the numba-compiled version of the corresponding `*_py`
function when the numba path is active (see backend.py), and the plain
function otherwise.  The `*_py` versions stay importable either way: the
exact-rational LP mode runs `simplex_phase_py` on object arrays of Fractions,
and the benchmark script times both variants against each other.

Kernel conventions:
  * no exceptions, failures are encoded in return codes;
  * no float literals inside simplex arithmetic (object-array reuse);
  * deterministic tie-breaking everywhere (lowest index / Bland).
"""

import numpy as np

from .backend import compile_kernel

# Tableau variable statuses.
AT_LOWER = 0
AT_UPPER = 1
BASIC = 2

# simplex_phase return codes (1 = infeasible is decided by the driver).
PHASE_OPTIMAL = 0
PHASE_UNBOUNDED = 2
PHASE_ITER_LIMIT = 3


def simplex_phase_py(T, basis, vstat, upper, m, N, cost_row, n_elig, tol, max_iter):
    """Run one phase of the bounded-variable simplex to optimality.

    T is the (m + 2) x (N + 1) tableau: rows 0..m-1 hold B^-1 A in columns
    0..N-1 and the current basic values in column N; rows m and m+1 are the
    phase-2 and phase-1 reduced-cost rows (both kept current by every pivot).
    All variables have lower bound 0 and upper bound `upper[j]` (np.inf for
    none).  Entering variable: lowest index with an improving reduced cost
    (Bland); leaving variable: minimum ratio over rows whose entry clears a
    pivot threshold well above the zero tolerance, then the largest pivot
    among near-minimal ratios (ties by lowest variable index).  Stepping
    onto a noise-level pivot poisons the working basis beyond what a
    refactorization can repair, so such rows never block; a direction that
    is a ray only because of sub-threshold entries is reported unbounded
    and the driver retries it on a rebuilt tableau.  A variable whose upper
    bound is 0 is fixed and never enters.
    """
    a_block = tol * 100
    it = 0
    while it < max_iter:
        it += 1
        enter = -1
        dirn = 0
        for j in range(n_elig):
            if vstat[j] == AT_LOWER:
                if T[cost_row, j] < -tol and upper[j] > 0:
                    enter = j
                    dirn = 1
                    break
            elif vstat[j] == AT_UPPER:
                if T[cost_row, j] > tol:
                    enter = j
                    dirn = -1
                    break
        if enter == -1:
            return PHASE_OPTIMAL

        # Ratio test, first pass: smallest step t >= 0 keeping every basic
        # variable inside its bounds, against the entering variable's own
        # bound flip.
        t_best = np.inf
        leave_row = -1
        for i in range(m):
            a = dirn * T[i, enter]
            if a > a_block:
                ratio = T[i, N] / a
            elif a < -a_block:
                ub = upper[basis[i]]
                if ub == np.inf:
                    continue
                ratio = (ub - T[i, N]) / (0 - a)
            else:
                continue
            if ratio < 0:
                ratio = ratio * 0  # clamp roundoff, keeping the scalar type
            if ratio < t_best:
                t_best = ratio
                leave_row = i

        t_flip = upper[enter]
        if leave_row == -1 and t_flip == np.inf:
            return PHASE_UNBOUNDED

        if leave_row >= 0 and t_best < np.inf:
            # Second pass: the largest pivot whose ratio is within a
            # relative band of the minimum (the band is zero in exact mode).
            cutoff = t_best + tol * (1 + t_best)
            best_a = dirn * T[leave_row, enter]
            for i in range(m):
                a = dirn * T[i, enter]
                if a > a_block:
                    ratio = T[i, N] / a
                elif a < -a_block:
                    ub = upper[basis[i]]
                    if ub == np.inf:
                        continue
                    ratio = (ub - T[i, N]) / (0 - a)
                else:
                    continue
                if ratio < 0:
                    ratio = ratio * 0
                if ratio <= cutoff:
                    aa = a if a > 0 else 0 - a
                    bb = best_a if best_a > 0 else 0 - best_a
                    if aa > bb or (aa == bb and basis[i] < basis[leave_row]):
                        leave_row = i
                        best_a = a
            a = dirn * T[leave_row, enter]
            if a > 0:
                t_best = T[leave_row, N] / a
            else:
                t_best = (upper[basis[leave_row]] - T[leave_row, N]) / (0 - a)
            if t_best < 0:
                t_best = t_best * 0

        if t_flip < t_best:
            # Bound flip: the entering variable crosses to its other bound,
            # the basis is unchanged.
            for i in range(m):
                T[i, N] = T[i, N] - dirn * T[i, enter] * t_flip
            vstat[enter] = 1 - vstat[enter]
            continue

        t = t_best
        p = T[leave_row, enter]
        a_r = dirn * p
        leaving = basis[leave_row]
        if vstat[enter] == AT_LOWER:
            x_enter = dirn * t
        else:
            x_enter = upper[enter] + dirn * t
        vstat[leaving] = AT_LOWER if a_r > 0 else AT_UPPER
        T[leave_row, :N] = T[leave_row, :N] / p
        for i in range(m + 2):
            if i == leave_row:
                continue
            f = T[i, enter]
            if i < m:
                T[i, N] = T[i, N] - dirn * f * t
            if f != 0:
                T[i, :N] = T[i, :N] - f * T[leave_row, :N]
        T[leave_row, N] = x_enter
        basis[leave_row] = enter
        vstat[enter] = BASIC
    return PHASE_ITER_LIMIT


simplex_phase = compile_kernel(simplex_phase_py)


def drive_out_artificials(T, basis, vstat, upper, m, N, n_nonart, tol):
    """Pivot zero-valued basic artificials onto structural columns.

    Called between the phases (plain Python is fine: at most m degenerate
    pivots).  Rows where every structural entry vanishes are redundant; their
    artificial stays basic at 0 and is fixed by the caller via upper = 0.
    """
    for r in range(m):
        if basis[r] < n_nonart:
            continue
        piv = -1
        best = tol
        for j in range(n_nonart):
            if vstat[j] == BASIC:
                continue
            v = abs(T[r, j])
            if piv == -1 and v > 1e-7:
                piv = j
                break
            if v > best:
                best = v
                piv = j
        if piv == -1:
            continue
        p = T[r, piv]
        T[r, :N] = T[r, :N] / p
        for i in range(m + 2):
            if i == r:
                continue
            f = T[i, piv]
            if f != 0:
                T[i, :N] = T[i, :N] - f * T[r, :N]
        vstat[basis[r]] = AT_LOWER
        basis[r] = piv
        T[r, N] = 0 if vstat[piv] == AT_LOWER else upper[piv]
        vstat[piv] = BASIC


def gauss_solve_py(M, rhs, tol):
    """Solve M x = rhs in place (solution lands in rhs); 0 on tiny pivot."""
    d = M.shape[0]
    for k in range(d):
        p = k
        best = abs(M[k, k])
        for i in range(k + 1, d):
            v = abs(M[i, k])
            if v > best:
                best = v
                p = i
        if best <= tol:
            return 0
        if p != k:
            for c in range(d):
                tmp = M[k, c]
                M[k, c] = M[p, c]
                M[p, c] = tmp
            tmp = rhs[k]
            rhs[k] = rhs[p]
            rhs[p] = tmp
        piv = M[k, k]
        for i in range(k + 1, d):
            f = M[i, k] / piv
            if f != 0.0:
                for c in range(k, d):
                    M[i, c] -= f * M[k, c]
                rhs[i] -= f * rhs[k]
    for k in range(d - 1, -1, -1):
        s = rhs[k]
        for j in range(k + 1, d):
            s -= M[k, j] * rhs[j]
        rhs[k] = s / M[k, k]
    return 1


gauss_solve = compile_kernel(gauss_solve_py)


def gauss_det_py(M):
    """Determinant by elimination with partial pivoting; M is clobbered."""
    d = M.shape[0]
    det = 1.0
    for k in range(d):
        p = k
        best = abs(M[k, k])
        for i in range(k + 1, d):
            v = abs(M[i, k])
            if v > best:
                best = v
                p = i
        if best == 0.0:
            return 0.0
        if p != k:
            for c in range(d):
                tmp = M[k, c]
                M[k, c] = M[p, c]
                M[p, c] = tmp
            det = -det
        piv = M[k, k]
        det *= piv
        for i in range(k + 1, d):
            f = M[i, k] / piv
            if f != 0.0:
                for c in range(k, d):
                    M[i, c] -= f * M[k, c]
    return det


gauss_det = compile_kernel(gauss_det_py)


def enum_polytope_vertices_py(A, b, dedupe_tol, feas_tol, sing_tol, cap):
    """Vertices of {x : A x <= b} by brute force over d-subsets of rows.

    Rows of (A | b) should be normalized by the caller so the tolerances are
    meaningful.  Returns (vertices, overflow_flag); overflow means more than
    `cap` distinct vertices were found.
    """
    m, d = A.shape
    out = np.empty((cap, d))
    count = 0
    overflow = 0
    if m < d:
        return out[:0].copy(), 0
    idx = np.empty(d, np.int64)
    for k in range(d):
        idx[k] = k
    M = np.empty((d, d))
    rhs = np.empty(d)
    while True:
        for r in range(d):
            for c in range(d):
                M[r, c] = A[idx[r], c]
            rhs[r] = b[idx[r]]
        if gauss_solve(M, rhs, sing_tol) == 1:
            feas = True
            for i in range(m):
                s = -b[i]
                for c in range(d):
                    s += A[i, c] * rhs[c]
                if s > feas_tol:
                    feas = False
                    break
            if feas:
                dup = False
                for t in range(count):
                    close = True
                    for c in range(d):
                        if abs(out[t, c] - rhs[c]) > dedupe_tol:
                            close = False
                            break
                    if close:
                        dup = True
                        break
                if not dup:
                    if count >= cap:
                        overflow = 1
                        break
                    for c in range(d):
                        out[count, c] = rhs[c]
                    count += 1
        j = d - 1
        while j >= 0 and idx[j] == m - d + j:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for k in range(j + 1, d):
            idx[k] = idx[k - 1] + 1
    return out[:count].copy(), overflow


enum_polytope_vertices = compile_kernel(enum_polytope_vertices_py)


def enum_cone_facets_py(V, dedupe_tol, feas_tol, sing_tol, cap):
    """Facet normals of cone(V rows) from (d-1)-subsets of generators.

    Each subset of d-1 generators spans a candidate hyperplane; its normal is
    computed by cofactor expansion, oriented so every generator lies on the
    nonnegative side, unit-normalized and de-duplicated.  Rows of V should be
    normalized by the caller.  Returns (facets, overflow_flag).
    """
    n, d = V.shape
    k = d - 1
    out = np.empty((cap, d))
    count = 0
    overflow = 0
    if n < k or k < 1:
        return out[:0].copy(), 0
    idx = np.empty(k, np.int64)
    for i in range(k):
        idx[i] = i
    sub = np.empty((k, k))
    normal = np.empty(d)
    while True:
        for c in range(d):
            for r in range(k):
                cc = 0
                for col in range(d):
                    if col == c:
                        continue
                    sub[r, cc] = V[idx[r], col]
                    cc += 1
            det = gauss_det(sub) if k > 0 else 1.0
            if c % 2 == 0:
                normal[c] = det
            else:
                normal[c] = -det
        nrm = 0.0
        for c in range(d):
            nrm += normal[c] * normal[c]
        nrm = np.sqrt(nrm)
        if nrm > sing_tol:
            for c in range(d):
                normal[c] /= nrm
            pos = True
            neg = True
            for i in range(n):
                s = 0.0
                for c in range(d):
                    s += V[i, c] * normal[c]
                if s < -feas_tol:
                    pos = False
                if s > feas_tol:
                    neg = False
                if not pos and not neg:
                    break
            if pos or neg:
                if neg and not pos:
                    for c in range(d):
                        normal[c] = -normal[c]
                dup = False
                for t in range(count):
                    close = True
                    for c in range(d):
                        if abs(out[t, c] - normal[c]) > dedupe_tol:
                            close = False
                            break
                    if close:
                        dup = True
                        break
                if not dup:
                    if count >= cap:
                        overflow = 1
                        break
                    for c in range(d):
                        out[count, c] = normal[c]
                    count += 1
        j = k - 1
        while j >= 0 and idx[j] == n - k + j:
            j -= 1
        if j < 0:
            break
        idx[j] += 1
        for i in range(j + 1, k):
            idx[i] = idx[i - 1] + 1
    return out[:count].copy(), overflow


enum_cone_facets = compile_kernel(enum_cone_facets_py)


def symmetry_search_py(V, Binv, fix, match_tol, cap):
    """Linear maps permuting the rows of V and fixing `fix`.

    Binv is the inverse of the d x d matrix whose rows are the first d
    linearly independent vertices (chosen by the caller); a candidate map is
    determined by the images of those rows, enumerated as ordered d-tuples of
    distinct vertex indices (iterative backtracking, lexicographic order).
    Returns (matrices, perms, count, overflow_flag); matrices act on column
    vectors, perms[g, i] is the image vertex index of vertex i under map g.
    """
    n, d = V.shape
    mats = np.empty((cap, d, d))
    perms = np.empty((cap, n), np.int64)
    count = 0
    overflow = 0
    pos = np.full(d, -1, np.int64)
    used = np.zeros(n, np.uint8)
    W = np.empty((d, d))
    L = np.empty((d, d))
    perm = np.empty(n, np.int64)
    taken = np.zeros(n, np.uint8)
    w = np.empty(d)
    depth = 0
    while depth >= 0:
        nxt = pos[depth] + 1
        if pos[depth] >= 0:
            used[pos[depth]] = 0
        found = -1
        for cand in range(nxt, n):
            if used[cand] == 0:
                found = cand
                break
        if found == -1:
            pos[depth] = -1
            depth -= 1
            continue
        pos[depth] = found
        used[found] = 1
        if depth < d - 1:
            depth += 1
            continue

        # Full tuple: candidate map L = (Binv @ V[pos])^T.
        for r in range(d):
            for c in range(d):
                s = 0.0
                for q in range(d):
                    s += Binv[r, q] * V[pos[q], c]
                W[r, c] = s
        for r in range(d):
            for c in range(d):
                L[r, c] = W[c, r]
        ok = True
        for c in range(d):
            s = 0.0
            for q in range(d):
                s += L[c, q] * fix[q]
            if abs(s - fix[c]) > match_tol:
                ok = False
                break
        if ok:
            for i in range(n):
                taken[i] = 0
            for i in range(n):
                for r in range(d):
                    s = 0.0
                    for q in range(d):
                        s += L[r, q] * V[i, q]
                    w[r] = s
                hit = -1
                for j in range(n):
                    if taken[j] == 1:
                        continue
                    close = True
                    for r in range(d):
                        if abs(w[r] - V[j, r]) > match_tol:
                            close = False
                            break
                    if close:
                        hit = j
                        break
                if hit == -1:
                    ok = False
                    break
                taken[hit] = 1
                perm[i] = hit
        if ok:
            dup = False
            for g in range(count):
                same = True
                for i in range(n):
                    if perms[g, i] != perm[i]:
                        same = False
                        break
                if same:
                    dup = True
                    break
            if not dup:
                if count >= cap:
                    overflow = 1
                    break
                for r in range(d):
                    for c in range(d):
                        mats[count, r, c] = L[r, c]
                for i in range(n):
                    perms[count, i] = perm[i]
                count += 1
        # stay at this depth, try the next candidate for the last slot
    return mats[:count].copy(), perms[:count].copy(), count, overflow


symmetry_search = compile_kernel(symmetry_search_py)
