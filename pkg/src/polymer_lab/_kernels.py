"""Compiled inner loops.

Walks inside the kernels are arrays of step indices into a step array of
shape (m, d). Local times live in a dense grid of side 2R + 1 centred on
the origin, R = (max depth) * D, so every reachable vertex has a cell.
"""

import numpy as np
from numba import njit

OK = 0
CAP_EXCEEDED = 1
BUDGET_EXCEEDED = 2
DEAD_PREFIX = 3

# accumulator rows
Z, H, ZPLUS, IB, NORM = 0, 1, 2, 3, 4


@njit(cache=True, nogil=True, inline="always")
def _neumaier(s, c, k, j, v):
    t = s[k, j] + v
    if abs(s[k, j]) >= abs(v):
        c[k, j] += (s[k, j] - t) + v
    else:
        c[k, j] += (v - t) + s[k, j]
    s[k, j] = t


@njit(cache=True, nogil=True, inline="always")
def _lse_add(m, s, c, k, j, lw):
    # streaming log-sum-exp: value = m + log(s + c), s/c a compensated pair
    if lw > m[k, j]:
        f = np.exp(m[k, j] - lw)
        s[k, j] *= f
        c[k, j] *= f
        m[k, j] = lw
        _neumaier(s, c, k, j, 1.0)
    else:
        _neumaier(s, c, k, j, np.exp(lw - m[k, j]))


@njit(cache=True, nogil=True)
def _has_renewal(pts, maxx, n):
    sufmin = pts[n, 0]
    for i in range(n - 1, 0, -1):
        xi = pts[i, 0]
        if xi >= maxx[i - 1] and xi < sufmin:
            return True
        if xi < sufmin:
            sufmin = xi
    return False


@njit(cache=True, nogil=True)
def _record(n, pts, lin, lw, iw, minx1, maxx, R, rational,
            acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c):
    w = lin[n]
    x = pts[n, 0]
    if n == 0:
        plus = True
        bridge = True
        irreducible = False
    else:
        plus = minx1[n] > 0
        bridge = plus and x >= maxx[n]
        irreducible = bridge and not _has_renewal(pts, maxx, n)
    r2 = 0.0
    for k in range(pts.shape[1]):
        r2 += pts[n, k] * pts[n, k]
    _neumaier(acc, comp, NORM, n, w * np.sqrt(r2))
    _neumaier(xh, xh_c, n, x + R, w)
    flags = (True, bridge, plus, irreducible)
    for k in range(4):
        if flags[k]:
            _neumaier(acc, comp, k, n, w)
            _lse_add(lse_m, lse_s, lse_c, k, n, lw[n])
            counts[k, n] += 1
            if rational:
                ints[k, n] += iw[n]
    if bridge:
        _neumaier(hnh, hnh_c, n, x, w)


@njit(cache=True, nogil=True)
def enumerate_walks(steps, probs, logp, nums, phi_tab, N, prefix, min_depth, max_depth,
                    node_limit, rational):
    """Depth-first walk over every walk extending ``prefix``.

    Nodes of depth in [min_depth, max_depth] are recorded; arrays are sized
    for lengths 0..N. Returns accumulators, node count and a status code.
    """
    m, d = steps.shape
    D = 0
    for s in range(m):
        if steps[s, 0] > D:
            D = steps[s, 0]
    R = N * D
    base = 2 * R + 1
    stride = np.empty(d, np.int64)
    size = 1
    for k in range(d):
        stride[k] = size
        size *= base
    center = 0
    for k in range(d):
        center += R * stride[k]
    dstep = np.zeros(m, np.int64)
    for s in range(m):
        for k in range(d):
            dstep[s] += steps[s, k] * stride[k]

    acc = np.zeros((5, N + 1))
    comp = np.zeros((5, N + 1))
    lse_m = np.full((4, N + 1), -np.inf)
    lse_s = np.zeros((4, N + 1))
    lse_c = np.zeros((4, N + 1))
    counts = np.zeros((4, N + 1), np.int64)
    ints = np.zeros((4, N + 1), np.int64)
    hnh = np.zeros((N + 1, R + 1))
    hnh_c = np.zeros((N + 1, R + 1))
    xh = np.zeros((N + 1, 2 * R + 1))
    xh_c = np.zeros((N + 1, 2 * R + 1))

    grid = np.zeros(size, np.int32)
    pts = np.zeros((N + 1, d), np.int64)
    cell = np.zeros(N + 1, np.int64)
    lw = np.zeros(N + 1)
    lin = np.ones(N + 1)
    iw = np.ones(N + 1, np.int64)
    minx1 = np.zeros(N + 1, np.int64)
    maxx = np.zeros(N + 1, np.int64)
    choice = np.zeros(N + 1, np.int64)
    ncap = phi_tab.shape[0]

    cell[0] = center
    grid[center] = 1
    minx1[0] = 1 << 62
    p = prefix.shape[0] - 1
    for t in range(1, p + 1):
        s = -1
        for q in range(m):
            same = True
            for k in range(d):
                if steps[q, k] != prefix[t, k] - prefix[t - 1, k]:
                    same = False
                    break
            if same:
                s = q
                break
        nc = cell[t - 1] + dstep[s]
        c = grid[nc]
        if c + 1 >= ncap:
            return acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c, 0, CAP_EXCEEDED
        hi = phi_tab[c + 1]
        if hi == np.inf:
            return acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c, 0, DEAD_PREFIX
        for k in range(d):
            pts[t, k] = prefix[t, k]
        cell[t] = nc
        grid[nc] += 1
        lw[t] = lw[t - 1] + logp[s] - (hi - phi_tab[c])
        lin[t] = lin[t - 1] * probs[s] * np.exp(phi_tab[c] - hi)
        iw[t] = iw[t - 1] * nums[s]
        minx1[t] = min(minx1[t - 1], pts[t, 0])
        maxx[t] = max(maxx[t - 1], pts[t, 0])

    if min_depth <= p <= max_depth:
        _record(p, pts, lin, lw, iw, minx1, maxx, R, rational,
                acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c)
    nodes = 0
    status = OK
    depth = p
    choice[p] = 0
    while True:
        if depth >= max_depth or choice[depth] == m:
            if depth == p:
                break
            grid[cell[depth]] -= 1
            depth -= 1
            continue
        s = choice[depth]
        choice[depth] += 1
        nc = cell[depth] + dstep[s]
        c = grid[nc]
        if c + 1 >= ncap:
            status = CAP_EXCEEDED
            break
        hi = phi_tab[c + 1]
        if hi == np.inf:
            continue
        nodes += 1
        if nodes > node_limit:
            status = BUDGET_EXCEEDED
            break
        t = depth + 1
        for k in range(d):
            pts[t, k] = pts[depth, k] + steps[s, k]
        cell[t] = nc
        grid[nc] += 1
        lw[t] = lw[depth] + logp[s] - (hi - phi_tab[c])
        lin[t] = lin[depth] * probs[s] * np.exp(phi_tab[c] - hi)
        iw[t] = iw[depth] * nums[s]
        minx1[t] = min(minx1[depth], pts[t, 0])
        maxx[t] = max(maxx[depth], pts[t, 0])
        depth = t
        choice[depth] = 0
        if depth >= min_depth:
            _record(depth, pts, lin, lw, iw, minx1, maxx, R, rational,
                    acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c)
    return acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c, nodes, status


@njit(cache=True, nogil=True)
def collect_walks(steps, logp, phi_tab, lo, hi_len, kind, capacity, node_limit):
    """Step codes and log-weights of every weighted walk with lo <= length <= hi_len.

    kind: 0 all walks, 1 bridges, 2 irreducible bridges. Output is in DFS
    (lexicographic step-index) order. If more than ``capacity`` walks match,
    the count is still returned so the caller can retry.
    """
    m, d = steps.shape
    N = hi_len
    D = 0
    for s in range(m):
        if steps[s, 0] > D:
            D = steps[s, 0]
    R = N * D
    base = 2 * R + 1
    stride = np.empty(d, np.int64)
    size = 1
    for k in range(d):
        stride[k] = size
        size *= base
    center = 0
    for k in range(d):
        center += R * stride[k]
    dstep = np.zeros(m, np.int64)
    for s in range(m):
        for k in range(d):
            dstep[s] += steps[s, k] * stride[k]

    codes = np.full((capacity, max(N, 1)), -1, np.int16)
    lens = np.zeros(capacity, np.int64)
    lws = np.zeros(capacity)
    grid = np.zeros(size, np.int32)
    pts = np.zeros((N + 1, d), np.int64)
    cell = np.zeros(N + 1, np.int64)
    lw = np.zeros(N + 1)
    minx1 = np.zeros(N + 1, np.int64)
    maxx = np.zeros(N + 1, np.int64)
    choice = np.zeros(N + 1, np.int64)
    path = np.zeros(N + 1, np.int64)
    ncap = phi_tab.shape[0]
    cell[0] = center
    grid[center] = 1
    minx1[0] = 1 << 62
    count = 0
    nodes = 0
    status = OK

    if lo == 0 and kind != 2:
        if count < capacity:
            lens[count] = 0
        count += 1
    depth = 0
    while True:
        if depth >= N or choice[depth] == m:
            if depth == 0:
                break
            grid[cell[depth]] -= 1
            depth -= 1
            continue
        s = choice[depth]
        choice[depth] += 1
        nc = cell[depth] + dstep[s]
        c = grid[nc]
        if c + 1 >= ncap:
            status = CAP_EXCEEDED
            break
        hi = phi_tab[c + 1]
        if hi == np.inf:
            continue
        nodes += 1
        if nodes > node_limit:
            status = BUDGET_EXCEEDED
            break
        t = depth + 1
        for k in range(d):
            pts[t, k] = pts[depth, k] + steps[s, k]
        path[t] = s
        cell[t] = nc
        grid[nc] += 1
        lw[t] = lw[depth] + logp[s] - (hi - phi_tab[c])
        minx1[t] = min(minx1[depth], pts[t, 0])
        maxx[t] = max(maxx[depth], pts[t, 0])
        depth = t
        choice[depth] = 0
        if t < lo:
            continue
        if kind >= 1:
            if not (minx1[t] > 0 and pts[t, 0] >= maxx[t]):
                continue
            if kind == 2 and _has_renewal(pts, maxx, t):
                continue
        if count < capacity:
            for q in range(t):
                codes[count, q] = path[q + 1]
            lens[count] = t
            lws[count] = lw[t]
        count += 1
    return codes, lens, lws, count, nodes, status


@njit(cache=True, nogil=True)
def sequential_descent(codes, cumw, uniforms):
    """Draw leaves step by step: at depth t the next step is chosen with
    probability proportional to the total weight of the completions under it.

    ``codes`` (L, n) are sorted lexicographically, ``cumw`` has length L + 1.
    Returns the chosen leaf index per sample.
    """
    L, n = codes.shape
    S = uniforms.shape[0]
    out = np.empty(S, np.int64)
    for r in range(S):
        lo = 0
        hi = L
        for t in range(n):
            target = cumw[lo] + uniforms[r, t] * (cumw[hi] - cumw[lo])
            # leaf whose cumulative interval holds target
            a = lo
            b = hi - 1
            while a < b:
                mid = (a + b + 1) // 2
                if cumw[mid] <= target:
                    a = mid
                else:
                    b = mid - 1
            c = codes[a, t]
            # children are contiguous: shrink [lo, hi) to code c at position t
            a1 = lo
            b1 = a
            while a1 < b1:
                mid = (a1 + b1) // 2
                if codes[mid, t] < c:
                    a1 = mid + 1
                else:
                    b1 = mid
            a2 = a
            b2 = hi
            while a2 < b2:
                mid = (a2 + b2) // 2
                if codes[mid, t] <= c:
                    a2 = mid + 1
                else:
                    b2 = mid
            lo = a1
            hi = a2
        out[r] = lo
    return out


@njit(cache=True, nogil=True)
def _interaction(code, steps, phi_tab, keybuf, ptbuf):
    """Sum of phi(local time) over vertices; -1.0 signals a cap overflow."""
    n = code.shape[0]
    d = steps.shape[1]
    for k in range(d):
        ptbuf[0, k] = 0
    for t in range(n):
        for k in range(d):
            ptbuf[t + 1, k] = ptbuf[t, k] + steps[code[t], k]
    R = 0
    for s in range(steps.shape[0]):
        for k in range(d):
            R = max(R, abs(steps[s, k]))
    R *= n
    base = 2 * R + 1
    for t in range(n + 1):
        key = 0
        for k in range(d):
            key = key * base + (ptbuf[t, k] + R)
        keybuf[t] = key
    srt = np.sort(keybuf[: n + 1])
    total = 0.0
    run = 1
    for t in range(1, n + 2):
        if t <= n and srt[t] == srt[t - 1]:
            run += 1
            continue
        if run >= phi_tab.shape[0]:
            return -1.0
        total += phi_tab[run]
        run = 1
    return total


@njit(cache=True, nogil=True)
def mcmc_run(code, steps, cum_rho, sym, phi_tab, uniforms, p_pivot, sweep_len):
    """Metropolis chain on walks of fixed length, driven by pre-drawn uniforms.

    Each proposal uses 8 uniforms: move type, site, group element / window
    length, acceptance, up to 4 redrawn steps. Both moves have acceptance
    min(1, exp(Phi_old - Phi_new)); for the window redraw the step factors
    cancel against the proposal density.
    Records endpoint x, y and Euclidean norm after every ``sweep_len`` proposals.
    """
    n = code.shape[0]
    d = steps.shape[1]
    m = steps.shape[0]
    G = sym.shape[0]
    keybuf = np.empty(n + 1, np.int64)
    ptbuf = np.empty((n + 1, d), np.int64)
    prop = code.copy()
    cur = _interaction(code, steps, phi_tab, keybuf, ptbuf)
    P = uniforms.shape[0]
    nrec = P // sweep_len
    rec = np.zeros((nrec, 3))
    stats = np.zeros((2, 2), np.int64)  # [move, proposed/accepted]
    status = OK
    if cur < 0:
        return code, rec, stats, CAP_EXCEEDED
    for it in range(P):
        u = uniforms[it]
        for t in range(n):
            prop[t] = code[t]
        if u[0] < p_pivot:
            mv = 0
            k = min(int(u[1] * n), n - 1)
            g = 1 + min(int(u[2] * (G - 1)), G - 2)
            for t in range(k, n):
                prop[t] = sym[g, code[t]]
        else:
            mv = 1
            wmax = min(4, n)
            L = 1 + min(int(u[2] * wmax), wmax - 1)
            a = min(int(u[1] * (n - L + 1)), n - L)
            for q in range(L):
                r = u[4 + q]
                s = 0
                while s < m - 1 and cum_rho[s + 1] <= r:
                    s += 1
                prop[a + q] = s
        stats[mv, 0] += 1
        new = _interaction(prop, steps, phi_tab, keybuf, ptbuf)
        if new < 0:
            status = CAP_EXCEEDED
            break
        if new != np.inf and (new <= cur or u[3] < np.exp(cur - new)):
            for t in range(n):
                code[t] = prop[t]
            cur = new
            stats[mv, 1] += 1
        if (it + 1) % sweep_len == 0:
            j = (it + 1) // sweep_len - 1
            ex = 0
            ey = 0
            r2 = 0.0
            for k in range(d):
                e = 0
                for t in range(n):
                    e += steps[code[t], k]
                if k == 0:
                    ex = e
                if k == 1:
                    ey = e
                r2 += e * e
            rec[j, 0] = ex
            rec[j, 1] = ey
            rec[j, 2] = np.sqrt(r2)
    return code, rec, stats, status
