# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels; drop-in replacement for qss._kernels_py.

The contracts, operation order and rounding behaviour are pinned by the
fallback module: every float operation here happens in the same sequence,
so the two backends return bit-identical results.  Tables are built by the
callers; this module only searches, counts, folds and argmaxes.  Must be
compiled with FP contraction disabled (see setup.py).
"""

from libc.math cimport INFINITY

import numpy as np


cdef inline Py_ssize_t _bisect_gt(const double *cdf, Py_ssize_t m, double u) noexcept nogil:
    # First index with cdf[idx] > u, clamped to m - 1;
    # matches numpy searchsorted(side="right") on a non-decreasing row.
    cdef Py_ssize_t lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo > m - 1:
        lo = m - 1
    return lo


def sample_rows(const double[:, ::1] cdf_rows, const double[::1] u):
    """Inverse-CDF draw per trial: smallest index with cdf > u."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nrows = cdf_rows.shape[0]
    cdef Py_ssize_t m = cdf_rows.shape[1]
    if nrows != 1 and nrows != n:
        raise ValueError("cdf_rows must have 1 row or one row per trial")
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t j, r
    with nogil:
        for j in range(n):
            r = 0 if nrows == 1 else j
            o[j] = _bisect_gt(&cdf_rows[r, 0], m, u[j])
    return out


def bernoulli_count_rows(const double[::1] p, const double[:, ::1] u_rows, Py_ssize_t n_draws):
    """Binomial draws by counting: h[i] = #{j < n_draws : u_rows[i, j] < p[i]}."""
    cdef Py_ssize_t n = p.shape[0]
    if u_rows.shape[0] != n or n_draws > u_rows.shape[1]:
        raise ValueError("u_rows must provide n_draws uniforms per trial")
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t i, j
    cdef long long h
    cdef double pi_
    with nogil:
        for i in range(n):
            pi_ = p[i]
            h = 0
            for j in range(n_draws):
                if u_rows[i, j] < pi_:
                    h += 1
            o[i] = h
    return out


cdef Py_ssize_t _fold_argmax(
    const long long *rows,
    Py_ssize_t k,
    const double[:, ::1] loglik,
    const unsigned char[:, ::1] valid,
    double *acc,
    unsigned char *ok,
) noexcept nogil:
    # Left-fold k loglik rows and AND the validity rows, then first-maximum
    # argmax over valid hypotheses.  Returns -1 when none is valid.
    cdef Py_ssize_t n_hyp = loglik.shape[1]
    cdef Py_ssize_t h, i, best_i
    cdef long long r0 = rows[0], ri
    cdef double best, v
    for h in range(n_hyp):
        acc[h] = loglik[r0, h]
        ok[h] = valid[r0, h]
    for i in range(1, k):
        ri = rows[i]
        for h in range(n_hyp):
            acc[h] = acc[h] + loglik[ri, h]
            ok[h] = ok[h] & valid[ri, h]
    best_i = -1
    best = -INFINITY
    for h in range(n_hyp):
        if ok[h] and (best_i < 0 or acc[h] > best):
            best = acc[h]
            best_i = h
    return best_i


def gather_fold_argmax(
    const long long[:, ::1] idx_rows,
    const double[:, ::1] loglik,
    const unsigned char[:, ::1] valid,
):
    """Per trial: left-fold loglik rows of its samples, argmax over hypotheses."""
    cdef Py_ssize_t n = idx_rows.shape[0]
    cdef Py_ssize_t k = idx_rows.shape[1]
    cdef Py_ssize_t n_hyp = loglik.shape[1]
    out = np.empty(n, dtype=np.int64)
    acc_buf = np.empty(n_hyp, dtype=np.float64)
    ok_buf = np.empty(n_hyp, dtype=np.uint8)
    cdef long long[::1] o = out
    cdef double[::1] acc = acc_buf
    cdef unsigned char[::1] ok = ok_buf
    cdef Py_ssize_t j, best
    cdef Py_ssize_t bad = -1
    with nogil:
        for j in range(n):
            best = _fold_argmax(&idx_rows[j, 0], k, loglik, valid, &acc[0], &ok[0])
            if best < 0:
                bad = j
                break
            o[j] = best
    if bad >= 0:
        raise AssertionError("all hypotheses carry zero likelihood")
    return out


def weighted_fold_argmax(
    const long long[:, ::1] h_rows,
    long long n_shot,
    const double[:, ::1] logsin2,
    const double[:, ::1] logcos2,
):
    """Per trial: argmax of sum_s [h log sin^2 + (n_shot - h) log cos^2]."""
    cdef Py_ssize_t n = h_rows.shape[0]
    cdef Py_ssize_t n_stages = h_rows.shape[1]
    cdef Py_ssize_t n_hyp = logsin2.shape[1]
    out = np.empty(n, dtype=np.int64)
    acc_buf = np.empty(n_hyp, dtype=np.float64)
    cdef long long[::1] o = out
    cdef double[::1] acc = acc_buf
    cdef Py_ssize_t j, s, h, best_i
    cdef long long hc, nh
    cdef double w, best
    with nogil:
        for j in range(n):
            for h in range(n_hyp):
                acc[h] = 0.0
            for s in range(n_stages):
                hc = h_rows[j, s]
                nh = n_shot - hc
                if hc > 0:
                    w = <double> hc
                    for h in range(n_hyp):
                        acc[h] = acc[h] + w * logsin2[s, h]
                if nh > 0:
                    w = <double> nh
                    for h in range(n_hyp):
                        acc[h] = acc[h] + w * logcos2[s, h]
            best_i = 0
            best = acc[0]
            for h in range(1, n_hyp):
                if acc[h] > best:
                    best = acc[h]
                    best_i = h
            o[j] = best_i
    return out


cdef inline void _insort(long long *buf, Py_ssize_t n, long long idx) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid, i
    while lo < hi:
        mid = (lo + hi) // 2
        if buf[mid] < idx:
            lo = mid + 1
        else:
            hi = mid
    for i in range(n, lo, -1):
        buf[i] = buf[i - 1]
    buf[lo] = idx


cdef inline Py_ssize_t _window_len(double alpha, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t w = <Py_ssize_t> (alpha * n + 1e-9)
    if w < 1:
        w = 1
    return w


cdef inline Py_ssize_t _first_window(const long long *buf, Py_ssize_t n, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n - w + 1):
        if buf[i + w - 1] - buf[i] <= 2:
            return i
    return -1


cdef inline Py_ssize_t _densest_window(const long long *buf, Py_ssize_t n, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t best = 0, i
    cdef long long best_spread = buf[w - 1] - buf[0], spread
    for i in range(1, n - w + 1):
        spread = buf[i + w - 1] - buf[i]
        if spread < best_spread:
            best = i
            best_spread = spread
    return best


def abpea_rows(
    const double[:, ::1] cdf_rows,
    const double[:, ::1] u_rows,
    const double[:, ::1] loglik,
    const unsigned char[:, ::1] valid,
    double alpha,
    Py_ssize_t n_min,
    Py_ssize_t n_max,
):
    """Adaptive Bayesian estimation, one trial per row; see the fallback."""
    cdef Py_ssize_t n = u_rows.shape[0]
    cdef Py_ssize_t nrows = cdf_rows.shape[0]
    cdef Py_ssize_t m = cdf_rows.shape[1]
    cdef Py_ssize_t n_hyp = loglik.shape[1]
    if nrows != 1 and nrows != n:
        raise ValueError("cdf_rows must have 1 row or one row per trial")
    est = np.empty(n, dtype=np.int64)
    shots = np.empty(n, dtype=np.int64)
    samp_buf = np.empty(n_max, dtype=np.int64)
    acc_buf = np.empty(n_hyp, dtype=np.float64)
    ok_buf = np.empty(n_hyp, dtype=np.uint8)
    cdef long long[::1] e = est
    cdef long long[::1] sh = shots
    cdef long long[::1] samp = samp_buf
    cdef double[::1] acc = acc_buf
    cdef unsigned char[::1] ok = ok_buf
    cdef Py_ssize_t j, k, ns, w, win, best
    cdef Py_ssize_t bad = -1
    cdef const double *cdf
    with nogil:
        for j in range(n):
            cdf = &cdf_rows[0, 0] if nrows == 1 else &cdf_rows[j, 0]
            ns = 0
            for k in range(n_min):
                _insort(&samp[0], ns, _bisect_gt(cdf, m, u_rows[j, k]))
                ns += 1
            win = -1
            w = 0
            while ns < n_max:
                w = _window_len(alpha, ns)
                win = _first_window(&samp[0], ns, w)
                if win >= 0:
                    break
                _insort(&samp[0], ns, _bisect_gt(cdf, m, u_rows[j, ns]))
                ns += 1
            if win < 0:
                w = _window_len(alpha, ns)
                win = _densest_window(&samp[0], ns, w)
            sh[j] = ns
            best = _fold_argmax(&samp[win], w, loglik, valid, &acc[0], &ok[0])
            if best < 0:
                bad = j
                break
            e[j] = best
    if bad >= 0:
        raise AssertionError("all hypotheses carry zero likelihood")
    return est, shots
