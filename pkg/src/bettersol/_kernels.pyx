# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; ``_kernels_py`` is the pure-Python twin of this module."""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan, ceil, fabs, log, log1p, log2, sqrt, lgamma, M_PI
from scipy.special.cython_special cimport ndtr, stdtr

cnp.import_array()

cdef double LOG_SQRT_2PI = 0.91893853320467274178
cdef double INVPHI = 0.61803398874989484820
cdef double RANK_TOL = 1e-10
cdef int NLL_GRID = 256


cdef inline double _cdf(int fam, double df, double z) noexcept nogil:
    if fam == 0:
        return ndtr(z)
    elif fam == 2:
        return 0.5 + atan(z) / M_PI
    return stdtr(df, z)


cdef inline double _neglog0(int fam, double df, double tconst, double z) noexcept nogil:
    # -log f0(z)
    if fam == 0:
        return 0.5 * z * z + LOG_SQRT_2PI
    elif fam == 2:
        return log(M_PI) + log1p(z * z)
    return -tconst + 0.5 * (df + 1.0) * log1p(z * z / df)


def fisher_yates(Py_ssize_t n, Py_ssize_t m, const cnp.int64_t[:, ::1] draws):
    """Partial Fisher-Yates per row; ``draws[b, j]`` is uniform on [0, n - j)."""
    cdef Py_ssize_t B = draws.shape[0]
    out_arr = np.empty((B, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    perm_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] perm = perm_arr
    cdef Py_ssize_t b, j, k
    cdef cnp.int64_t t
    with nogil:
        for b in range(B):
            for j in range(n):
                perm[j] = j
            for j in range(m):
                k = j + draws[b, j]
                t = perm[j]
                perm[j] = perm[k]
                perm[k] = t
            for j in range(m):
                out[b, j] = perm[j]
    out_arr.sort(axis=1)
    return out_arr


cdef inline void _ks_ud(const double[:] v, Py_ssize_t m, int fam, double df,
                        double scale, double theta, double* U, double* D) noexcept nogil:
    cdef Py_ssize_t i
    cdef double F, u = -1.0, d = -1.0, a, c
    for i in range(m):
        F = _cdf(fam, df, (v[i] - theta) / scale)
        a = (i + 1.0) / m - F
        c = F - (<double>i) / m
        if a > u:
            u = a
        if c > d:
            d = c
    U[0] = u
    D[0] = d


def ks_dist(const double[::1] v, int fam, double df, double scale, double theta):
    cdef double U, D
    _ks_ud(v, v.shape[0], fam, df, scale, theta, &U, &D)
    return U if U > D else D


def ks_min(const double[:, ::1] V, int fam, double df, double scale, double tol):
    """Row-wise inf over theta of the Kolmogorov distance (rows sorted).

    U(theta) is increasing and D(theta) decreasing in theta, so the infimum of
    max(U, D) sits at their crossing, located by bisection.
    """
    cdef Py_ssize_t B = V.shape[0], m = V.shape[1], b, it, nit
    dist_arr = np.empty(B)
    theta_arr = np.empty(B)
    cdef double[::1] dist = dist_arr
    cdef double[::1] theta = theta_arr
    cdef double lo, hi, mid, U, D, w
    with nogil:
        for b in range(B):
            lo = V[b, 0] - 3.0 * scale
            hi = V[b, m - 1] + 3.0 * scale
            w = hi - lo
            nit = <Py_ssize_t>ceil(log2(w / tol)) if w > tol else 0
            for it in range(nit):
                mid = 0.5 * (lo + hi)
                _ks_ud(V[b], m, fam, df, scale, mid, &U, &D)
                if U > D:
                    hi = mid
                else:
                    lo = mid
            mid = 0.5 * (lo + hi)
            _ks_ud(V[b], m, fam, df, scale, mid, &U, &D)
            theta[b] = mid
            dist[b] = U if U > D else D
    return dist_arr, theta_arr


cdef inline double _nll(const double[:] v, Py_ssize_t m, int fam, double df,
                        double tconst, double scale, double theta) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(m):
        s += _neglog0(fam, df, tconst, (v[i] - theta) / scale)
    return s + m * log(scale)


def nll_min(const double[:, ::1] V, int fam, double df, double scale, double tol):
    """Row-wise profile negative log-likelihood and its minimiser."""
    cdef Py_ssize_t B = V.shape[0], m = V.shape[1], b, i, k, nit, it
    psi_arr = np.empty(B)
    theta_arr = np.empty(B)
    cdef double[::1] psi = psi_arr
    cdef double[::1] theta = theta_arr
    cdef double mean, ss, dv, lo, hi, h, x, fx, best, bx, a, c, d, fc, fd, vmin, vmax
    cdef double tconst = 0.0
    if fam == 1:
        tconst = lgamma((df + 1.0) / 2.0) - lgamma(df / 2.0) - 0.5 * log(df * M_PI)
    with nogil:
        for b in range(B):
            if fam == 0:
                mean = 0.0
                for i in range(m):
                    mean += V[b, i]
                mean /= m
                ss = 0.0
                for i in range(m):
                    dv = V[b, i] - mean
                    ss += dv * dv
                theta[b] = mean
                psi[b] = m * (log(scale) + LOG_SQRT_2PI) + ss / (2.0 * scale * scale)
                continue
            vmin = V[b, 0]
            vmax = V[b, 0]
            for i in range(m):
                if V[b, i] < vmin:
                    vmin = V[b, i]
                if V[b, i] > vmax:
                    vmax = V[b, i]
            lo = vmin - 10.0 * scale
            hi = vmax + 10.0 * scale
            h = (hi - lo) / (NLL_GRID - 1)
            bx = lo
            best = _nll(V[b], m, fam, df, tconst, scale, lo)
            for k in range(1, NLL_GRID):
                x = lo + k * h
                fx = _nll(V[b], m, fam, df, tconst, scale, x)
                if fx < best:
                    best = fx
                    bx = x
            for k in range(m):
                x = V[b, k]
                fx = _nll(V[b], m, fam, df, tconst, scale, x)
                if fx < best:
                    best = fx
                    bx = x
            a = bx - h
            d = bx + h
            nit = <Py_ssize_t>ceil(log(2.0 * h / tol) / log(1.0 / INVPHI)) if 2.0 * h > tol else 0
            c = d - INVPHI * (d - a)
            x = a + INVPHI * (d - a)
            fc = _nll(V[b], m, fam, df, tconst, scale, c)
            fd = _nll(V[b], m, fam, df, tconst, scale, x)
            for it in range(nit):
                if fc < fd:
                    d = x
                    x = c
                    fd = fc
                    c = d - INVPHI * (d - a)
                    fc = _nll(V[b], m, fam, df, tconst, scale, c)
                else:
                    a = c
                    c = x
                    fc = fd
                    x = a + INVPHI * (d - a)
                    fd = _nll(V[b], m, fam, df, tconst, scale, x)
            x = 0.5 * (a + d)
            fx = _nll(V[b], m, fam, df, tconst, scale, x)
            if fx <= best:
                best = fx
                bx = x
            theta[b] = bx
            psi[b] = best
    return psi_arr, theta_arr


def lts_batch(const double[:, ::1] X, const double[::1] y, const cnp.int64_t[:, ::1] S):
    """Least squares on each row subset via Householder QR.

    Returns (rss, coef, ok); ``ok[b]`` is False when the subset design is
    numerically rank deficient and must be re-solved by the caller.
    """
    cdef Py_ssize_t B = S.shape[0], m = S.shape[1], p = X.shape[1]
    cdef Py_ssize_t b, i, j, k, row
    rss_arr = np.empty(B)
    coef_arr = np.zeros((B, p))
    ok_arr = np.ones(B, dtype=np.uint8)
    cdef double[::1] rss = rss_arr
    cdef double[:, ::1] coef = coef_arr
    cdef cnp.uint8_t[::1] ok = ok_arr
    A_arr = np.empty((m, p))
    c_arr = np.empty(m)
    cdef double[:, ::1] A = A_arr
    cdef double[::1] c = c_arr
    cdef double norm, alpha, vk, s, tau, dmax, r, acc
    with nogil:
        for b in range(B):
            for i in range(m):
                row = S[b, i]
                for j in range(p):
                    A[i, j] = X[row, j]
                c[i] = y[row]
            if m < p:
                ok[b] = 0
                continue
            dmax = 0.0
            for k in range(p):
                norm = 0.0
                for i in range(k, m):
                    norm += A[i, k] * A[i, k]
                norm = sqrt(norm)
                if norm == 0.0:
                    continue
                alpha = -norm if A[k, k] >= 0 else norm
                vk = A[k, k] - alpha
                # v = (vk, A[k+1:, k]); H = I - 2 v v' / (v'v)
                tau = vk * vk
                for i in range(k + 1, m):
                    tau += A[i, k] * A[i, k]
                A[k, k] = alpha
                if tau == 0.0:
                    continue
                for j in range(k + 1, p):
                    s = vk * A[k, j]
                    for i in range(k + 1, m):
                        s += A[i, k] * A[i, j]
                    s = 2.0 * s / tau
                    A[k, j] -= s * vk
                    for i in range(k + 1, m):
                        A[i, j] -= s * A[i, k]
                s = vk * c[k]
                for i in range(k + 1, m):
                    s += A[i, k] * c[i]
                s = 2.0 * s / tau
                c[k] -= s * vk
                for i in range(k + 1, m):
                    c[i] -= s * A[i, k]
            for k in range(p):
                if fabs(A[k, k]) > dmax:
                    dmax = fabs(A[k, k])
            for k in range(p):
                if not fabs(A[k, k]) > RANK_TOL * dmax:
                    ok[b] = 0
            if not ok[b]:
                continue
            for k in range(p - 1, -1, -1):
                s = c[k]
                for j in range(k + 1, p):
                    s -= A[k, j] * coef[b, j]
                coef[b, k] = s / A[k, k]
            acc = 0.0
            for i in range(m):
                row = S[b, i]
                r = y[row]
                for j in range(p):
                    r -= X[row, j] * coef[b, j]
                acc += r * r
            rss[b] = acc
    return rss_arr, coef_arr, ok_arr.astype(bool)
