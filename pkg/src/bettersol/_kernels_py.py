"""Pure-Python (numpy) twin of the compiled ``_kernels`` module.

Every function follows the same arithmetic as its compiled counterpart,
vectorised over the batch axis instead of looped.
"""
import math

import numpy as np
from scipy import special

LOG_SQRT_2PI = 0.91893853320467274178
INVPHI = 0.61803398874989484820
RANK_TOL = 1e-10
NLL_GRID = 256


def _cdf(fam, df, z):
    if fam == 0:
        return special.ndtr(z)
    if fam == 2:
        return 0.5 + np.arctan(z) / math.pi
    return special.stdtr(df, z)


def _neglog0(fam, df, tconst, z):
    if fam == 0:
        return 0.5 * z * z + LOG_SQRT_2PI
    if fam == 2:
        return math.log(math.pi) + np.log1p(z * z)
    return -tconst + 0.5 * (df + 1.0) * np.log1p(z * z / df)


def fisher_yates(n, m, draws):
    draws = np.asarray(draws, dtype=np.int64)
    B = draws.shape[0]
    perm = np.tile(np.arange(n, dtype=np.int64), (B, 1))
    rows = np.arange(B)
    for j in range(m):
        k = j + draws[:, j]
        tj = perm[:, j].copy()
        perm[:, j] = perm[rows, k]
        perm[rows, k] = tj
    return np.sort(perm[:, :m], axis=1)


def _ks_ud(V, fam, df, scale, theta):
    m = V.shape[-1]
    F = _cdf(fam, df, (V - theta[..., None]) / scale)
    i = np.arange(m, dtype=float)
    U = ((i + 1.0) / m - F).max(axis=-1)
    D = (F - i / m).max(axis=-1)
    return U, D


def ks_dist(v, fam, df, scale, theta):
    v = np.asarray(v, dtype=float)
    U, D = _ks_ud(v[None, :], fam, df, scale, np.array([theta], dtype=float))
    return float(max(U[0], D[0]))


def _iterations(width, tol, ratio_log):
    out = np.zeros(width.shape, dtype=np.int64)
    big = width > tol
    out[big] = np.ceil(np.log2(width[big] / tol) if ratio_log is None
                       else np.log(width[big] / tol) / ratio_log).astype(np.int64)
    return out


def ks_min(V, fam, df, scale, tol):
    V = np.ascontiguousarray(V, dtype=float)
    lo = V[:, 0] - 3.0 * scale
    hi = V[:, -1] + 3.0 * scale
    nit = _iterations(hi - lo, tol, None)
    for it in range(int(nit.max(initial=0))):
        active = it < nit
        mid = 0.5 * (lo + hi)
        U, D = _ks_ud(V, fam, df, scale, mid)
        up = U > D
        hi = np.where(active & up, mid, hi)
        lo = np.where(active & ~up, mid, lo)
    mid = 0.5 * (lo + hi)
    U, D = _ks_ud(V, fam, df, scale, mid)
    return np.maximum(U, D), mid


def _nll(V, fam, df, tconst, scale, theta):
    m = V.shape[-1]
    z = (V - theta[..., None]) / scale
    return _neglog0(fam, df, tconst, z).sum(axis=-1) + m * math.log(scale)


def nll_min(V, fam, df, scale, tol):
    V = np.ascontiguousarray(V, dtype=float)
    B, m = V.shape
    if fam == 0:
        mean = V.mean(axis=1)
        ss = ((V - mean[:, None]) ** 2).sum(axis=1)
        psi = m * (math.log(scale) + LOG_SQRT_2PI) + ss / (2.0 * scale * scale)
        return psi, mean
    tconst = 0.0
    if fam == 1:
        tconst = (math.lgamma((df + 1.0) / 2.0) - math.lgamma(df / 2.0)
                  - 0.5 * math.log(df * math.pi))
    lo = V.min(axis=1) - 10.0 * scale
    hi = V.max(axis=1) + 10.0 * scale
    h = (hi - lo) / (NLL_GRID - 1)
    grid = lo[:, None] + np.arange(NLL_GRID)[None, :] * h[:, None]
    cand = np.concatenate([grid, V], axis=1)
    vals = _nll(V[:, None, :], fam, df, tconst, scale, cand)
    k = vals.argmin(axis=1)
    rows = np.arange(B)
    best = vals[rows, k]
    bx = cand[rows, k]
    a = bx - h
    d = bx + h
    nit = _iterations(2.0 * h, tol, math.log(1.0 / INVPHI))
    c = d - INVPHI * (d - a)
    x = a + INVPHI * (d - a)
    fc = _nll(V, fam, df, tconst, scale, c)
    fd = _nll(V, fam, df, tconst, scale, x)
    for it in range(int(nit.max(initial=0))):
        active = it < nit
        left = active & (fc < fd)
        right = active & ~(fc < fd)
        a0, c0, x0, d0, fc0, fd0 = a, c, x, d, fc, fd
        a = np.where(right, c0, a0)
        d = np.where(left, x0, d0)
        c = np.where(left, d - INVPHI * (d - a), np.where(right, x0, c0))
        x = np.where(left, c0, np.where(right, a + INVPHI * (d - a), x0))
        fc = np.where(right, fd0, fc0)
        fd = np.where(left, fc0, fd0)
        if left.any():
            fc = np.where(left, _nll(V, fam, df, tconst, scale, c), fc)
        if right.any():
            fd = np.where(right, _nll(V, fam, df, tconst, scale, x), fd)
    xm = 0.5 * (a + d)
    fx = _nll(V, fam, df, tconst, scale, xm)
    take = fx <= best
    return np.where(take, fx, best), np.where(take, xm, bx)


def lts_batch(X, y, S):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    S = np.asarray(S, dtype=np.int64)
    B, m = S.shape
    p = X.shape[1]
    rss = np.empty(B)
    coef = np.zeros((B, p))
    if m < p:
        return rss, coef, np.zeros(B, dtype=bool)
    Xs = X[S]
    ys = y[S]
    Q, R = np.linalg.qr(Xs)
    diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
    dmax = diag.max(axis=1)
    ok = np.all(diag > RANK_TOL * dmax[:, None], axis=1)
    if ok.any():
        c = np.einsum("bij,bi->bj", Q[ok], ys[ok])
        coef[ok] = np.linalg.solve(R[ok], c[..., None])[..., 0]
        r = ys[ok] - np.einsum("bij,bj->bi", Xs[ok], coef[ok])
        rss[ok] = (r * r).sum(axis=1)
    return rss, coef, ok
