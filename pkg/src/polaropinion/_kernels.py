"""Compiled inner loops shared by the model and the solvers.

Everything here works on raw float64 arrays of shape (N, D) and int64 index
arrays. Sums over agents are accumulated sequentially inside blocks of
``BLOCK`` terms and the block partials are reduced as a binary tree, so the
result only depends on the (sorted) index sequence, never on the caller.
"""

import math

import numba
import numpy as np
from numba import njit

# |w| at or below this exerts no pull (subgradient choice at the kink)
DELTA0 = 1e-12
BLOCK = 4096


@njit(cache=True, inline="always")
def _radial_pow(r2, q):
    """|w|**q from r2 = |w|**2. Integer q is done by repeated products."""
    if q == 0.0:
        return 1.0
    iq = int(q)
    if iq == q and -64 <= iq <= 64:
        neg = iq < 0
        n = -iq if neg else iq
        out = 1.0
        for _ in range(n // 2):
            out *= r2
        if n % 2 == 1:
            out *= math.sqrt(r2)
        return 1.0 / out if neg else out
    return r2 ** (0.5 * q)


@njit(cache=True, inline="always")
def g_of_r2(r2, p):
    if r2 == 0.0:
        return 0.0
    return _radial_pow(r2, p)


@njit(cache=True, inline="always")
def grad_factor(r2, p):
    """Scalar c such that grad g(w) = c * w."""
    if r2 <= DELTA0 * DELTA0:
        return 0.0
    if p == 2.0:
        return 2.0
    return p * _radial_pow(r2, p - 2.0)


@numba.vectorize(["float64(float64, float64)"], cache=True)
def g_of_r2_vec(r2, p):
    return g_of_r2(r2, p)


@numba.vectorize(["float64(float64, float64)"], cache=True)
def grad_factor_vec(r2, p):
    return grad_factor(r2, p)


@njit(cache=True)
def _tree_reduce(partial, nblocks):
    while nblocks > 1:
        half = (nblocks + 1) // 2
        for b in range(nblocks // 2):
            for d in range(partial.shape[1]):
                partial[b, d] += partial[b + half, d]
        nblocks = half


@njit(cache=True)
def _theta_into(z, k, zs, p, partial, out):
    n = zs.shape[0]
    dim = z.shape[1]
    nblocks = (n + BLOCK - 1) // BLOCK
    partial[:nblocks, :] = 0.0
    if dim == 2:
        _theta_blocks_2d(z, k, zs, p, partial, nblocks)
    else:
        _theta_blocks(z, k, zs, p, partial, nblocks)
    _tree_reduce(partial, nblocks)
    for d in range(dim):
        out[d] = partial[0, d] / n


@njit(cache=True)
def _theta_blocks_2d(z, k, zs, p, partial, nblocks):
    # same arithmetic as _theta_blocks, with register accumulators
    n = zs.shape[0]
    zk0 = z[k, 0]
    zk1 = z[k, 1]
    for b in range(nblocks):
        acc0 = 0.0
        acc1 = 0.0
        stop = min(n, (b + 1) * BLOCK)
        for i in range(b * BLOCK, stop):
            w0 = zk0 - zs[i, 0]
            w1 = zk1 - zs[i, 1]
            c = grad_factor(w0 * w0 + w1 * w1, p)
            acc0 += c * w0
            acc1 += c * w1
        partial[b, 0] = acc0
        partial[b, 1] = acc1


@njit(cache=True)
def _theta_blocks(z, k, zs, p, partial, nblocks):
    n = zs.shape[0]
    dim = z.shape[1]
    for b in range(nblocks):
        stop = min(n, (b + 1) * BLOCK)
        for i in range(b * BLOCK, stop):
            r2 = 0.0
            for d in range(dim):
                w = z[k, d] - zs[i, d]
                r2 += w * w
            c = grad_factor(r2, p)
            for d in range(dim):
                partial[b, d] += c * (z[k, d] - zs[i, d])


@njit(cache=True)
def theta_rows(z, rows, idx, p):
    """Steering vectors for agents ``rows``, all averaged over sample ``idx``."""
    dim = z.shape[1]
    zs = np.empty((idx.shape[0], dim))
    for i in range(idx.shape[0]):
        zs[i] = z[idx[i]]
    out = np.empty((rows.shape[0], dim))
    partial = np.empty(((idx.shape[0] + BLOCK - 1) // BLOCK, dim))
    for r in range(rows.shape[0]):
        _theta_into(z, rows[r], zs, p, partial, out[r])
    return out


@njit(cache=True)
def theta_rows_own_sample(z, rows, samples, p):
    """Like theta_rows but row r uses its own sample ``samples[r]``."""
    dim = z.shape[1]
    out = np.empty((rows.shape[0], dim))
    s = samples.shape[1]
    zs = np.empty((s, dim))
    partial = np.empty(((s + BLOCK - 1) // BLOCK, dim))
    for r in range(rows.shape[0]):
        for i in range(s):
            zs[i] = z[samples[r, i]]
        _theta_into(z, rows[r], zs, p, partial, out[r])
    return out


@njit(cache=True)
def friend_of(z, k, theta, cand):
    """arg*max over cand plus k itself of theta . (z_j - z_k).

    ``cand`` must be sorted ascending. Ties go to the smallest index.
    """
    dim = z.shape[1]
    best = k
    best_val = 0.0
    for i in range(cand.shape[0]):
        j = cand[i]
        if j == k:
            continue
        val = 0.0
        for d in range(dim):
            val += theta[d] * (z[j, d] - z[k, d])
        if val > best_val or (val == best_val and j < best):
            best = j
            best_val = val
    return best


@njit(cache=True)
def friends_rows(z, rows, thetas, cand):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for r in range(rows.shape[0]):
        out[r] = friend_of(z, rows[r], thetas[r], cand)
    return out


@njit(cache=True)
def agent_loss(z, rows, p):
    """Row means (1/N) sum_l g(z_k - z_l) for every k in rows."""
    n, dim = z.shape
    out = np.empty(rows.shape[0])
    nblocks = (n + BLOCK - 1) // BLOCK
    partial = np.empty((nblocks, 1))
    for r in range(rows.shape[0]):
        k = rows[r]
        partial[:, 0] = 0.0
        for b in range(nblocks):
            stop = min(n, (b + 1) * BLOCK)
            for m in range(b * BLOCK, stop):
                r2 = 0.0
                for d in range(dim):
                    w = z[k, d] - z[m, d]
                    r2 += w * w
                partial[b, 0] += g_of_r2(r2, p)
        _tree_reduce(partial, nblocks)
        out[r] = partial[0, 0] / n
    return out
