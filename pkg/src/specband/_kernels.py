"""Compiled grid kernels.

Smallest singular values of shifted bidiagonal matrices by Sturm-count
bisection on the Golub-Kahan tridiagonal form.  A bidiagonal matrix with
complex entries has the same singular values as the one built from the
moduli of its entries, so only ``|diag - z|`` and ``|offdiag|`` enter.

Nodes are processed in blocks so that the division chains of independent
nodes interleave; each node is still bisected on its own.
"""

import os

import numba
import numpy as np

TINY = 1e-300
#: bisection stops once hi/lo < 1 + REL_TOL
REL_TOL = 1e-10
BLOCK = 16

# the system TBB is too old for numba; skip it instead of warning on every run
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def configure_threads():
    """Honour ``SPECBAND_THREADS`` as a cap on the numba thread pool."""
    value = os.environ.get("SPECBAND_THREADS")
    if value:
        numba.set_num_threads(max(1, min(int(value), numba.config.NUMBA_NUM_THREADS)))


@numba.njit(cache=True)
def _counts_below(c2, n, xs, pivmin, out):
    """Singular values below ``xs[b]`` for each column ``b`` of the squared TGK off-diagonals."""
    nb = xs.shape[0]
    q = np.empty(nb)
    for b in range(nb):
        q[b] = -xs[b]
        out[b] = 1 if q[b] < 0.0 else 0
    for k in range(c2.shape[0]):
        for b in range(nb):
            qb = q[b]
            if abs(qb) < pivmin[b]:
                qb = -pivmin[b]
            qb = -xs[b] - c2[k, b] / qb
            q[b] = qb
            out[b] += 1 if qb < 0.0 else 0
    for b in range(nb):
        out[b] -= n


@numba.njit(cache=True)
def _block_sigma_min(d, e2, zs, res):
    n = d.shape[0]
    nb = zs.shape[0]
    c2 = np.empty((2 * n - 1, nb))
    bound = np.zeros(nb)
    emax = np.sqrt(np.max(e2)) if n > 1 else 0.0
    for b in range(nb):
        top = 0.0
        for k in range(n):
            a = abs(d[k] - zs[b])
            c2[2 * k, b] = a * a
            top = max(top, a)
        bound[b] = 2.0 * (top + emax) + TINY
    for k in range(n - 1):
        for b in range(nb):
            c2[2 * k + 1, b] = e2[k]
    pivmin = np.empty(nb)
    for b in range(nb):
        pivmin[b] = max(TINY, 1e-290 * bound[b] * bound[b])
    counts = np.empty(nb, dtype=np.int64)
    xs = np.full(nb, TINY)
    _counts_below(c2, n, xs, pivmin, counts)
    lo = np.full(nb, np.log(TINY))
    hi = np.log(bound)
    done = np.zeros(nb, dtype=np.bool_)
    for b in range(nb):
        if counts[b] >= 1:
            done[b] = True
            res[b] = 0.0
    tol = np.log1p(REL_TOL)
    while True:
        active = False
        for b in range(nb):
            if not done[b]:
                if hi[b] - lo[b] < tol:
                    done[b] = True
                    res[b] = np.exp(0.5 * (lo[b] + hi[b]))
                else:
                    active = True
            xs[b] = np.exp(0.5 * (lo[b] + hi[b]))
        if not active:
            break
        _counts_below(c2, n, xs, pivmin, counts)
        for b in range(nb):
            if not done[b]:
                mid = 0.5 * (lo[b] + hi[b])
                if counts[b] >= 1:
                    hi[b] = mid
                else:
                    lo[b] = mid


@numba.njit(parallel=True, cache=True)
def bidiag_sigma_min_grid(d, e, zs):
    """``sigma_min(B - z)`` for each ``z`` in ``zs``; ``B`` has diagonal ``d`` and off-diagonal ``e``."""
    e2 = np.abs(e) ** 2
    m = zs.shape[0]
    out = np.empty(m)
    nblocks = (m + BLOCK - 1) // BLOCK
    for j in numba.prange(nblocks):
        a = j * BLOCK
        b = min(a + BLOCK, m)
        _block_sigma_min(d, e2, zs[a:b], out[a:b])
    return out
