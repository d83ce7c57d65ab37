"""Distance/ordering kernels shared by the exact oracle and fast-CFOF.

Every neighbor ranking in the package goes through :func:`order_rows`, so the
exact and sampled paths agree bit for bit whenever they see the same points.

Ranking rule
------------
* Squared Euclidean distances are computed in float64 through the expansion
  ``|x|^2 + |y|^2 - 2 x.y`` on mean-centered points (one GEMM per row block),
  clamped at zero and rounded to float32.
* Each distance is packed with the column index into one uint64 key
  ``((float32 bits + 1) << 32) | j``; the point itself gets key ``j`` and so
  always sorts first.  Sorting the keys yields distance order with ties broken
  by ascending index, and the keys are unique, so any sort is deterministic.
* Row blocks have a fixed size that depends only on the number of points, so
  a given row always goes through an identically shaped GEMM regardless of
  thread count or which caller asked for it.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

import numba
import numpy as np

_BLOCK_ELEMS = 1 << 22
_MAX_BLOCK_ROWS = 256


def block_rows(m: int) -> int:
    """Rows per block when ranking against ``m`` points."""
    return int(max(1, min(_MAX_BLOCK_ROWS, _BLOCK_ELEMS // max(m, 1))))


def row_blocks(m: int):
    step = block_rows(m)
    return [(a, min(a + step, m)) for a in range(0, m, step)]


class PointSet:
    """Centered float64 copy of a point block plus squared norms."""

    __slots__ = ("x", "sq", "m")

    def __init__(self, points):
        x = np.array(points, dtype=np.float64, order="C", copy=True)
        if x.ndim != 2:
            raise ValueError("points must be a 2-D array")
        x -= x.mean(axis=0)
        self.x = x
        self.sq = np.einsum("ij,ij->i", x, x)
        self.m = x.shape[0]


def sq_dists(ps: PointSet, start: int, stop: int) -> np.ndarray:
    """Squared distances (float64) of rows ``start:stop`` to all points."""
    g = ps.x[start:stop] @ ps.x.T
    out = ps.sq[start:stop, None] + ps.sq[None, :] - 2.0 * g
    np.maximum(out, 0.0, out=out)
    return out


@numba.njit(cache=True, nogil=True)
def _build_keys(g, sq, start, keys):
    rows, m = g.shape
    for r in range(rows):
        i = start + r
        si = sq[i]
        for j in range(m):
            v = si + sq[j] - 2.0 * g[r, j]
            if v < 0.0:
                v = 0.0
            bits = np.uint64(np.float32(v).view(np.uint32))
            keys[r, j] = ((bits + np.uint64(1)) << np.uint64(32)) | np.uint64(j)
        keys[r, i] = np.uint64(i)


def order_rows(ps: PointSet, start: int, stop: int) -> np.ndarray:
    """Neighbor order of rows ``start:stop``: ``out[r, j]`` is the index of the
    (j+1)-th nearest neighbor of point ``start + r`` (self first)."""
    g = ps.x[start:stop] @ ps.x.T
    keys = np.empty(g.shape, dtype=np.uint64)
    _build_keys(g, ps.sq, start, keys)
    keys.sort(axis=1)
    keys &= np.uint64(0xFFFFFFFF)
    return keys.view(np.int64)


def map_blocks(fn, blocks, threads: int = 1):
    """Apply ``fn(start, stop)`` to every block, yielding results in block order."""
    if threads <= 1 or len(blocks) <= 1:
        for a, b in blocks:
            yield a, b, fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [(a, b, pool.submit(fn, a, b)) for a, b in blocks]
        for a, b, fut in futures:
            yield a, b, fut.result()


def run_blocks(work, blocks, threads: int = 1) -> None:
    """Run ``work(start, stop)`` over blocks on a worker pool (no results)."""
    if threads <= 1 or len(blocks) <= 1:
        for a, b in blocks:
            work(a, b)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(work, a, b) for a, b in blocks]:
            fut.result()


# ----------------------------------------------------------- histogram kernels

@numba.njit(cache=True, nogil=True)
def accumulate_bins(hst, order, kpos):
    """hst[order[r, j], kpos[j]] += 1 for every (r, j)."""
    rows, m = order.shape
    for r in range(rows):
        for j in range(m):
            hst[order[r, j], kpos[j]] += 1


@numba.njit(cache=True, nogil=True)
def accumulate_buckets(counts, order, width):
    """counts[j // width, order[r, j]] += 1 (rank buckets, bucket-major)."""
    rows, m = order.shape
    for r in range(rows):
        for j in range(m):
            counts[j // width, order[r, j]] += 1


@numba.njit(cache=True, nogil=True)
def accumulate_windows(counts, order, lo, width):
    """counts[l, j - lo[l, x], x] += 1 when rank index j falls in x's window."""
    rows, m = order.shape
    nl = lo.shape[0]
    for r in range(rows):
        for j in range(m):
            x = order[r, j]
            for l in range(nl):
                off = j - lo[l, x]
                if off >= 0 and off < width:
                    counts[l, off, x] += 1


class Locked:
    """Serialize calls to an accumulation kernel across worker threads."""

    def __init__(self, fn):
        self.fn = fn
        self.lock = threading.Lock()

    def __call__(self, *args):
        with self.lock:
            self.fn(*args)
