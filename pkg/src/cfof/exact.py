"""Exact (quadratic) hard-CFOF, reverse k-occurrence counts and the soft oracle.

hard-CFOF of x is the smallest normalized width k/n such that at least
``ceil(n * rho)`` points have x among their k nearest neighbors.  Writing
``rank[y][x]`` for the position of x in y's neighbor order, that width is the
``ceil(n * rho)``-th smallest entry of column x of the rank matrix, which is
what both code paths below compute.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels as K
from .dataset import Dataset
from .scoreset import ScoreSet

log = logging.getLogger(__name__)

#: above this many points hard_cfof switches to the two-pass streaming path
MATRIX_LIMIT = 4096


def rho_threshold(m: int, rho: float) -> int:
    """Reverse-neighbor count required for parameter ``rho`` among ``m`` points.

    ``ceil(m * rho)``, computed with a tiny relative slack so that products
    such as ``100 * 0.07 = 7.000000000000001`` do not round up a whole unit.
    """
    return max(1, min(m, math.ceil(m * rho * (1.0 - 1e-12))))


def _check_rhos(rho_list, allow_one=True) -> tuple:
    rhos = tuple(float(r) for r in np.atleast_1d(rho_list))
    if not rhos:
        raise ValueError("rho_list must be non-empty")
    for r in rhos:
        if not (0.0 < r < 1.0 or (allow_one and r == 1.0)):
            raise ValueError(f"rho must lie in (0, 1], got {r}")
    return rhos


@dataclass(frozen=True)
class RankMatrix:
    """``rank[y, x]``: 1-based position of x in y's nearest-neighbor order."""

    rank: np.ndarray

    @property
    def n(self) -> int:
        return self.rank.shape[0]


def neighbor_ranks(ds: Dataset, threads: int = 1) -> RankMatrix:
    """Full n x n rank matrix (O(n^2) memory)."""
    n = ds.n
    ps = K.PointSet(ds.rows(0, n))
    dtype = np.int32 if n < 2 ** 31 else np.int64
    rank = np.empty((n, n), dtype=dtype)
    positions = np.arange(1, n + 1, dtype=dtype)

    def work(a, b):
        order = K.order_rows(ps, a, b)
        rows = np.arange(b - a)[:, None]
        rank[a + rows, order] = positions

    K.run_blocks(work, K.row_blocks(n), threads)
    return RankMatrix(rank)


def rnn_counts(ranks: RankMatrix, k: int) -> np.ndarray:
    """Reverse k-nearest-neighbor counts N_k(x) (self included)."""
    if not 1 <= k <= ranks.n:
        raise ValueError(f"k must lie in [1, {ranks.n}], got {k}")
    return np.count_nonzero(ranks.rank <= k, axis=0)


def cfof_from_ranks(ranks: RankMatrix, rho_list) -> np.ndarray:
    """hard-CFOF scores (n x len(rho_list)) from a rank matrix."""
    rhos = _check_rhos(rho_list)
    n = ranks.n
    ms = [rho_threshold(n, r) for r in rhos]
    kth = np.partition(ranks.rank, sorted(set(m - 1 for m in ms)), axis=0)
    return np.stack([kth[m - 1] / n for m in ms], axis=1)


def hard_cfof(ds: Dataset, rho_list, mode: str = "auto", threads: int = 1) -> ScoreSet:
    """Exact hard-CFOF scores for every point and every rho.

    Parameters
    ----------
    mode : {"auto", "matrix", "streaming"}
        ``matrix`` materializes the rank matrix; ``streaming`` makes two
        passes over the neighbor rows keeping only O(n sqrt n) counters.
        ``auto`` picks ``matrix`` up to :data:`MATRIX_LIMIT` points.
    threads : int
        Worker threads for the per-row distance and sort work.  Results do
        not depend on it.
    """
    rhos = _check_rhos(rho_list)
    if mode == "auto":
        mode = "matrix" if ds.n <= MATRIX_LIMIT else "streaming"
    if mode == "matrix":
        scores = cfof_from_ranks(neighbor_ranks(ds, threads), rhos)
    elif mode == "streaming":
        scores = _hard_cfof_streaming(ds, rhos, threads)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ScoreSet("cfof", "rho", rhos, scores, {"mode": mode})


def _hard_cfof_streaming(ds: Dataset, rhos, threads: int) -> np.ndarray:
    # Pass 1 histograms each column's ranks into buckets of `width`, which
    # locates the bucket holding the m-th smallest rank.  Pass 2 recounts
    # exact ranks inside that one bucket per (rho, x).
    n = ds.n
    ps = K.PointSet(ds.rows(0, n))
    blocks = K.row_blocks(n)
    width = max(1, math.isqrt(n))
    nbuckets = -(-n // width)
    ms = np.array([rho_threshold(n, r) for r in rhos], dtype=np.int64)

    counts = np.zeros((nbuckets, n), dtype=np.int32)
    acc = K.Locked(K.accumulate_buckets)
    K.run_blocks(lambda a, b: acc(counts, K.order_rows(ps, a, b), width), blocks, threads)
    cum = np.cumsum(counts, axis=0, dtype=np.int64)
    del counts
    bucket = np.empty((len(ms), n), dtype=np.int64)
    resid = np.empty((len(ms), n), dtype=np.int64)
    cols = np.arange(n)
    for l, m in enumerate(ms):
        b = np.argmax(cum >= m, axis=0)
        bucket[l] = b
        before = np.where(b > 0, cum[np.maximum(b - 1, 0), cols], 0)
        resid[l] = m - before
    del cum
    log.debug("hard_cfof streaming: pass 1 done (n=%d, width=%d)", n, width)

    lo = bucket * width
    windows = np.zeros((len(ms), width, n), dtype=np.int32)
    acc = K.Locked(K.accumulate_windows)
    K.run_blocks(lambda a, b: acc(windows, K.order_rows(ps, a, b), lo, width), blocks, threads)
    scores = np.empty((n, len(ms)))
    for l in range(len(ms)):
        wc = np.cumsum(windows[l], axis=0)
        off = np.argmax(wc >= resid[l][None, :], axis=0)
        scores[:, l] = (lo[l] + off + 1) / n
    return scores


def soft_cfof_oracle(ds: Dataset, rho: float) -> ScoreSet:
    """Soft-CFOF through exact binomial probabilities (small n only).

    ``p(x, y) = rank[y][x] / n`` is the empirical fraction of points no
    farther from y than x; ``Pr[x in NN_k(X)]`` is the mean over y of
    ``binom.cdf(k, n, p(x, y))``, and the score is the smallest k/n at which
    that probability reaches ``rho``.
    """
    (rho,) = _check_rhos([rho])
    ranks = neighbor_ranks(ds).rank
    n = ds.n
    p = ranks / n
    scores = np.empty(n)
    for x in range(n):
        px = p[:, x]
        lo, hi = 1, n
        while lo < hi:
            k = (lo + hi) // 2
            if stats.binom.cdf(k, n, px).mean() >= rho:
                hi = k
            else:
                lo = k + 1
        scores[x] = lo / n
    return ScoreSet("soft-cfof-oracle", "rho", (rho,), scores)
