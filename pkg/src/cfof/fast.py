"""fast-CFOF: partitioned batch-sampling estimate of soft-CFOF.

The dataset is cut into consecutive partitions of ``s`` points.  Inside a
partition every point y ranks all others; the point at rank j is credited
with reverse-neighborhood width ``k_up(j) ~ n * j / s`` in a log-binned
histogram.  A point's score for rho is the bin at which its accumulated
credit first reaches ``s * rho``.  With ``s = n`` and one bin per k this is
exactly hard-CFOF.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .dataset import Dataset, load_binary
from .exact import rho_threshold
from .scoreset import ScoreSet

log = logging.getLogger(__name__)

SAMPLE_ALIGN = 512
DEFAULT_RHOS = (0.001, 0.005, 0.01, 0.05, 0.1)


@dataclass(frozen=True)
class FastParams:
    """Estimator parameters.

    ``sample_size`` overrides the (epsilon, delta) bound when given.
    ``shuffle`` randomizes the row order with ``seed`` before partitioning,
    for inputs whose order may correlate with position in space.
    """

    rho_list: tuple = DEFAULT_RHOS
    epsilon: float = 0.01
    delta: float = 0.01
    bins: int = 1000
    c: float = 0.0
    seed: int = 0
    threads: int = 1
    sample_size: int | None = None
    shuffle: bool = False

    def __post_init__(self):
        rhos = tuple(float(r) for r in np.atleast_1d(self.rho_list))
        object.__setattr__(self, "rho_list", rhos)
        if not rhos or any(not 0 < r < 1 for r in rhos):
            raise ValueError("rho_list must be non-empty with values in (0, 1)")
        if any(b <= a for a, b in zip(rhos, rhos[1:])):
            raise ValueError("rho_list must be strictly increasing")
        if not (0 < self.epsilon < 1 and 0 < self.delta < 1):
            raise ValueError("epsilon and delta must lie in (0, 1)")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if not 0 <= self.c <= 3:
            raise ValueError("c must lie in [0, 3]")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError("sample_size must be positive")

    def resolved_sample_size(self, n: int) -> int:
        s = self.sample_size if self.sample_size is not None else sample_size(self.epsilon, self.delta)
        return min(s, n)


def sample_size(epsilon: float, delta: float) -> int:
    """Hoeffding batch-sampling size, rounded up to a multiple of 512."""
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    raw = math.ceil(math.log(2.0 / delta) / (2.0 * epsilon ** 2))
    return max(SAMPLE_ALIGN, -(-raw // SAMPLE_ALIGN) * SAMPLE_ALIGN)


# ------------------------------------------------------------------ k binning

@lru_cache(maxsize=32)
def _bin_table(n: int, B: int):
    """Bin edges and representatives for widths 1..n split into B log bins.

    Returns ``(edges, reps, exact)``.  Bin b (1-based) covers
    ``edges[b-1] < k <= edges[b]`` (bin 1 also takes k = 1).  When ``B >= n``
    every k gets its own bin, which makes the estimator exact for ``s = n``.
    """
    if n < 1 or B < 1:
        raise ValueError("n and B must be positive")
    if B >= n:
        edges = np.arange(0, n + 1, dtype=np.float64)
        edges[0] = 1.0
        return edges, np.arange(1, n + 1, dtype=np.int64), True
    edges = np.power(float(n), np.arange(B + 1) / B)
    edges[0], edges[-1] = 1.0, float(n)
    lo, hi = edges[:-1], edges[1:]
    kmin = np.floor(lo).astype(np.int64) + 1
    kmin[0] = 1
    kmax = np.floor(hi).astype(np.int64)
    mid = np.rint(np.sqrt(lo * hi)).astype(np.int64)
    reps = np.where(kmin <= kmax, np.clip(mid, kmin, np.maximum(kmax, kmin)), mid)
    return edges, np.clip(reps, 1, n), False


def effective_bins(n: int, B: int) -> int:
    return min(n, B)


def k_bin(k, n: int, B: int):
    """Map widths ``k`` in 1..n to their 1-based log-spaced bin."""
    edges, _, exact = _bin_table(n, B)
    k = np.asarray(k)
    if np.any((k < 1) | (k > n)):
        raise ValueError(f"k must lie in [1, {n}]")
    if exact:
        out = k.astype(np.int64)
    else:
        out = np.maximum(np.searchsorted(edges, k, side="left"), 1)
    return int(out) if out.ndim == 0 else out


def k_bin_inv(b, n: int, B: int):
    """Representative width of bin ``b``: the integer of the bin nearest to
    the geometric midpoint of its edges."""
    _, reps, _ = _bin_table(n, B)
    b = np.asarray(b)
    if np.any((b < 1) | (b > effective_bins(n, B))):
        raise ValueError(f"bin must lie in [1, {effective_bins(n, B)}]")
    out = reps[b - 1]
    return int(out) if out.ndim == 0 else out


def k_up(j, s: int, n: int, c: float = 0.0):
    """Width at which the rank-j sample point becomes a neighbor:
    ``floor(n p + c sqrt(n p (1-p)) + 0.5)`` with ``p = j / s``, clamped to [1, n]."""
    j = np.asarray(j, dtype=np.float64)
    p = j / s
    val = np.floor(n * p + c * np.sqrt(np.maximum(n * p * (1.0 - p), 0.0)) + 0.5)
    out = np.clip(val, 1, n).astype(np.int64)
    return int(out) if out.ndim == 0 else out


# ----------------------------------------------------------------- partitions

def partition_starts(n: int, s: int) -> list[int]:
    """0-based partition offsets; the last window slides back to ``n - s``."""
    starts, i = [], 0
    while i < n:
        starts.append(i if i + s < n else n - s)
        i += s
    return starts


def process_partition(sample, params: FastParams, n: int, return_hist: bool = False):
    """Score one partition of ``s`` points against a dataset of size ``n``.

    Returns an ``(s, len(rho_list))`` score block, plus the ``(s, B)``
    histogram when ``return_hist`` is set.
    """
    sample = np.ascontiguousarray(sample, dtype=np.float64)
    s = sample.shape[0]
    nb = effective_bins(n, params.bins)
    kpos = k_bin(k_up(np.arange(1, s + 1), s, n, params.c), n, params.bins) - 1
    kpos = np.ascontiguousarray(kpos, dtype=np.int64)

    ps = K.PointSet(sample)
    hst = np.zeros((s, nb), dtype=np.int32)
    acc = K.Locked(K.accumulate_bins)
    K.run_blocks(lambda a, b: acc(hst, K.order_rows(ps, a, b), kpos), K.row_blocks(s),
                 params.threads)

    _, reps, _ = _bin_table(n, params.bins)
    scores = np.empty((s, len(params.rho_list)))
    thresholds = [rho_threshold(s, r) for r in params.rho_list]
    step = max(1, (1 << 22) // nb)
    for a in range(0, s, step):
        cum = np.cumsum(hst[a:a + step], axis=1)
        for l, m in enumerate(thresholds):
            pos = np.argmax(cum >= m, axis=1)
            scores[a:a + step, l] = reps[pos] / n
    return (scores, hst) if return_hist else scores


def fast_cfof(ds, params: FastParams | None = None) -> ScoreSet:
    """fast-CFOF scores for every point and every rho in ``params.rho_list``.

    ``ds`` may be a :class:`Dataset` (possibly memory-mapped) or a path to a
    binary dataset file, which is then streamed one partition at a time.
    """
    params = params or FastParams()
    if not isinstance(ds, Dataset):
        ds = load_binary(ds, mmap=True)
    n = ds.n
    s = params.resolved_sample_size(n)

    perm = None
    if params.shuffle:
        perm = np.random.default_rng(params.seed).permutation(n)
    scores = np.empty((n, len(params.rho_list)))
    for start in partition_starts(n, s):
        if perm is None:
            idx = slice(start, start + s)
            block = ds.rows(start, start + s)
        else:
            idx = perm[start:start + s]
            block = np.ascontiguousarray(np.asarray(ds.values)[np.sort(idx)], dtype=np.float64)
            idx = np.sort(idx)
        if not np.all(np.isfinite(block)):
            raise ValueError(f"non-finite values in partition starting at {start}")
        scores[idx] = process_partition(block, params, n)
        log.debug("fast_cfof: partition at %d done", start)
    meta = {k: getattr(params, k) for k in ("epsilon", "delta", "bins", "c", "seed", "shuffle")}
    meta["s"] = s
    return ScoreSet("fast-cfof", "rho", params.rho_list, scores, meta)
