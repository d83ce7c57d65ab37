"""Baseline outlier scores: ODIN, AntiHub2, aKNN and LOF.

Neighbor lists come from the same ordering kernel as CFOF.  Reverse-count
scores (ODIN, AntiHub2) count a point as its own first neighbor, like CFOF;
distance scores (aKNN, LOF) use the ``k`` nearest *other* points.

Every function accepts a single ``k`` or a sequence of them and returns one
score column per value, sharing one neighbor computation.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .dataset import Dataset
from .scoreset import ScoreSet

ANTIHUB_WEIGHTS = np.round(np.arange(0, 21) * 0.05, 2)
ANTIHUB_TAIL = 0.05


def _ks(k, lo: int, hi: int) -> tuple:
    ks = tuple(int(v) for v in np.atleast_1d(k))
    if not ks:
        raise ValueError("at least one k required")
    for v in ks:
        if not lo <= v <= hi:
            raise ValueError(f"k must lie in [{lo}, {hi}], got {v}")
    return ks


def knn_lists(ds: Dataset, width: int, threads: int = 1) -> np.ndarray:
    """First ``width`` entries of every point's neighbor order (self first)."""
    n = ds.n
    ps = K.PointSet(ds.rows(0, n))
    out = np.empty((n, width), dtype=np.int64)

    def work(a, b):
        out[a:b] = K.order_rows(ps, a, b)[:, :width]

    K.run_blocks(work, K.row_blocks(n), threads)
    return out


def _neighbor_dists(x: np.ndarray, nbrs: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to each of its listed neighbors."""
    n, k = nbrs.shape
    out = np.empty((n, k))
    step = max(1, (1 << 22) // max(1, k * x.shape[1]))
    for a in range(0, n, step):
        diff = x[nbrs[a:a + step]] - x[a:a + step, None, :]
        out[a:a + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


def _rnn(knn: np.ndarray, k: int) -> np.ndarray:
    return np.bincount(knn[:, :k].ravel(), minlength=knn.shape[0])


def odin(ds: Dataset, k, threads: int = 1) -> ScoreSet:
    """Negated reverse k-occurrence count ``-N_k(x)``."""
    ks = _ks(k, 1, ds.n)
    knn = knn_lists(ds, max(ks), threads)
    scores = np.stack([-_rnn(knn, v).astype(np.float64) for v in ks], axis=1)
    return ScoreSet("odin", "k", ks, scores)


def antihub_discrimination(cand: np.ndarray, tail: float = ANTIHUB_TAIL) -> float:
    """Fraction of distinct values among the smallest ``tail`` share of ``cand``."""
    m = max(1, math.ceil(tail * cand.size * (1.0 - 1e-12)))
    low = np.partition(cand, m - 1)[:m]
    return np.unique(low).size / m


def antihub2_candidates(knn: np.ndarray, k: int, w: float) -> np.ndarray:
    nk = _rnn(knn, k).astype(np.float64)
    return (1.0 - w) * nk + w * nk[knn[:, :k]].sum(axis=1)


def antihub2(ds: Dataset, k, threads: int = 1) -> ScoreSet:
    """Neighbor-smoothed reverse counts with the weight picked per k.

    For each w in 0, 0.05, ..., 1 the candidate is
    ``(1 - w) N_k(x) + w * sum of N_k over x's k-neighborhood``; the w whose
    smallest 5% of candidates has the most distinct values wins (first on
    ties), and the score is the negated candidate.
    """
    ks = _ks(k, 1, ds.n)
    knn = knn_lists(ds, max(ks), threads)
    cols, chosen = [], []
    for v in ks:
        best, best_w, best_disc = None, 0.0, -1.0
        for w in ANTIHUB_WEIGHTS:
            cand = antihub2_candidates(knn, v, float(w))
            disc = antihub_discrimination(cand)
            if disc > best_disc:
                best, best_w, best_disc = cand, float(w), disc
        cols.append(-best)
        chosen.append(best_w)
    return ScoreSet("antihub2", "k", ks, np.stack(cols, axis=1), {"w": tuple(chosen)})


def aknn(ds: Dataset, k, threads: int = 1) -> ScoreSet:
    """Mean distance to the k nearest other points."""
    ks = _ks(k, 1, ds.n - 1)
    kmax = max(ks)
    nbrs = knn_lists(ds, kmax + 1, threads)[:, 1:]
    dist = _neighbor_dists(np.asarray(ds.values, dtype=np.float64), nbrs)
    csum = np.cumsum(dist, axis=1)
    scores = np.stack([csum[:, v - 1] / v for v in ks], axis=1)
    return ScoreSet("aknn", "k", ks, scores)


def lof(ds: Dataset, k, threads: int = 1) -> ScoreSet:
    """Local outlier factor over the k nearest other points.

    ``lr(x) = sum over neighbors y of max(dist(x, y), kdist(y))`` and
    ``LOF(x) = lr(x) / mean(lr(y))``.  A zero denominator gives 1 when
    ``lr(x)`` is also zero (duplicate neighborhoods) and inf otherwise.
    """
    ks = _ks(k, 2, ds.n - 1)
    kmax = max(ks)
    nbrs_all = knn_lists(ds, kmax + 1, threads)[:, 1:]
    dist_all = _neighbor_dists(np.asarray(ds.values, dtype=np.float64), nbrs_all)
    cols = []
    for v in ks:
        nbrs, dist = nbrs_all[:, :v], dist_all[:, :v]
        kdist = dist[:, v - 1]
        lr = np.maximum(dist, kdist[nbrs]).sum(axis=1)
        den = lr[nbrs].mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = lr / den
        score = np.where(den == 0.0, np.where(lr == 0.0, 1.0, np.inf), score)
        cols.append(score)
    return ScoreSet("lof", "k", ks, np.stack(cols, axis=1))


METHODS = {"odin": odin, "antihub2": antihub2, "aknn": aknn, "lof": lof}
