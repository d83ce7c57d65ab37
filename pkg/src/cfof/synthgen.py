"""Synthetic dataset families used in the experiments.

All generators are pure functions of their arguments and seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

# kurtosis of the unit-variance marginal each family tag draws from
FAMILY_KURTOSIS = {"uniform": 1.8, "normal": 3.0, "exponential-like": 9.0}


@dataclass(frozen=True)
class Cluster:
    weight: float
    mean: float | tuple = 0.0
    std: float = 1.0
    family: str = "normal"


@dataclass(frozen=True)
class MixtureSpec:
    clusters: tuple
    n: int
    d: int
    seed: int = 0

    def __post_init__(self):
        clusters = tuple(c if isinstance(c, Cluster) else Cluster(**c) for c in self.clusters)
        object.__setattr__(self, "clusters", clusters)
        if not clusters:
            raise ValueError("mixture needs at least one cluster")
        w = np.array([c.weight for c in clusters])
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
            raise ValueError("cluster weights must be non-negative and sum to 1")
        for c in clusters:
            if c.std <= 0:
                raise ValueError("cluster stdevs must be positive")
            if c.family not in FAMILY_KURTOSIS:
                raise ValueError(f"unknown family {c.family!r}; use one of {list(FAMILY_KURTOSIS)}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")


def allocate(weights, n: int) -> np.ndarray:
    """Largest-remainder rounding of ``weights * n`` to integers summing to n."""
    raw = np.asarray(weights, dtype=np.float64) * n
    sizes = np.floor(raw).astype(np.int64)
    short = n - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes


def standard_marginal(family: str, size, rng) -> np.ndarray:
    """Zero-mean, unit-variance draws with the family's kurtosis."""
    if family == "normal":
        return rng.standard_normal(size)
    if family == "uniform":
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size)
    if family == "exponential-like":
        # centered unit exponential: variance 1, kurtosis 9
        return rng.standard_exponential(size) - 1.0
    raise ValueError(f"unknown family {family!r}")


def gen_mixture(spec: MixtureSpec) -> tuple[Dataset, np.ndarray]:
    """Draw a mixture; returns the dataset and per-point cluster ids."""
    rng = np.random.default_rng(spec.seed)
    sizes = allocate([c.weight for c in spec.clusters], spec.n)
    blocks, assign = [], []
    for cid, (c, m) in enumerate(zip(spec.clusters, sizes)):
        z = standard_marginal(c.family, (m, spec.d), rng)
        blocks.append(np.asarray(c.mean, dtype=np.float64) + c.std * z)
        assign.append(np.full(m, cid))
    return Dataset(np.vstack(blocks), name="mixture"), np.concatenate(assign)


def gen_unimodal(n: int, d: int, seed) -> Dataset:
    """i.i.d. standard normal points."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    return Dataset(rng.standard_normal((n, d)), name="unimodal")


def gen_clust2(n: int, d: int, seed, return_clusters: bool = False):
    """Two normal clusters: N(0, 1) and N(4, 0.5^2), half the points each,
    rows in random order."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    n1 = n - n // 2
    x = np.empty((n, d))
    x[:n1] = rng.standard_normal((n1, d))
    x[n1:] = 4.0 + 0.5 * rng.standard_normal((n - n1, d))
    cid = np.repeat([0, 1], [n1, n - n1])
    perm = rng.permutation(n)
    ds = Dataset(x[perm], name="clust2")
    return (ds, cid[perm]) if return_clusters else ds


MULTIMODAL_CENTERS = (-1.0, 1.0)
MULTIMODAL_STDS = (0.1, 1.0)


def gen_multimodal(n: int, d: int, seed, alpha: float = 0.05):
    """Two equal clusters, N(-1, 0.1^2) and N(+1, 1), with labels.

    In each cluster the ``round(alpha * n / 2)`` points farthest from the
    cluster center are labeled outliers (ties go to the lower index).

    Returns ``(dataset, labels, clusters)``; the dataset carries the labels.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    rng = np.random.default_rng(seed)
    sizes = allocate([0.5, 0.5], n)
    x = np.empty((n, d))
    cid = np.repeat([0, 1], sizes)
    x[cid == 0] = MULTIMODAL_CENTERS[0] + MULTIMODAL_STDS[0] * rng.standard_normal((sizes[0], d))
    x[cid == 1] = MULTIMODAL_CENTERS[1] + MULTIMODAL_STDS[1] * rng.standard_normal((sizes[1], d))
    per_cluster = allocate([0.5, 0.5], int(round(alpha * n)))
    labels = np.zeros(n, dtype=np.uint8)
    for c in (0, 1):
        idx = np.flatnonzero(cid == c)
        dist = np.linalg.norm(x[idx] - MULTIMODAL_CENTERS[c], axis=1)
        far = idx[np.lexsort((idx, -dist))[:per_cluster[c]]]
        labels[far] = 1
    return Dataset(x, labels, "multimodal"), labels, cid


def make_artificial(ds: Dataset, labels, clusters=None, centers=MULTIMODAL_CENTERS,
                    factor: float = 0.2) -> Dataset:
    """Push every labeled point ``factor`` further from its cluster center.

    ``clusters`` gives each point's cluster id indexing ``centers``; without
    it the nearest center is used.
    """
    labels = np.asarray(labels).astype(bool)
    x = np.array(ds.values, dtype=np.float64)
    cen = np.array([np.broadcast_to(np.asarray(c, dtype=np.float64), (ds.d,)) for c in centers])
    if clusters is None:
        clusters = np.argmin(((x[:, None, :] - cen[None]) ** 2).sum(-1), axis=1)
    c = cen[np.asarray(clusters)[labels]]
    x[labels] = c + (1.0 + factor) * (x[labels] - c)
    return Dataset(x, ds.labels if ds.labels is not None else labels.astype(np.uint8),
                   f"{ds.name}-art")


def gen_semilocal(n: int, d: int, seed, scale: float = 0.5, shift: float = 4.0):
    """Two balanced clusters, the second a translated, ``scale``-scaled copy of
    the first; rows randomly interleaved.  Returns ``(dataset, clusters)``."""
    rng = np.random.default_rng(seed)
    n1 = n // 2
    base = rng.standard_normal((n1, d))
    x = np.vstack([base, shift + scale * base])
    cid = np.repeat([0, 1], n1)
    perm = rng.permutation(2 * n1)
    return Dataset(x[perm], name="semilocal"), cid[perm]
