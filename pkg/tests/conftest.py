"""Shared fixtures: brute-force oracles and an on-disk cache for slow exact runs."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

CACHE = Path(__file__).resolve().parent.parent / ".cache"


def brute_ranks(x: np.ndarray) -> np.ndarray:
    """rank[y, x] by direct distance computation, self first, ties by index."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    rank = np.empty((n, n), dtype=np.int64)
    for y in range(n):
        d2 = ((x - x[y]) ** 2).sum(axis=1)
        keys = sorted(range(n), key=lambda j: (j != y, d2[j], j))
        rank[y, keys] = np.arange(1, n + 1)
    return rank


def brute_cfof(x: np.ndarray, rho: float) -> np.ndarray:
    """Smallest k/n with at least ceil(n rho) reverse k-neighbors, by scanning k."""
    return brute_cfof_from_ranks(brute_ranks(x), rho)


@pytest.fixture(scope="session")
def cache_dir() -> Path:
    CACHE.mkdir(exist_ok=True)
    return CACHE


def brute_ranks_f32(x: np.ndarray) -> np.ndarray:
    """As :func:`brute_ranks`, with distances rounded to float32 before ordering
    (the package's documented ranking precision)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    x = x - x.mean(axis=0)
    n = x.shape[0]
    rank = np.empty((n, n), dtype=np.int64)
    for y in range(n):
        d2 = ((x - x[y]) ** 2).sum(axis=1).astype(np.float32)
        keys = sorted(range(n), key=lambda j: (j != y, d2[j], j))
        rank[y, keys] = np.arange(1, n + 1)
    return rank


def brute_cfof_from_ranks(rank: np.ndarray, rho: float) -> np.ndarray:
    n = rank.shape[0]
    need = math.ceil(round(n * rho, 9))
    out = np.empty(n)
    for col in range(n):
        for k in range(1, n + 1):
            if np.count_nonzero(rank[:, col] <= k) >= need:
                out[col] = k / n
                break
    return out


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def clust2_big(cache_dir):
    from cfof import exact, synthgen

    ds = synthgen.gen_clust2(100_000, 100, seed=2024)
    path = cache_dir / "clust2_n100000_d100_seed2024_exact_rho0.01_0.05.npy"
    if path.exists():
        ex = np.load(path)
    else:
        ex = exact.hard_cfof(ds, (0.01, 0.05)).scores
        np.save(path, ex)
    return ds, ex
