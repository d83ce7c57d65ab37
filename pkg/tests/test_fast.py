import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfof import dataset as D
from cfof import fast
from cfof.dataset import Dataset
from cfof.exact import hard_cfof
from cfof.fast import FastParams, fast_cfof, k_bin, k_bin_inv, k_up
from cfof.synthgen import gen_clust2


@pytest.mark.parametrize("eps, delta, s", [
    (0.1, 0.1, 512), (0.025, 0.025, 3584), (0.01, 0.1, 15360),
    (0.01, 0.01, 26624), (0.005, 0.005, 120320),
])
def test_sample_size(eps, delta, s):
    assert fast.sample_size(eps, delta) == s


def test_sample_size_raw_bound():
    assert math.ceil(math.log(2 / 0.01) / (2 * 0.01 ** 2)) == 26492


@pytest.mark.parametrize("n, B", [(10, 2), (1000, 100), (10 ** 6, 1000), (50, 50), (50, 80)])
def test_k_bin_boundaries(n, B):
    assert k_bin(1, n, B) == 1
    assert k_bin(n, n, B) == fast.effective_bins(n, B)


def test_k_bin_matches_log_formula():
    n, B = 1000, 100
    k = np.arange(2, n + 1)
    formula = np.clip(np.ceil(B * np.log(k) / np.log(n) - 1e-9), 1, B)
    assert np.array_equal(k_bin(k, n, B), formula)


def test_bin_relative_width():
    n, B = 10 ** 6, 1000
    edges, _, _ = fast._bin_table(n, B)
    assert np.all(edges[1:] / edges[:-1] <= n ** (1 / B) * (1 + 1e-9))


def test_bin_round_trip():
    n, B = 1000, 100
    r = n ** (1 / B)
    k = np.arange(1, n + 1)
    back = k_bin_inv(k_bin(k, n, B), n, B)
    assert np.all((back >= k / r - 1e-9) & (back <= k * r + 1e-9))
    # the representative lies inside its own bin
    assert np.array_equal(k_bin(back, n, B), k_bin(k, n, B))


def test_bin_inv_range():
    with pytest.raises(ValueError):
        k_bin_inv(0, 100, 10)
    with pytest.raises(ValueError):
        k_bin(101, 100, 10)


def test_k_up_examples():
    assert k_up(512, 512, 10 ** 6, 3.0) == 10 ** 6
    assert k_up(26624 // 2, 26624, 10 ** 6) == 500_000
    assert k_up(1, 512, 10 ** 6, 3.0) == 2086


def test_partition_starts():
    assert fast.partition_starts(10, 4) == [0, 4, 6]
    assert fast.partition_starts(8, 4) == [0, 4]
    assert fast.partition_starts(5, 5) == [0]


def test_params_validation():
    with pytest.raises(ValueError):
        FastParams(rho_list=(0.1, 0.05))
    with pytest.raises(ValueError):
        FastParams(c=4)
    with pytest.raises(ValueError):
        FastParams(bins=1)
    with pytest.raises(ValueError):
        FastParams(epsilon=0)


def _exact_params(n, rhos):
    return FastParams(rho_list=rhos, sample_size=n, bins=n, c=0.0)


def test_exact_reduction_line():
    ds = Dataset(np.array([0.0, 1.0, 3.0, 10.0]))
    rhos = (0.25, 0.5)
    assert np.array_equal(fast_cfof(ds, _exact_params(4, rhos)).scores,
                          hard_cfof(ds, rhos).scores)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 120), st.integers(1, 6), st.integers(0, 2 ** 31), st.booleans())
def test_exact_reduction_property(n, d, seed, ints):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 3, (n, d)).astype(float) if ints else rng.standard_normal((n, d))
    rhos = tuple(sorted({0.01, 0.1, 0.5, 0.99}))
    ds = Dataset(x)
    assert np.array_equal(fast_cfof(ds, _exact_params(n, rhos)).scores,
                          hard_cfof(ds, rhos).scores)


def test_histogram_rows_sum_to_s():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((300, 4))
    params = FastParams(rho_list=(0.05,), bins=50)
    scores, hst = fast.process_partition(x, params, n=5000, return_hist=True)
    assert np.all(hst.sum(axis=1) == 300)
    assert np.all((scores > 0) & (scores <= 1))


def _clust(n=3000, d=10, seed=1):
    return gen_clust2(n, d, seed)


def test_thread_invariance():
    ds = _clust()
    base = FastParams(rho_list=(0.01, 0.05), sample_size=1024, bins=200)
    ref = fast_cfof(ds, base).scores
    for t in (2, 8):
        p = FastParams(**{**base.__dict__, "threads": t})
        assert np.array_equal(fast_cfof(ds, p).scores, ref)


def test_repeat_and_shuffle_determinism():
    ds = _clust()
    p = FastParams(rho_list=(0.01,), sample_size=1024, shuffle=True, seed=3)
    a, b = fast_cfof(ds, p).scores, fast_cfof(ds, p).scores
    assert np.array_equal(a, b)
    other = fast_cfof(ds, FastParams(rho_list=(0.01,), sample_size=1024, shuffle=True, seed=4))
    assert not np.array_equal(a, other.scores)


def test_multi_resolution_consistency():
    ds = _clust()
    both = fast_cfof(ds, FastParams(rho_list=(0.01, 0.1), sample_size=1024)).scores
    a = fast_cfof(ds, FastParams(rho_list=(0.01,), sample_size=1024)).scores[:, 0]
    b = fast_cfof(ds, FastParams(rho_list=(0.1,), sample_size=1024)).scores[:, 0]
    assert np.array_equal(both[:, 0], a) and np.array_equal(both[:, 1], b)


def test_streamed_file_matches_memory(tmp_path):
    ds = Dataset(_clust(2500).values.astype(np.float32))
    D.save_binary(ds, tmp_path / "c.bin")
    p = FastParams(rho_list=(0.01, 0.05), sample_size=1024)
    assert np.array_equal(fast_cfof(tmp_path / "c.bin", p).scores, fast_cfof(ds, p).scores)


def test_short_final_partition_overwrites():
    # n not a multiple of s: the last window is recomputed from n - s
    ds = _clust(1100)
    p = FastParams(rho_list=(0.05,), sample_size=512)
    full = fast_cfof(ds, p).scores
    tail = fast.process_partition(ds.rows(1100 - 512, 1100), p, 1100)
    assert np.array_equal(full[1100 - 512:], tail)


def test_sampling_bound():
    # batch-sampling estimate of p(x, y) stays within eps w.p. >= 1 - delta
    rng = np.random.default_rng(12)
    x = rng.standard_normal((20_000, 3))
    eps, delta = 0.1, 0.1
    s = fast.sample_size(eps, delta)
    y, q = x[0], x[1]
    dist = ((x - y) ** 2).sum(1)
    p = np.mean(dist <= dist[1])
    hits = 0
    trials = 300
    for _ in range(trials):
        idx = rng.choice(x.shape[0], s, replace=False)
        hits += abs(np.mean(dist[idx] <= dist[1]) - p) <= eps
    assert hits / trials >= 1 - delta


@pytest.mark.slow
def test_clust2_full_sample_equals_exact():
    ds = gen_clust2(10_000, 100, 7)
    rhos = (0.001, 0.01)
    got = fast_cfof(ds, FastParams(rho_list=rhos, sample_size=10_000, bins=10_000)).scores
    assert np.array_equal(got, hard_cfof(ds, rhos).scores)


@pytest.mark.slow
def test_outliers_estimated_more_accurately(clust2_big):
    ds, ex = clust2_big
    fs = fast_cfof(ds, FastParams(rho_list=(0.01, 0.05), sample_size=3584)).scores
    top = np.lexsort((np.arange(ds.n), -ex[:, 0]))[: ds.n // 20]
    for col in (0, 1):
        rel = np.abs(fs[:, col] - ex[:, col]) / ex[:, col]
        assert rel[top].mean() < rel.mean()
