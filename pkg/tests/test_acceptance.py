"""End-to-end acceptance checks.

Each test appends one ``criterion N: PASS|FAIL ...`` line to the summary
printed at the end of the run, then asserts.
"""
import math
import time

import numpy as np
import pytest

from cfof import baselines, dataset, exact, fast, synthgen, theory
from cfof.dataset import Dataset
from cfof.evaluation import auc, k_grid, ks_distance, prec_at, spearman, top_indices

from conftest import ACCEPTANCE, brute_cfof_from_ranks, brute_ranks, brute_ranks_f32


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def test_c01_exact_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    rhos = (0.01, 0.05, 0.1, 0.5)
    bad_fast = bad_oracle = 0
    for i in range(50):
        n = int(rng.integers(2, 201))
        d = int(rng.integers(1, 17))
        if i % 2:
            x = rng.integers(-3, 4, (n, d)).astype(float)   # many exact ties
        else:
            x = rng.standard_normal((n, d))
        ds = Dataset(x)
        hard = exact.hard_cfof(ds, rhos).scores
        params = fast.FastParams(rho_list=rhos, sample_size=n, bins=n, c=0.0)
        bad_fast += not np.array_equal(fast.fast_cfof(ds, params).scores, hard)
        # exact arithmetic on the integer sets; float32-rounded ordering otherwise
        rank = brute_ranks(x) if i % 2 else brute_ranks_f32(x)
        oracle = np.stack([brute_cfof_from_ranks(rank, r) for r in rhos], axis=1)
        bad_oracle += not np.array_equal(hard, oracle)
    dt = time.perf_counter() - t0
    report(1, bad_fast == 0 and bad_oracle == 0 and dt < 60,
           f"fast!=hard on {bad_fast}/50, hard!=brute on {bad_oracle}/50, {dt:.1f}s")


def test_c02_sample_sizes():
    cases = {(0.1, 0.1): 512, (0.025, 0.025): 3584, (0.01, 0.1): 15360,
             (0.01, 0.01): 26624, (0.005, 0.005): 120320}
    got = {k: fast.sample_size(*k) for k in cases}
    report(2, got == cases, f"{sorted(got.values())}")


@pytest.mark.slow
def test_c03_approximation_quality(clust2_big):
    ds, ex = clust2_big
    t0 = time.perf_counter()
    fs = fast.fast_cfof(ds, fast.FastParams(rho_list=(0.01, 0.05), sample_size=3584)).scores
    dt = time.perf_counter() - t0
    rho_s = spearman(ex[:, 0], fs[:, 0])
    truth = np.zeros(ds.n, dtype=np.uint8)
    truth[top_indices(ex[:, 1], math.ceil(0.01 * ds.n))] = 1
    p = prec_at(fs[:, 1], truth, 0.01)
    report(3, rho_s >= 0.97 and p >= 0.90,
           f"spearman@0.01={rho_s:.4f} (>=0.97), prec@0.01 at rho=0.05={p:.4f} (>=0.90), "
           f"estimator {dt:.1f}s")


@pytest.mark.slow
def test_c04_theory_agreement():
    rng = np.random.default_rng(4)
    res = {}
    for fam in ("uniform", "normal"):
        x = rng.uniform(size=(10_000, 1000)) if fam == "uniform" else \
            rng.standard_normal((10_000, 1000))
        ds = dataset.randomize_rows(Dataset(x), 5)
        kappa = theory.estimate_moments(ds).kappa_orig
        sc = exact.hard_cfof(ds, [0.01]).scores[:, 0]
        res[fam] = (kappa, ks_distance(sc, lambda s: theory.cfof_cdf(s, kappa, 0.01)))
    ok = all(v[1] <= 0.05 for v in res.values())
    report(4, ok, ", ".join(f"{f}: kappa={k:.3f} KS={d:.4f}" for f, (k, d) in res.items())
           + " (<=0.05)")


@pytest.mark.slow
def test_c05_non_concentration():
    rng = np.random.default_rng(5)
    cv_a, cv_c = [], []
    for d in (10, 100, 1000, 10_000):
        ds = Dataset(rng.uniform(size=(1000, d)))
        a = baselines.aknn(ds, 50).scores[:, 0]
        c = exact.hard_cfof(ds, [50 / 1000]).scores[:, 0]
        cv_a.append(a.std() / a.mean())
        cv_c.append(c.std() / c.mean())
    mono = all(b < a for a, b in zip(cv_a, cv_a[1:]))
    ok = mono and cv_a[-1] <= 0.5 * cv_a[0] and cv_c[-1] >= 0.5 * cv_c[0]
    report(5, ok, "aKNN cv " + "/".join(f"{v:.4f}" for v in cv_a)
           + "; CFOF cv " + "/".join(f"{v:.4f}" for v in cv_c))


def test_c06_limit_behaviour():
    rhos = (0.001, 0.01, 0.1)
    lim_err = max(abs(theory.cfof_expected(1.0, r, z) - r)
                  for r in rhos for z in (-3.0, 0.0, 3.0))
    s = np.round(np.arange(0.1, 1.0, 0.1), 1)
    cdf_err = {r: float(np.max(np.abs(theory.cfof_cdf(s, 1e6, r) - s))) for r in rhos}
    ok = lim_err <= 1e-9 and all(v <= 1e-3 for v in cdf_err.values())
    report(6, ok, f"|E[CFOF]-rho| at kappa=1: {lim_err:.1e}; max|cdf-s| at kappa=1e6: "
           + ", ".join(f"rho={r}: {v:.2e}" for r, v in cdf_err.items()) + " (<=1e-3)")


def test_c07_semi_locality():
    shares = []
    for seed in range(10):
        ds, cid = synthgen.gen_semilocal(500, 100, seed)
        sc = exact.hard_cfof(ds, [20 / 500]).scores[:, 0]
        top = top_indices(sc, math.ceil(0.1 * ds.n))
        shares.append(float(np.mean(cid[top] == 0)))
    ok = all(0.4 <= v <= 0.6 for v in shares)
    report(7, ok, f"cluster-1 share of top 10%: min={min(shares):.2f} max={max(shares):.2f}")


@pytest.mark.slow
def test_c08_multimodal_accuracy():
    n, d = 1000, 1000
    ks = k_grid(n)
    cf, ak = [], []
    for seed in range(10):
        ds, lab, _ = synthgen.gen_multimodal(n, d, seed)
        c = exact.hard_cfof(ds, ks / n).scores
        a = baselines.aknn(ds, ks).scores
        cf.append(np.mean([auc(c[:, i], lab) for i in range(len(ks))]))
        ak.append(np.mean([auc(a[:, i], lab) for i in range(len(ks))]))
    mc, ma = float(np.mean(cf)), float(np.mean(ak))
    report(8, mc >= 0.96 and mc > ma, f"AUC_mean CFOF={mc:.4f} (>=0.96), aKNN={ma:.4f}")


def test_c09_determinism(tmp_path):
    ds = synthgen.gen_clust2(20_000, 20, seed=9)
    outs = []
    for t in (1, 2, 8, 8):
        p = fast.FastParams(rho_list=(0.001, 0.01, 0.1), sample_size=3584, shuffle=True,
                            seed=42, threads=t)
        ss = fast.fast_cfof(ds, p)
        path = tmp_path / f"t{t}_{len(outs)}.csv"
        ss.to_csv(path)
        outs.append((ss.scores, path.read_bytes()))
    same = all(np.array_equal(outs[0][0], o[0]) and outs[0][1] == o[1] for o in outs[1:])
    report(9, same, "threads 1/2/8 and repeated run: identical arrays and CSV bytes")


def test_c10_mixture_allocation():
    eq = theory.cluster_allocation([0.5, 0.5], [3.0, 3.0], 0.01, 0.05)
    sk = theory.cluster_allocation([0.5, 0.5], [3.0, 9.0], 0.01, 0.05)
    # cross-check: the implied threshold reproduces the target tail mass
    from scipy.optimize import brentq
    s_star = brentq(lambda s: theory.mixture_cdf(s, [0.5, 0.5], [3.0, 9.0], 0.01) - 0.95,
                    1e-9, 1 - 1e-9, xtol=1e-15)
    direct = np.array([0.5 * (1 - theory.cfof_cdf(s_star / 0.5, k, 0.02)) for k in (3.0, 9.0)])
    ok = (np.all(np.abs(eq - 0.025) <= 1e-9) and sk[1] / sk.sum() > 0.5
          and np.allclose(sk, direct, atol=1e-9))
    report(10, ok, f"equal kappa: {eq.tolist()}; kappa=(3,9) share of cluster 2: "
           f"{sk[1] / sk.sum():.4f}")
