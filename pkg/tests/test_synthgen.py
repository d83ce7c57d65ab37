import numpy as np
import pytest

from cfof import synthgen as G
from cfof.theory import estimate_moments


def test_allocate():
    assert G.allocate([0.5, 0.5], 7).tolist() == [4, 3]
    assert G.allocate([0.2, 0.3, 0.5], 10).sum() == 10


@pytest.mark.parametrize("family", sorted(G.FAMILY_KURTOSIS))
def test_family_kurtosis(family):
    rng = np.random.default_rng(0)
    z = G.standard_marginal(family, (400_000, 2), rng)
    m = estimate_moments(G.Dataset(z))
    assert abs(m.mu2 - 1) < 0.02
    assert abs(m.kappa_orig - G.FAMILY_KURTOSIS[family]) < 0.05 * G.FAMILY_KURTOSIS[family]


def test_mixture_spec_validation():
    with pytest.raises(ValueError):
        G.MixtureSpec((G.Cluster(0.7), G.Cluster(0.2)), 10, 2)
    with pytest.raises(ValueError):
        G.MixtureSpec((G.Cluster(1.0, family="cauchy"),), 10, 2)


def test_mixture_sizes_and_determinism():
    spec = G.MixtureSpec(({"weight": 0.25, "mean": -3}, {"weight": 0.75, "std": 2.0}), 100, 3, 5)
    ds, cid = G.gen_mixture(spec)
    assert np.bincount(cid).tolist() == [25, 75]
    assert G.gen_mixture(spec)[0] == ds


def test_clust2():
    ds, cid = G.gen_clust2(1000, 20, 3, return_clusters=True)
    x = np.asarray(ds.values)
    assert np.bincount(cid).tolist() == [500, 500]
    assert abs(x[cid == 1].mean() - 4) < 0.05 and abs(x[cid == 1].std() - 0.5) < 0.02
    assert G.gen_clust2(1000, 20, 3) == ds


def test_multimodal_labels():
    ds, lab, cid = G.gen_multimodal(1000, 100, 1, alpha=0.05)
    assert lab.sum() == 50
    assert np.bincount(cid[lab == 1]).tolist() == [25, 25]
    assert np.array_equal(ds.labels, lab)
    x = np.asarray(ds.values)
    for c, centre in enumerate(G.MULTIMODAL_CENTERS):
        dist = np.linalg.norm(x[cid == c] - centre, axis=1)
        inner = lab[cid == c] == 1
        assert dist[inner].min() >= dist[~inner].max()


def test_make_artificial_moves_only_outliers():
    ds, lab, cid = G.gen_multimodal(200, 10, 2)
    art = G.make_artificial(ds, lab, cid)
    x0, x1 = np.asarray(ds.values), np.asarray(art.values)
    assert np.array_equal(x0[lab == 0], x1[lab == 0])
    c = np.array(G.MULTIMODAL_CENTERS)[cid][:, None]
    r0 = np.linalg.norm(x0 - c, axis=1)
    r1 = np.linalg.norm(x1 - c, axis=1)
    assert np.allclose(r1[lab == 1], 1.2 * r0[lab == 1])


def test_semilocal_copy():
    ds, cid = G.gen_semilocal(100, 5, 0)
    x = np.asarray(ds.values)
    a, b = x[cid == 0], x[cid == 1]
    assert a.shape == b.shape
    assert np.allclose(np.sort(4.0 + 0.5 * a, axis=0), np.sort(b, axis=0))
