"""Closed-form large-d behaviour of CFOF scores.

For data whose coordinates are i.i.d. (or have comparable moments) with
kurtosis ``kappa``, the CFOF score of a point depends only on its squared
norm standard score ``z``.  This module evaluates that map, the induced
score cdf/pdf, the expected reverse k-occurrence count, and a few derived
diagnostics used to check empirical scores.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .dataset import Dataset

log = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class DomainError(ValueError):
    """Parameters outside the region where the closed forms are defined."""


def std_normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


# --------------------------------------------------------------------- moments

@dataclass(frozen=True)
class MomentSummary:
    mu2: float
    mu4: float
    mu2_sq: float
    kappa_orig: float
    kappa_norm: float
    mean_vector: np.ndarray


def estimate_moments(ds: Dataset) -> MomentSummary:
    """Average per-attribute central moments and the two kurtosis estimates.

    ``kappa_orig = mean(mu4_i) / mean(mu2_i^2)`` treats the data as one
    i.i.d. vector; ``kappa_norm = mean(mu4_i / mu2_i^2)`` is the kurtosis the
    same data has after per-attribute standardization.
    """
    if ds.n < 4:
        raise DomainError("need at least 4 points for fourth moments")
    # sorted columns make every sum independent of row order, so shuffling
    # attribute values leaves the estimates bit-identical
    x = np.sort(np.asarray(ds.values, dtype=np.float64), axis=0)
    mean = x.mean(axis=0)
    c = x - mean
    c2 = c * c
    m2 = c2.mean(axis=0)
    m4 = (c2 * c2).mean(axis=0)
    mu2, mu4, mu2_sq = float(m2.mean()), float(m4.mean()), float((m2 * m2).mean())
    if mu2_sq == 0.0:
        raise DomainError("all attributes are constant")
    live = m2 > 0
    if not live.all():
        log.info("estimate_moments: %d zero-variance attribute(s) left out of kappa_norm",
                 int((~live).sum()))
    kappa_norm = float((m4[live] / m2[live] ** 2).mean())
    return MomentSummary(mu2, mu4, mu2_sq, mu4 / mu2_sq, kappa_norm, mean)


def z_scores(ds: Dataset) -> np.ndarray:
    """Squared norm standard score of every point."""
    if ds.n < 2:
        raise DomainError("need at least two points")
    x = np.asarray(ds.values, dtype=np.float64)
    c = x - x.mean(axis=0)
    sqn = np.einsum("ij,ij->i", c, c)
    sd = sqn.std()
    if sd <= 1e-15 * max(abs(sqn.mean()), 1e-300) or sd == 0.0:
        raise DomainError("squared norms are all equal; z-scores undefined")
    return (sqn - sqn.mean()) / sd


# ---------------------------------------------------------------- score model

@dataclass(frozen=True)
class TheoryInputs:
    kappa: float
    rho: float
    z: float = 0.0

    def __post_init__(self):
        _check_kappa_rho(self.kappa, self.rho, strict=False)


def _check_kappa_rho(kappa, rho, strict):
    if not (kappa >= 1.0):
        raise DomainError(f"kurtosis must be >= 1, got {kappa}")
    if strict and kappa == 1.0:
        raise DomainError("kappa = 1 gives a degenerate (constant) score distribution")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")


def cfof_expected(kappa, rho=None, z=None):
    """Expected CFOF score of a point with squared norm standard score ``z``.

    Accepts either a :class:`TheoryInputs` or ``(kappa, rho, z)``; ``z`` may
    be an array.  ``kappa = inf`` gives the limit ``Phi(z)``.
    """
    if isinstance(kappa, TheoryInputs):
        kappa, rho, z = kappa.kappa, kappa.rho, kappa.z
    _check_kappa_rho(kappa, rho, strict=False)
    z = np.asarray(0.0 if z is None else z, dtype=np.float64)
    if math.isinf(kappa):
        return _scalar(ndtr(z))
    arg = (z * math.sqrt(kappa - 1.0) + 2.0 * ndtri(rho)) / math.sqrt(kappa + 3.0)
    return _scalar(ndtr(arg))


def _cdf_arg(s, kappa, rho):
    return (ndtri(s) * math.sqrt(kappa + 3.0) - 2.0 * ndtri(rho)) / math.sqrt(kappa - 1.0)


def cfof_cdf(s, kappa, rho):
    """Pr[CFOF <= s] for kurtosis ``kappa > 1``; 0 below 0 and 1 above 1."""
    _check_kappa_rho(kappa, rho, strict=True)
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        if math.isinf(kappa):
            out = np.clip(s, 0.0, 1.0)
        else:
            out = ndtr(_cdf_arg(np.clip(s, 0.0, 1.0), kappa, rho))
    out = np.where(s <= 0.0, 0.0, np.where(s >= 1.0, 1.0, out))
    return _scalar(out)


def cfof_pdf(s, kappa, rho):
    """Density of the CFOF score (derivative of :func:`cfof_cdf`)."""
    _check_kappa_rho(kappa, rho, strict=True)
    s = np.asarray(s, dtype=np.float64)
    inside = (s > 0.0) & (s < 1.0)
    sc = np.where(inside, s, 0.5)
    if math.isinf(kappa):
        out = np.ones_like(sc)
    else:
        q = ndtri(sc)
        out = (math.sqrt((kappa + 3.0) / (kappa - 1.0)) * std_normal_pdf(_cdf_arg(sc, kappa, rho))
               / std_normal_pdf(q))
    return _scalar(np.where(inside, out, 0.0))


def nk_expected(z, k_frac, mu2, mu4, n):
    """Expected reverse k-occurrence count ``N_k`` for ``k = k_frac * n``."""
    if not 0.0 < k_frac < 1.0:
        raise DomainError("k/n must lie in (0, 1)")
    if mu2 <= 0:
        raise DomainError("mu2 must be positive")
    if mu4 < mu2 * mu2 * (1.0 - 1e-12):
        raise DomainError("mu4 must be >= mu2^2 (kurtosis >= 1)")
    z = np.asarray(z, dtype=np.float64)
    a = math.sqrt(mu4 + 3.0 * mu2 * mu2)
    b = math.sqrt(max(mu4 - mu2 * mu2, 0.0))
    return _scalar(n * ndtr((ndtri(k_frac) * a - z * b) / (2.0 * mu2)))


def odin_expected(z, kappa, rho):
    """Normalized reverse-count score ``N_k / n`` at ``k = rho n`` (unit variance)."""
    return nk_expected(z, rho, 1.0, kappa, 1.0)


# ----------------------------------------------------------------- diagnostics

def concentration_ratio(scores, alpha: float) -> float:
    """Population stdev of the top ``ceil(alpha n)`` scores over the median score."""
    sc = np.asarray(scores, dtype=np.float64).ravel()
    if sc.size == 0:
        raise ValueError("scores must be non-empty")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    m = max(1, math.ceil(alpha * sc.size * (1.0 - 1e-12)))
    top = np.partition(sc, sc.size - m)[sc.size - m:]
    med = float(np.median(sc))
    spread = float(top.std())
    if med == 0.0:
        warnings.warn("median score is zero; concentration ratio is infinite", RuntimeWarning)
        return math.inf if spread > 0 else math.nan
    return spread / abs(med)


def tail_moments(score_fn, z0: float) -> tuple[float, float]:
    """``(mu_out, sigma_out)`` of a score curve over ``z >= z0`` weighted by phi.

    ``mu_out`` is the mean of the curve conditional on ``z >= z0`` (so a
    constant curve has zero spread); ``sigma_out`` is the phi-weighted
    integral of squared deviations, not renormalized by the tail mass, which
    cancels in :func:`separation` anyway.
    """
    opts = dict(epsabs=1e-14, epsrel=1e-10, limit=400)
    mass = float(ndtr(-z0))
    mu, _ = integrate.quad(lambda z: score_fn(z) * std_normal_pdf(z), z0, np.inf, **opts)
    mu /= mass
    sig, _ = integrate.quad(lambda z: (score_fn(z) - mu) ** 2 * std_normal_pdf(z), z0, np.inf,
                            **opts)
    return mu, sig


def separation(kappa: float, rho: float, z0: float = 0.0) -> float:
    """sqrt of the ratio between the tail spread of CFOF scores and that of
    normalized reverse-count scores, both as functions of z beyond ``z0``."""
    _check_kappa_rho(kappa, rho, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            _, s_cfof = tail_moments(lambda z: cfof_expected(kappa, rho, z), z0)
            _, s_odin = tail_moments(lambda z: odin_expected(z, kappa, rho), z0)
        except integrate.IntegrationWarning as exc:
            raise RuntimeError(f"quadrature did not converge: {exc}") from exc
    if s_odin <= 0.0:
        return math.inf
    return math.sqrt(s_cfof / s_odin)


def mixture_cdf(s, pis, kappas, rho):
    """CFOF score cdf of non-overlapping clusters with weights ``pis``."""
    total = 0.0
    for p, k in zip(pis, kappas):
        total = total + p * cfof_cdf(np.asarray(s) / p, k, rho / p)
    return total


def cluster_allocation(pis, kappas, rho: float, alpha: float, tol: float = 1e-12) -> np.ndarray:
    """Expected fraction ``alpha_i`` of the top-alpha outliers drawn from each cluster.

    Solves ``mixture_cdf(s*) = 1 - alpha`` by bisection, then
    ``alpha_i = pi_i * (1 - F(s*/pi_i; rho/pi_i, kappa_i))``; the result sums
    to ``alpha``.
    """
    pis = np.asarray(pis, dtype=np.float64)
    kappas = np.asarray(kappas, dtype=np.float64)
    if pis.shape != kappas.shape or pis.ndim != 1 or pis.size == 0:
        raise ValueError("pis and kappas must be equal-length 1-D sequences")
    if np.any(pis <= 0) or not math.isclose(pis.sum(), 1.0, abs_tol=1e-9):
        raise ValueError("mixture weights must be positive and sum to 1")
    if rho > pis.min() or rho >= 1.0:
        raise DomainError("rho must not exceed the smallest mixture weight")
    if np.any(kappas <= 1.0):
        raise DomainError("each cluster kurtosis must exceed 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if pis.size == 1:
        return np.array([alpha])

    target = 1.0 - alpha

    def f(s):
        return sum(p * cfof_cdf(s / p, k, rho / p) if rho / p < 1.0 else p * float(s >= p)
                   for p, k in zip(pis, kappas))

    lo, hi = 0.0, 1.0
    if not (f(lo) <= target <= f(hi)):
        raise RuntimeError("no root of the mixture cdf in (0, 1)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    return np.array([p * (1.0 - (cfof_cdf(s_star / p, k, rho / p) if rho / p < 1.0
                                 else float(s_star >= p)))
                     for p, k in zip(pis, kappas)])
