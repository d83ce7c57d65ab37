"""Accuracy and ranking metrics, score-distribution tables and CSV reports."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .exact import rho_threshold


def _scores_labels(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if y.all() or not y.any():
        raise ValueError("labels need at least one positive and one negative")
    return s, y


def auc(scores, labels) -> float:
    """ROC AUC as the Mann-Whitney statistic with average ranks for ties."""
    s, y = _scores_labels(scores, labels)
    r = rankdata(s)
    npos = int(y.sum())
    nneg = y.size - npos
    u = r[y].sum() - npos * (npos + 1) / 2.0
    return float(u / (npos * nneg))


def top_indices(scores, m: int) -> np.ndarray:
    """Indices of the ``m`` highest scores; equal scores go to the lower index."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    return np.lexsort((np.arange(s.size), -s))[:m]


def prec_at(scores, labels, alpha: float) -> float:
    """Fraction of true outliers among the ``ceil(alpha n)`` top-scored points."""
    s, y = _scores_labels(scores, labels)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    m = rho_threshold(s.size, alpha)
    return float(y[top_indices(s, m)].mean())


def spearman(a, b) -> float:
    """Pearson correlation of tie-averaged ranks."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or a.size < 2:
        raise ValueError("need two equal-length inputs of size >= 2")
    ra, rb = rankdata(a), rankdata(b)
    ra -= ra.mean()
    rb -= rb.mean()
    den = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if den == 0.0:
        raise ValueError("Spearman correlation is undefined for constant input")
    return float(np.clip((ra @ rb) / den, -1.0, 1.0))


def p_win(table: dict) -> dict:
    """Pairwise win fractions over a shared parameter grid.

    ``table`` maps method name to a sequence of metric values (one per grid
    cell); ``result[a][b]`` is the fraction of cells where a scores strictly
    higher than b.
    """
    rows = {m: np.asarray(v, dtype=np.float64) for m, v in table.items()}
    sizes = {v.shape for v in rows.values()}
    if len(sizes) > 1:
        raise ValueError("all methods must share one grid")
    return {a: {b: float(np.mean(va > vb)) for b, vb in rows.items()} for a, va in rows.items()}


def k_grid(n: int, size: int = 20) -> np.ndarray:
    """Neighborhood sizes from 2 to n/2: log-spaced, or linear for n <= 100.

    Rounded values are de-duplicated, so tiny n may give fewer than ``size``.
    """
    hi = n // 2
    if hi < 2:
        raise ValueError("n must be at least 4")
    if n <= 100:
        raw = np.linspace(2, hi, size)
    else:
        raw = np.geomspace(2, hi, size)
    return np.unique(np.clip(np.rint(raw).astype(np.int64), 2, hi))


@dataclass(frozen=True)
class ScoreDistribution:
    sorted_scores: np.ndarray   # descending
    rank_fraction: np.ndarray   # (i + 1) / n
    normalized: np.ndarray      # ascending, max maps to 1
    cumulative: np.ndarray      # fraction of points with normalized score <= value


def score_distribution(scores, kind: str = "cfof") -> ScoreDistribution:
    """Sorted-score and cumulative-frequency tables.

    ``kind="cfof"`` normalizes by ``score / max``; ``kind="odin"`` expects
    raw counts ``N_k`` and uses ``1 - N_k / max N_k``.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValueError("scores must be non-empty")
    n = s.size
    desc = np.sort(s)[::-1]
    if kind == "cfof":
        top = np.max(np.abs(s))
        norm = s / top if top > 0 else np.ones_like(s)
    elif kind == "odin":
        top = s.max()
        norm = 1.0 - s / top if top > 0 else np.zeros_like(s)
    else:
        raise ValueError(f"unknown normalization {kind!r}")
    vals, counts = np.unique(norm, return_counts=True)
    return ScoreDistribution(desc, np.arange(1, n + 1) / n, vals, np.cumsum(counts) / n)


def ks_distance(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and ``cdf``.

    Evaluated at the distinct sample values on both sides of each jump, so
    discrete (lattice) samples are handled exactly.
    """
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("sample must be non-empty")
    vals, counts = np.unique(x, return_counts=True)
    upper = np.cumsum(counts) / x.size
    lower = upper - counts / x.size
    f = np.asarray(cdf(vals), dtype=np.float64)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(f - lower))))


@dataclass
class EvalReport:
    """Rows of ``method,param,metric,value``."""

    rows: list = field(default_factory=list)

    def add(self, method: str, param, metric: str, value: float) -> None:
        self.rows.append((method, param, metric, float(value)))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "param", "metric", "value"])
            for method, param, metric, value in self.rows:
                w.writerow([method, _fmt(param), metric, repr(value)])

    @classmethod
    def from_csv(cls, path) -> "EvalReport":
        with Path(path).open(newline="") as fh:
            r = csv.reader(fh)
            if next(r) != ["method", "param", "metric", "value"]:
                raise ValueError(f"{path}: not an EvalReport CSV")
            return cls([(m, p, k, float(v)) for m, p, k, v in r])


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)
