"""Per-point outlier scores keyed by parameter value, with CSV I/O."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ScoreSet:
    """Scores of ``n`` points for one or more parameter values.

    ``scores[i, l]`` is the score of point ``i`` under ``param_values[l]``;
    ``param`` names the parameter (``"rho"`` for CFOF, ``"k"`` for the
    neighbor-count baselines).  Larger scores mean more outlying.
    """

    method: str
    param: str
    param_values: tuple
    scores: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim == 1:
            self.scores = self.scores[:, None]
        self.param_values = tuple(self.param_values)
        if self.scores.shape[1] != len(self.param_values):
            raise ValueError("one score column per parameter value required")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def column(self, value=None) -> np.ndarray:
        """Scores for one parameter value (the only one if omitted)."""
        if value is None:
            if len(self.param_values) != 1:
                raise ValueError(f"ScoreSet has {len(self.param_values)} columns; pick one")
            return self.scores[:, 0]
        for l, v in enumerate(self.param_values):
            if np.isclose(v, value, rtol=1e-12, atol=0):
                return self.scores[:, l]
        raise KeyError(f"{self.param}={value} not in {self.param_values}")

    def __getitem__(self, key):
        point, value = key
        return float(self.column(value)[point])

    def permuted(self, perm) -> "ScoreSet":
        return ScoreSet(self.method, self.param, self.param_values, self.scores[perm], self.params)

    def to_csv(self, path) -> None:
        """Write ``point_id,<param>,score`` rows, point-major."""
        lines = [f"point_id,{self.param},score\n"]
        fmt_p = [_fmt(v) for v in self.param_values]
        for i, row in enumerate(self.scores):
            lines.extend(f"{i},{p},{_fmt(s)}\n" for p, s in zip(fmt_p, row))
        Path(path).write_text("".join(lines))

    @classmethod
    def from_csv(cls, path, method: str = "") -> "ScoreSet":
        with Path(path).open() as fh:
            header = fh.readline().strip().split(",")
            if len(header) != 3 or header[0] != "point_id" or header[2] != "score":
                raise ValueError(f"{path}: not a ScoreSet CSV (header {header})")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        ids = data[:, 0].astype(np.int64)
        values = tuple(dict.fromkeys(data[:, 1].tolist()))
        n = int(ids.max()) + 1
        scores = np.full((n, len(values)), np.nan)
        col = {v: l for l, v in enumerate(values)}
        for i, p, s in zip(ids, data[:, 1], data[:, 2]):
            scores[i, col[p]] = s
        if header[1] == "k":
            values = tuple(int(v) for v in values)
        return cls(method, header[1], values, scores)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2 ** 53 else repr(v)
