"""Dataset container, CSV/binary I/O and preprocessing transforms.

Values are held column-major: ``Dataset.values`` is an ``(n, d)`` array in
Fortran order, so every attribute is contiguous in memory.  The binary
format mirrors that layout on disk, which lets partitions of a large file be
read through a memory map without loading the whole payload.
"""
from __future__ import annotations

import csv
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAGIC = b"CFOF"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


class DatasetError(ValueError):
    """Raised for malformed input data or files."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense n x d point set with optional binary outlier labels.

    Parameters
    ----------
    values : array_like, shape (n, d)
        Real-valued points.  float32 input is kept as float32 (the on-disk
        precision); anything else is converted to float64.
    labels : array_like of {0, 1}, shape (n,), optional
    name : str
    validate : bool
        Check finiteness of every value.  Memory-mapped datasets skip this so
        that opening a file stays O(1).
    """

    values: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        vals = self.values
        if not isinstance(vals, np.memmap):
            vals = np.asarray(vals)
            if vals.dtype != np.float32:
                vals = vals.astype(np.float64, copy=False)
            if vals.ndim == 1:
                vals = vals[:, None]
            vals = np.asfortranarray(vals)
            vals.setflags(write=False)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise DatasetError(f"expected a non-empty (n, d) matrix, got shape {vals.shape}")
        if self.validate and not np.all(np.isfinite(vals)):
            raise DatasetError("dataset contains NaN or infinite values")
        object.__setattr__(self, "values", vals)

        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (vals.shape[0],):
                raise DatasetError(f"labels must have length n={vals.shape[0]}, got {lab.shape}")
            if not np.all((lab == 0) | (lab == 1)):
                raise DatasetError("labels must be 0/1")
            lab = lab.astype(np.uint8)
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def rows(self, start: int, stop: int) -> np.ndarray:
        """Materialize points ``start:stop`` as a row-major float64 block."""
        return np.ascontiguousarray(self.values[start:stop], dtype=np.float64)

    def with_values(self, values, name: str | None = None) -> "Dataset":
        return Dataset(values, self.labels, self.name if name is None else name)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.values.shape != other.values.shape or self.values.dtype != other.values.dtype:
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        # bitwise comparison, so -0.0 != 0.0 and round trips are checked exactly
        a = np.ascontiguousarray(self.values).view(np.uint8)
        b = np.ascontiguousarray(other.values).view(np.uint8)
        return bool(np.array_equal(a, b))

    __hash__ = None


# --------------------------------------------------------------------------- CSV

def load_csv(path, has_header: bool = False, label_column: int | str | None = None,
             name: str | None = None) -> Dataset:
    """Read a comma-separated file into a :class:`Dataset`.

    ``label_column`` may be a 0-based index or, when ``has_header`` is set, a
    column name.  Error messages use 1-based data row numbers.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if has_header:
        if not rows:
            raise DatasetError(f"{path}: empty file")
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    else:
        header = None
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    width = len(rows[0])
    lab_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise DatasetError(f"{path}: label column {label_column!r} not found")
            lab_idx = header.index(label_column)
        else:
            lab_idx = int(label_column) % width

    values = np.empty((len(rows), width - (lab_idx is not None)), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.int64) if lab_idx is not None else None
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DatasetError(f"{path}: row {i + 1} has {len(row)} columns, expected {width}")
        j_out = 0
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: cannot parse {cell!r} at row {i + 1}, column {j + 1}") from None
            if j == lab_idx:
                labels[i] = int(v)
            else:
                values[i, j_out] = v
                j_out += 1
    return Dataset(values, labels, name or path.stem)


def save_csv(ds: Dataset, path, header: bool = False) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(ds.d)])
        for row in np.asarray(ds.values):
            w.writerow([repr(float(v)) for v in row])


def save_labels(labels, path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def load_labels(path) -> np.ndarray:
    text = Path(path).read_text().split()
    try:
        lab = np.array([int(t) for t in text], dtype=np.uint8)
    except ValueError as exc:
        raise DatasetError(f"{path}: labels must be integers 0/1") from exc
    if lab.size == 0 or not np.all(lab <= 1):
        raise DatasetError(f"{path}: labels must be a non-empty 0/1 column")
    return lab


# ------------------------------------------------------------------------ binary

def save_binary(ds: Dataset, path) -> None:
    """Write ``ds`` in the CFOF binary format (float32, column-major).

    float64 data is rounded to float32 on the way out, so only float32
    datasets round-trip bit-exactly.
    """
    vals = np.asarray(ds.values)
    if vals.dtype != np.float32:
        cast = vals.astype(np.float32)
        if not np.array_equal(cast.astype(vals.dtype), vals):
            log.info("save_binary: rounding float64 values of %r to float32", ds.name)
        vals = cast
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, ds.n, ds.d))
        fh.write(np.ascontiguousarray(vals.T, dtype="<f4").tobytes())
        if ds.labels is None:
            fh.write(b"\x00")
        else:
            fh.write(b"\x01")
            fh.write(ds.labels.astype(np.uint8).tobytes())


def _read_header(fh, path):
    raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise DatasetError(f"{path}: truncated header")
    magic, version, n, d = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise DatasetError(f"{path}: bad magic {magic!r}, not a CFOF binary file")
    if version != VERSION:
        raise DatasetError(f"{path}: unsupported version {version} (expected {VERSION})")
    if n < 1 or d < 1:
        raise DatasetError(f"{path}: empty dataset (n={n}, d={d})")
    return n, d


def load_binary(path, mmap: bool = False) -> Dataset:
    """Read a CFOF binary file.

    With ``mmap=True`` the values are a read-only memory map, so partitions
    can be streamed from disk; finiteness is then not checked up front.
    """
    path = Path(path)
    size = path.stat().st_size
    with path.open("rb") as fh:
        n, d = _read_header(fh, path)
        payload = 4 * n * d
        if size < _HEADER.size + payload:
            raise DatasetError(
                f"{path}: truncated payload, header declares {n}x{d} floats "
                f"but only {(size - _HEADER.size) // 4} present")
        labels = None
        fh.seek(_HEADER.size + payload)
        flag = fh.read(1)
        if flag == b"\x01":
            raw = fh.read(n)
            if len(raw) < n:
                raise DatasetError(f"{path}: truncated label block")
            labels = np.frombuffer(raw, dtype=np.uint8).copy()
        elif flag not in (b"", b"\x00"):
            raise DatasetError(f"{path}: bad label flag {flag!r}")
        if mmap:
            cm = np.memmap(path, dtype="<f4", mode="r", offset=_HEADER.size, shape=(d, n))
            values = cm.T
        else:
            fh.seek(_HEADER.size)
            values = np.frombuffer(fh.read(payload), dtype="<f4").reshape(d, n).T.astype(np.float32)
    return Dataset(values, labels, path.stem, validate=not mmap)


def load(path, **kwargs) -> Dataset:
    """Dispatch on extension: ``.bin`` is binary, anything else CSV."""
    path = Path(path)
    if path.suffix == ".bin":
        return load_binary(path, mmap=kwargs.get("mmap", False))
    kwargs.pop("mmap", None)
    return load_csv(path, **kwargs)


def save(ds: Dataset, path) -> None:
    path = Path(path)
    if path.suffix == ".bin":
        save_binary(ds, path)
    else:
        save_csv(ds, path)


# -------------------------------------------------------------------- transforms

def normalize(ds: Dataset) -> Dataset:
    """Mean-center every attribute and divide by its population stdev.

    Zero-variance attributes are dropped.
    """
    if ds.n < 2:
        raise DatasetError("normalize needs at least two points")
    x = np.asarray(ds.values, dtype=np.float64)
    mean = x.mean(axis=0)
    centered = x - mean
    std = np.sqrt((centered ** 2).mean(axis=0))
    # relative test so that float noise around a constant column counts as constant
    keep = std > 1e-12 * np.maximum(np.abs(mean), 1.0)
    if not keep.any():
        raise DatasetError("all attributes are constant; nothing left after normalization")
    if not keep.all():
        log.info("normalize: dropping %d zero-variance attribute(s)", int((~keep).sum()))
    z = centered[:, keep] / std[keep]
    # second centering pass removes the O(eps) residual mean of the first
    z -= z.mean(axis=0)
    return Dataset(z, ds.labels, ds.name)


def shuffle_attributes(ds: Dataset, seed) -> Dataset:
    """Permute the entries of every attribute independently."""
    rng = np.random.default_rng(seed)
    x = np.array(ds.values, order="F")
    for j in range(ds.d):
        x[:, j] = x[rng.permutation(ds.n), j]
    return Dataset(x, ds.labels, ds.name)


def randomize_rows(ds: Dataset, seed, return_permutation: bool = False):
    """Permute the rows (labels follow their points)."""
    perm = np.random.default_rng(seed).permutation(ds.n)
    out = Dataset(np.asarray(ds.values)[perm], None if ds.labels is None else ds.labels[perm],
                  ds.name)
    return (out, perm) if return_permutation else out
