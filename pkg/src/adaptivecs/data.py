"""Datasets for the compression harness.

Sources: IDX image files (optionally gzipped), plain numeric CSV, and a
synthetic sparse-signal generator. Everything is normalized into rows of
float64 features in [0, 1] so the agents see a consistent state scale.
"""

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_rng
from .exceptions import DataFormatError

IDX_IMAGE_MAGIC = 2051


@dataclass
class Dataset:
    """A matrix of samples plus a display name."""

    X: np.ndarray
    name: str = "data"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise DataFormatError(f"dataset needs a non-empty 2-D matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise DataFormatError("dataset contains NaN or Inf entries")
        self.X = X

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def __len__(self):
        return self.n_samples


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(path, limit=None):
    """Read an IDX image file (the MNIST container format).

    Accepts plain or gzip-compressed files, checks the image magic number
    and returns a Dataset of flattened pixel rows scaled to [0, 1].
    """
    with _open_maybe_gzip(path) as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise DataFormatError(f"{path}: truncated idx header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGE_MAGIC:
            raise DataFormatError(
                f"{path}: bad magic {magic}, expected {IDX_IMAGE_MAGIC} (u8 images)"
            )
        if limit is not None:
            count = min(count, int(limit))
        raw = fh.read(count * rows * cols)
    if len(raw) != count * rows * cols:
        raise DataFormatError(f"{path}: expected {count * rows * cols} pixels, file is short")
    X = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
    X = X.reshape(count, rows * cols)
    return Dataset(X, name="idx", meta={"rows": rows, "cols": cols})


def load_csv(path, delimiter=","):
    """Read a numeric CSV and min-max normalize each column to [0, 1].

    A constant column maps to all zeros. A header line is tolerated: if
    the first row fails to parse it is skipped.
    """
    try:
        X = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    except ValueError:
        try:
            X = np.loadtxt(path, delimiter=delimiter, ndmin=2, skiprows=1)
        except ValueError as exc:
            raise DataFormatError(f"{path}: not a numeric csv ({exc})") from None
    if X.size == 0:
        raise DataFormatError(f"{path}: empty csv")
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X, dtype=np.float64)
    nz = span > 0
    out[:, nz] = (X[:, nz] - lo[nz]) / span[nz]
    return Dataset(out, name="csv")


def save_csv(path, X, delimiter=","):
    """Write a 2-D array as plain numeric CSV."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    np.savetxt(path, X, delimiter=delimiter, fmt="%.17g")


def downscale(dataset, factor):
    """Block-average square images by an integer factor.

    Needs the row/col metadata that ``load_idx`` records; both sides must
    divide by the factor.
    """
    factor = check_count(factor, "factor")
    rows = dataset.meta.get("rows")
    cols = dataset.meta.get("cols")
    if rows is None or cols is None:
        side = int(round(np.sqrt(dataset.n_features)))
        if side * side != dataset.n_features:
            raise DataFormatError("dataset has no image shape metadata and is not square")
        rows = cols = side
    if rows % factor or cols % factor:
        raise ValueError(f"image {rows}x{cols} does not divide by {factor}")
    r, c = rows // factor, cols // factor
    imgs = dataset.X.reshape(-1, r, factor, c, factor)
    X = imgs.mean(axis=(2, 4)).reshape(-1, r * c)
    return Dataset(X, name=dataset.name, meta={"rows": r, "cols": c})


def synth_sparse(n_features, sparsity, n_samples, random_state=None, low=0.5, high=1.0):
    """Random signals with exactly ``sparsity`` nonzero entries per row.

    Support positions are drawn without replacement and values uniform on
    [low, high], keeping states inside [0, 1] like normalized pixels.
    """
    n = check_count(n_features, "n_features")
    k = check_count(sparsity, "sparsity")
    count = check_count(n_samples, "n_samples")
    if k > n:
        raise ValueError(f"sparsity {k} exceeds n_features {n}")
    rng = check_rng(random_state)
    X = np.zeros((count, n))
    for i in range(count):
        idx = rng.choice(n, size=k, replace=False)
        X[i, idx] = rng.uniform(low, high, size=k)
    return Dataset(X, name="synth", meta={"sparsity": k})
