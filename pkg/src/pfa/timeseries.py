"""Signal containers, training-phase averages, history embedding and expansion.

Signals are stored column-per-time-step: an ``(n, T)`` array holds ``n``
components sampled at the equidistant times ``0, ..., T-1``.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CsvFormatError, InsufficientDataError

__all__ = [
    "TimeSeries",
    "Expansion",
    "as_array",
    "average",
    "cross_average",
    "embed_history",
    "history_matrix",
    "valid_range",
    "expand",
    "kron_block",
    "vec",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True)
class TimeSeries:
    """Equidistant multivariate real signal.

    Parameters
    ----------
    data : array_like, shape (n, T)
        One row per component, one column per time step. A 1-D input is
        treated as a single component.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise ValueError("time series data must be 1-D or 2-D, got %d-D" % data.ndim)
        n, T = data.shape
        if n < 1 or T < 2:
            raise ValueError("time series needs n >= 1 components and T >= 2 samples, got %s" % (data.shape,))
        if not np.all(np.isfinite(data)):
            raise ValueError("time series contains non-finite entries")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data
        return self.data.astype(dtype)

    def __len__(self):
        return self.T


def as_array(series) -> np.ndarray:
    """Return ``series`` as a float ``(n, T)`` array (1-D input becomes one row)."""
    if isinstance(series, TimeSeries):
        return series.data
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ValueError("expected an (n, T) signal, got shape %s" % (arr.shape,))
    return arr


def average(signal, times: Iterable[int] | None = None) -> np.ndarray:
    """Average a time-indexed signal over a set of time indices.

    ``signal`` is any array whose last axis is time. The indices are sorted
    ascending before summation, so the result does not depend on the order
    they are given in.
    """
    arr = np.asarray(signal, dtype=float)
    if times is None:
        if arr.shape[-1] == 0:
            raise ValueError("empty averaging domain")
        return arr.mean(axis=-1)
    idx = np.unique(np.asarray(list(times), dtype=int))
    if idx.size == 0:
        raise ValueError("empty averaging domain")
    if idx[0] < 0 or idx[-1] >= arr.shape[-1]:
        raise IndexError("averaging domain references samples outside the signal")
    return arr[..., idx].mean(axis=-1)


def cross_average(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``<a(t) b(t)^T>`` for two signals sharing the same time columns."""
    if a.shape[1] != b.shape[1]:
        raise ValueError("signals cover different numbers of samples")
    if a.shape[1] == 0:
        raise ValueError("empty averaging domain")
    return (a @ b.T) / a.shape[1]


def valid_range(T: int, p: int, delta: int = 1) -> range:
    """Time indices ``t`` for which a full ``p``-step history exists."""
    return range(p * delta, T)


def _check_order(p: int, delta: int):
    if int(p) != p or p < 1:
        raise ValueError("prediction order p must be a positive integer, got %r" % (p,))
    if int(delta) != delta or delta < 1:
        raise ValueError("lag step delta must be a positive integer, got %r" % (delta,))


def embed_history(series, p: int, delta: int, t: int) -> np.ndarray:
    """Stacked history ``[z(t-delta); z(t-2 delta); ...; z(t-p delta)]``."""
    _check_order(p, delta)
    z = as_array(series)
    if t < p * delta:
        raise InsufficientDataError("insufficient history: t=%d < p*delta=%d" % (t, p * delta))
    if t >= z.shape[1]:
        raise IndexError("t=%d outside signal of length %d" % (t, z.shape[1]))
    return np.concatenate([z[:, t - i * delta] for i in range(1, p + 1)])


def history_matrix(series, p: int, delta: int = 1) -> np.ndarray:
    """All history vectors as columns, for ``t = p*delta, ..., T-1``.

    Returns
    -------
    ndarray, shape (n*p, T - p*delta)
        Column ``j`` is the embedded history at time ``p*delta + j``.
    """
    _check_order(p, delta)
    z = as_array(series)
    n, T = z.shape
    start = p * delta
    if T <= start:
        raise InsufficientDataError("insufficient samples: T=%d <= p*delta=%d" % (T, start))
    return np.vstack([z[:, start - i * delta:T - i * delta] for i in range(1, p + 1)])


@dataclass(frozen=True)
class Expansion:
    """Monomial expansion of degree 1 (identity) or 2 (linear plus quadratic terms)."""

    degree: int
    input_dim: int

    def __post_init__(self):
        if self.degree not in (1, 2):
            raise ValueError("expansion degree must be 1 or 2, got %r" % (self.degree,))
        if self.input_dim < 1:
            raise ValueError("input dimension must be positive")

    @property
    def output_dim(self) -> int:
        n0 = self.input_dim
        return n0 if self.degree == 1 else n0 + n0 * (n0 + 1) // 2


def expand(series, expansion: Expansion) -> np.ndarray:
    x = as_array(series)
    if x.shape[0] != expansion.input_dim:
        raise ValueError("dimension mismatch: series has %d components, expansion expects %d"
                         % (x.shape[0], expansion.input_dim))
    if expansion.degree == 1:
        return x.copy()
    i, j = np.triu_indices(x.shape[0])
    return np.vstack([x, x[i] * x[j]])


def kron_block(M, p: int) -> np.ndarray:
    """Block-diagonal matrix holding ``p`` copies of ``M`` (``I_p kron M``)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return np.kron(np.eye(p), np.atleast_2d(np.asarray(M, dtype=float)))


def vec(M) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(M).reshape(-1, order="F")


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_csv(source) -> TimeSeries:
    """Read a time series from CSV: one row per time step, one column per component.

    A single header row is skipped when its first field is not numeric.
    ``source`` may be a path or an open text file.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(f.strip() for f in row)]
    if not rows:
        raise CsvFormatError("no data rows")
    if not _is_number(rows[0][0].strip()):
        rows = rows[1:]
    if not rows:
        raise CsvFormatError("no data rows after header")
    width = len(rows[0])
    values = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise CsvFormatError("row %d has %d fields, expected %d" % (lineno, len(row), width))
        try:
            values.append([float(f) for f in row])
        except ValueError as exc:
            raise CsvFormatError("row %d: %s" % (lineno, exc)) from None
    try:
        return TimeSeries(np.array(values).T)
    except ValueError as exc:
        raise CsvFormatError(str(exc)) from None


def write_csv(path, rows: np.ndarray, header: Sequence[str] | None = None):
    """Write a 2-D array row by row with 17 significant digits."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in rows:
            writer.writerow(["%.17g" % v for v in row])
