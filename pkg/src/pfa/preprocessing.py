"""Sphering and eigenvalue-thresholded inversion of symmetric matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSignalError
from .timeseries import as_array

__all__ = [
    "ThresholdPolicy",
    "SpheringTransform",
    "symmetric_eig",
    "thresholded_inverse",
    "fit_sphering",
    "apply_sphering",
]


@dataclass(frozen=True)
class ThresholdPolicy:
    """Eigenvalues below ``rel_cutoff * lambda_max`` are treated as zero."""

    rel_cutoff: float = 1e-10

    def __post_init__(self):
        if not 0.0 <= self.rel_cutoff < 1.0:
            raise ValueError("relative cutoff must lie in [0, 1), got %r" % (self.rel_cutoff,))

    def keep(self, eigenvalues: np.ndarray) -> np.ndarray:
        lam_max = eigenvalues.max() if eigenvalues.size else 0.0
        if lam_max <= 0.0:
            return np.zeros(eigenvalues.shape, dtype=bool)
        return eigenvalues > self.rel_cutoff * lam_max


DEFAULT_POLICY = ThresholdPolicy()


def _symmetrize(C) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] != C.shape[1]:
        raise ValueError("matrix must be square, got shape %s" % (C.shape,))
    if not np.all(np.isfinite(C)):
        raise ValueError("matrix contains non-finite entries")
    scale = np.abs(C).max()
    if scale > 0 and np.abs(C - C.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (C + C.T)


def symmetric_eig(C) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigendecomposition with a reproducible eigenvector sign.

    The largest-magnitude entry of every eigenvector is made positive (the
    first one wins on exact ties). Equal eigenvalues keep LAPACK's order.
    """
    vals, vecs = np.linalg.eigh(_symmetrize(C))
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def thresholded_inverse(C, policy: ThresholdPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Pseudo-inverse of a symmetric matrix via its eigendecomposition.

    Eigenvalues below the policy threshold are replaced by 0, all others by
    their reciprocal; the decomposition is then undone.
    """
    vals, vecs = symmetric_eig(C)
    keep = policy.keep(vals)
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    P = (vecs * inv) @ vecs.T
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class SpheringTransform:
    """Affine map ``z = S (x - mean)`` whitening the training signal.

    Attributes
    ----------
    mean : ndarray, shape (n,)
    whitening : ndarray, shape (n, n)
        Symmetric matrix ``S``; directions with eigenvalues under the
        threshold are annihilated.
    kept_rank : int
        Number of dimensions that survive the threshold.
    """

    mean: np.ndarray
    whitening: np.ndarray
    kept_rank: int

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    def __call__(self, series) -> np.ndarray:
        return apply_sphering(self, series)


def fit_sphering(series, policy: ThresholdPolicy = DEFAULT_POLICY) -> SpheringTransform:
    """Fit mean removal and covariance normalisation (``1/T`` normalisation)."""
    x = as_array(series)
    if x.shape[1] < 2:
        raise DegenerateSignalError("need at least 2 samples to sphere")
    mean = x.mean(axis=1)
    centred = x - mean[:, np.newaxis]
    cov = centred @ centred.T / x.shape[1]
    vals, vecs = symmetric_eig(cov)
    # rounding floor: mean removal leaves residues of order eps * |x|
    floor = (64 * np.finfo(float).eps * max(1.0, np.abs(x).max())) ** 2
    keep = policy.keep(vals) & (vals > floor)
    if not keep.any():
        raise DegenerateSignalError("degenerate signal: all covariance eigenvalues below threshold")
    scale = np.zeros_like(vals)
    scale[keep] = vals[keep] ** -0.5
    S = (vecs * scale) @ vecs.T
    S = 0.5 * (S + S.T)
    return SpheringTransform(mean=mean, whitening=S, kept_rank=int(keep.sum()))


def apply_sphering(transform: SpheringTransform, series) -> np.ndarray:
    x = as_array(series)
    if x.shape[0] != transform.n:
        raise ValueError("dimension mismatch: transform expects %d components, got %d"
                         % (transform.n, x.shape[0]))
    return transform.whitening @ (x - transform.mean[:, np.newaxis])
