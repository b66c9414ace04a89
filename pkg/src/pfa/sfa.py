"""Slow feature analysis on a sphered signal, used as a comparison baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientDataError
from .preprocessing import DEFAULT_POLICY, ThresholdPolicy, symmetric_eig
from .timeseries import as_array

__all__ = ["SfaResult", "time_derivative", "solve_sfa"]


@dataclass(frozen=True)
class SfaResult:
    """Slowest directions ``A_r`` (columns) and their derivative variances, ascending."""

    A_r: np.ndarray
    eigenvalues: np.ndarray

    @property
    def r(self) -> int:
        return self.A_r.shape[1]

    def transform(self, z) -> np.ndarray:
        return self.A_r.T @ as_array(z)


def time_derivative(z) -> np.ndarray:
    """Backward difference ``z(t) - z(t-1)`` for ``t = 1, ..., T-1``."""
    return np.diff(as_array(z), axis=1)


def solve_sfa(z, r: int, policy: ThresholdPolicy = DEFAULT_POLICY) -> SfaResult:
    """Return the ``r`` directions minimising ``<(a^T dz)^2>``, slowest first.

    Only directions in which ``z`` has nonzero variance (under ``policy``) are
    candidates, so ``r`` may not exceed the rank of ``z``.
    """
    z = as_array(z)
    n, T = z.shape
    if T < 3:
        raise InsufficientDataError("SFA needs at least 3 samples")
    if not 1 <= r <= n:
        raise ValueError("r must lie in [1, %d], got %d" % (n, r))
    # directions that sphering zeroed out would otherwise come first as constant features
    cvals, cvecs = symmetric_eig(z @ z.T / T)
    U = cvecs[:, policy.keep(cvals)]
    if r > U.shape[1]:
        raise ValueError("r=%d exceeds the signal rank %d" % (r, U.shape[1]))
    dz = time_derivative(U.T @ z)
    vals, vecs = symmetric_eig(dz @ dz.T / dz.shape[1])
    A_r = U @ vecs[:, :r]
    # same sign rule as symmetric_eig, applied in the original coordinates
    A_r = A_r * np.where(A_r[np.argmax(np.abs(A_r), axis=0), np.arange(r)] < 0, -1.0, 1.0)
    return SfaResult(A_r=A_r, eigenvalues=vals[:r])
