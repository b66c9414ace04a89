"""Linear autoregressive prediction: fitting, errors, shift operator, iterated prediction.

The predictor of an ``m``-dimensional signal from its ``p`` most recent values
is a broad matrix ``B = (B_1, ..., B_p)`` of shape ``(m, m*p)`` acting on the
stacked history vector, ``z(t) ~ B @ zeta(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientDataError
from .preprocessing import DEFAULT_POLICY, ThresholdPolicy, thresholded_inverse
from .timeseries import as_array, cross_average, history_matrix, kron_block

__all__ = [
    "ArPredictor",
    "ShiftPredictor",
    "fit_full",
    "fit_reduced",
    "fit_diagonal",
    "prediction_error",
    "fit_shift",
    "iterated_prediction",
]


@dataclass(frozen=True)
class ArPredictor:
    """Fitted linear AR model ``z(t) ~ coefficients @ zeta(t)``."""

    coefficients: np.ndarray
    p: int
    delta: int = 1

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if not np.all(np.isfinite(B)):
            raise ValueError("predictor coefficients must be finite")
        if B.shape[1] % self.p:
            raise ValueError("coefficient matrix width %d is not a multiple of p=%d" % (B.shape[1], self.p))
        object.__setattr__(self, "coefficients", B)

    @property
    def dim(self) -> int:
        """Dimension of the predicted signal."""
        return self.coefficients.shape[0]

    @property
    def blocks(self) -> list[np.ndarray]:
        """The per-lag coefficient matrices ``B_1, ..., B_p``."""
        return np.hsplit(self.coefficients, self.p)

    def predict(self, histories: np.ndarray) -> np.ndarray:
        """Predict from one history vector or a matrix of history columns."""
        return self.coefficients @ histories


@dataclass(frozen=True)
class ShiftPredictor:
    """Least-squares one-step map of history vectors, ``zeta(t+1) ~ V @ zeta(t)``."""

    V: np.ndarray
    p: int
    delta: int = 1

    def __call__(self, histories: np.ndarray) -> np.ndarray:
        return self.V @ histories


def _regress(target: np.ndarray, H: np.ndarray, policy: ThresholdPolicy) -> np.ndarray:
    return cross_average(target, H) @ thresholded_inverse(cross_average(H, H), policy)


def fit_full(z, p: int, delta: int = 1, policy: ThresholdPolicy = DEFAULT_POLICY) -> ArPredictor:
    """Least-squares AR fit of the whole signal: ``W = <z zeta^T> <zeta zeta^T>^+``.

    Averages run over ``t = p*delta, ..., T-1``.
    """
    z = as_array(z)
    H = history_matrix(z, p, delta)
    return ArPredictor(_regress(z[:, p * delta:], H, policy), p, delta)


def _check_orthonormal(A_r: np.ndarray, tol: float = 1e-8):
    gram = A_r.T @ A_r
    if np.abs(gram - np.eye(gram.shape[0])).max() > tol:
        raise ValueError("extraction matrix columns are not orthonormal")


def fit_reduced(z, A_r, p: int, delta: int = 1, policy: ThresholdPolicy = DEFAULT_POLICY) -> ArPredictor:
    """AR fit of the projected signal ``A_r^T z`` expressed through full-signal averages.

    ``B = A_r^T <z zeta^T> A̲ (A̲^T <zeta zeta^T> A̲)^+`` with ``A̲ = kron_block(A_r, p)``.
    """
    z = as_array(z)
    A_r = np.asarray(A_r, dtype=float)
    if A_r.ndim == 1:
        A_r = A_r[:, np.newaxis]
    if A_r.shape[0] != z.shape[0]:
        raise ValueError("extraction matrix has %d rows, signal has %d components" % (A_r.shape[0], z.shape[0]))
    _check_orthonormal(A_r)
    H = history_matrix(z, p, delta)
    blk = kron_block(A_r, p)
    cross = A_r.T @ cross_average(z[:, p * delta:], H) @ blk
    gram = blk.T @ cross_average(H, H) @ blk
    return ArPredictor(cross @ thresholded_inverse(gram, policy), p, delta)


def fit_diagonal(z, p: int, delta: int = 1, policy: ThresholdPolicy = DEFAULT_POLICY) -> ArPredictor:
    """Per-component AR fit (every ``B_i`` diagonal); not orthogonally agnostic."""
    z = as_array(z)
    n = z.shape[0]
    B = np.zeros((n, n * p))
    for j in range(n):
        b = fit_full(z[j:j + 1], p, delta, policy).coefficients[0]
        B[j, j::n] = b
    return ArPredictor(B, p, delta)


def prediction_error(predictor: ArPredictor, signal, histories=None, projector=None) -> float:
    """Average squared prediction error ``<|target(t) - P B zeta(t)|^2>``.

    Parameters
    ----------
    predictor : ArPredictor
    signal : array_like, shape (m, T)
        Prediction target.
    histories : array_like, shape (n, T), optional
        Signal whose histories feed the predictor; defaults to ``signal``.
    projector : array_like, shape (m, predictor.dim), optional
        Applied to the prediction before comparison.
    """
    target = as_array(signal)
    source = target if histories is None else as_array(histories)
    if source.shape[1] != target.shape[1]:
        raise ValueError("target and history signals differ in length")
    p, delta = predictor.p, predictor.delta
    H = history_matrix(source, p, delta)
    if predictor.coefficients.shape[1] != H.shape[0]:
        raise ValueError("dimension mismatch: predictor expects %d-dim histories, got %d"
                         % (predictor.coefficients.shape[1], H.shape[0]))
    pred = predictor.predict(H)
    if projector is not None:
        pred = np.atleast_2d(projector) @ pred
    if pred.shape[0] != target.shape[0]:
        raise ValueError("dimension mismatch: prediction has %d rows, target %d" % (pred.shape[0], target.shape[0]))
    resid = target[:, p * delta:] - pred
    return float(np.mean(np.sum(resid * resid, axis=0)))


def fit_shift(z, p: int, policy: ThresholdPolicy = DEFAULT_POLICY) -> ShiftPredictor:
    """Fit ``V = <zeta(t+1) zeta(t)^T> <zeta zeta^T>^+`` (unit step only).

    Both averages run over ``t = p, ..., T-2``, so ``V`` is the least-squares
    map and reproduces exact linear dynamics exactly.
    """
    z = as_array(z)
    if z.shape[1] < p + 2:
        raise InsufficientDataError("insufficient samples for shift operator: T=%d < p+2=%d" % (z.shape[1], p + 2))
    H = history_matrix(z, p, 1)
    prev = H[:, :-1]
    V = cross_average(H[:, 1:], prev) @ thresholded_inverse(cross_average(prev, prev), policy)
    return ShiftPredictor(V, p, 1)


def iterated_prediction(W: ArPredictor, V: ShiftPredictor, zeta, i: int) -> np.ndarray:
    """Predict ``i + 1`` steps ahead: ``W V^i zeta``."""
    if i < 0:
        raise ValueError("iteration count must be non-negative")
    power = np.eye(V.V.shape[0])
    for _ in range(i):
        power = V.V @ power
    return W.predict(power @ np.asarray(zeta, dtype=float))
