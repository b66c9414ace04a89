"""Predictable feature extraction.

The relaxed problem, predicting the extracted components from the history of
the *whole* signal, is solved globally by diagonalising the covariance of the
full model's prediction residuals and keeping the eigenvectors of the ``r``
smallest eigenvalues. With a horizon ``k > 0`` the residual covariances of
the iterated predictions ``W V^i zeta(t-i)``, ``i = 0..k``, are summed first;
this penalises directions whose one-step fit relies on noise.

Any prediction model works as long as it is orthogonally agnostic and
information consistent; see :class:`PredictionModel` and
:func:`verify_agnosticity`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .ar_model import (ArPredictor, fit_diagonal, fit_full, fit_reduced,
                       fit_shift)
from .exceptions import InsufficientDataError
from .orthogonal import random_orthogonal
from .preprocessing import (DEFAULT_POLICY, SpheringTransform, ThresholdPolicy,
                            apply_sphering, fit_sphering, symmetric_eig)
from .timeseries import Expansion, as_array, expand, history_matrix

__all__ = [
    "PfaConfig",
    "ExtractionResult",
    "PredictionModel",
    "LinearARModel",
    "DiagonalARModel",
    "ZeroModel",
    "MeanHistoryModel",
    "MODELS",
    "residual_covariance",
    "solve_relaxation",
    "solve_pfa_k",
    "solve_general",
    "AgnosticityReport",
    "verify_agnosticity",
    "extract_features",
]

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class PfaConfig:
    """Parameters of a PFA extraction.

    Attributes
    ----------
    r : int
        Number of extracted components.
    p : int
        Prediction order.
    delta : int
        Lag step between history samples.
    k : int
        Iterated-prediction horizon; 0 solves the plain relaxation.
    policy : ThresholdPolicy
    degree : int
        Degree of the monomial expansion applied by :func:`extract_features`.
    holdout : float
        Fraction of trailing samples withheld from fitting and used only to
        report a held-out error. Off by default.
    """

    r: int
    p: int = 2
    delta: int = 1
    k: int = 0
    policy: ThresholdPolicy = DEFAULT_POLICY
    degree: int = 1
    holdout: float = 0.0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.k > 0 and self.delta != 1:
            raise ValueError("iterated prediction (k > 0) is only defined for delta = 1")
        if self.degree not in (1, 2):
            raise ValueError("expansion degree must be 1 or 2")
        if not 0.0 <= self.holdout < 1.0:
            raise ValueError("holdout fraction must lie in [0, 1)")

    def check_dim(self, n: int):
        if self.r > n:
            raise ValueError("cannot extract r=%d components from a %d-dimensional signal" % (self.r, n))


@dataclass(frozen=True)
class ExtractionResult:
    """Outcome of a PFA solve.

    ``eigenvalues`` are ascending and pair with the columns of ``A``; the first
    ``r`` columns are the extraction matrix. ``objective`` is the value of the
    relaxed problem at that solution (sum of the ``r`` smallest eigenvalues),
    ``achieved_error`` the error of ``refitted`` on the extracted signal.
    """

    A: np.ndarray
    r: int
    eigenvalues: np.ndarray
    refitted: ArPredictor
    achieved_error: float
    objective: float
    k: int = 0
    holdout_error: float | None = None
    warnings: tuple[str, ...] = field(default=())

    @property
    def A_r(self) -> np.ndarray:
        return self.A[:, :self.r]

    def transform(self, z) -> np.ndarray:
        """Extracted signal ``A_r^T z``."""
        return self.A_r.T @ as_array(z)


class PredictionModel:
    """Pluggable prediction model for :func:`solve_general`.

    Subclasses implement :meth:`fit`, returning an object with a
    ``predict(histories)`` method mapping ``(n*p, N)`` history columns to
    ``(n, N)`` predictions. :meth:`shift` builds the one-step map of history
    vectors used for iterated prediction; the default predicts the newest
    block and copies the rest down from the previous history.
    """

    name = "abstract"

    def fit(self, z, p, delta, policy):
        raise NotImplementedError

    def refit(self, z, A_r, p, delta, policy):
        return self.fit(A_r.T @ z, p, delta, policy)

    def shift(self, z, fitted, p, policy):
        n = z.shape[0]

        def step(H):
            return np.vstack([fitted.predict(H), H[:n * (p - 1)]])

        return step

    def error(self, fitted, target, histories=None, projector=None, p=1, delta=1) -> float:
        target = as_array(target)
        source = target if histories is None else as_array(histories)
        pred = fitted.predict(history_matrix(source, p, delta))
        if projector is not None:
            pred = projector @ pred
        resid = target[:, p * delta:] - pred
        return float(np.mean(np.sum(resid * resid, axis=0)))


class LinearARModel(PredictionModel):
    """Linear AR model with unconstrained coefficient blocks."""

    name = "linear"

    def fit(self, z, p, delta, policy):
        return fit_full(z, p, delta, policy)

    def refit(self, z, A_r, p, delta, policy):
        return fit_reduced(z, A_r, p, delta, policy)

    def shift(self, z, fitted, p, policy):
        return fit_shift(z, p, policy)


class DiagonalARModel(PredictionModel):
    """Per-component AR model; included as a model that violates agnosticity."""

    name = "diagonal"

    def fit(self, z, p, delta, policy):
        return fit_diagonal(z, p, delta, policy)


class ZeroModel(PredictionModel):
    """Always predicts zero."""

    name = "zero"

    def fit(self, z, p, delta, policy):
        n = as_array(z).shape[0]
        return ArPredictor(np.zeros((n, n * p)), p, delta)


class MeanHistoryModel(PredictionModel):
    """Predicts the mean of the ``p`` lagged values; nothing is fitted."""

    name = "mean"

    def fit(self, z, p, delta, policy):
        n = as_array(z).shape[0]
        return ArPredictor(np.kron(np.full((1, p), 1.0 / p), np.eye(n)), p, delta)


MODELS = {cls.name: cls for cls in (LinearARModel, DiagonalARModel, ZeroModel, MeanHistoryModel)}


def residual_covariance(z, config: PfaConfig, model: PredictionModel | None = None,
                        fitted=None) -> np.ndarray:
    """Summed covariance of the 1- to ``(k+1)``-step prediction residuals.

    All ``k + 1`` terms average over the common range
    ``t = p*delta + k, ..., T-1``.
    """
    z = as_array(z)
    model = LinearARModel() if model is None else model
    p, delta, k = config.p, config.delta, config.k
    if fitted is None:
        fitted = model.fit(z, p, delta, config.policy)
    H = history_matrix(z, p, delta)
    N = H.shape[1]
    if N - k <= 0:
        raise InsufficientDataError("insufficient samples for horizon k=%d" % k)
    target = z[:, p * delta + k:]
    step = model.shift(z, fitted, p, config.policy) if k > 0 else None
    M = np.zeros((z.shape[0], z.shape[0]))
    Y = H[:, :N]
    for i in range(k + 1):
        if i:
            # column j of Y holds the i-step extension of zeta(p*delta + j)
            Y = step(Y[:, :N - i])
        R = target - fitted.predict(Y[:, k - i:N - i])
        M += R @ R.T / R.shape[1]
    return 0.5 * (M + M.T)


def _extract(z, config: PfaConfig, model: PredictionModel, M: np.ndarray, z_test=None) -> ExtractionResult:
    n = z.shape[0]
    vals, A = symmetric_eig(M)
    r = config.r
    A_r = A[:, :r]
    warnings = []
    if r < n:
        scale = max(np.abs(vals).max(), np.finfo(float).tiny)
        if vals[r] - vals[r - 1] < DEGENERACY_TOL * scale:
            msg = ("eigenvalues %d and %d are degenerate (%.3g vs %.3g); the extracted subspace is not unique"
                   % (r, r + 1, vals[r - 1], vals[r]))
            logger.warning(msg)
            warnings.append(msg)
    refitted = model.refit(z, A_r, config.p, config.delta, config.policy)
    achieved = model.error(refitted, A_r.T @ z, p=config.p, delta=config.delta)
    holdout_error = None
    if z_test is not None:
        holdout_error = model.error(refitted, A_r.T @ z_test, p=config.p, delta=config.delta)
    return ExtractionResult(A=A, r=r, eigenvalues=vals, refitted=refitted,
                            achieved_error=achieved, objective=float(vals[:r].sum()),
                            k=config.k, holdout_error=holdout_error, warnings=tuple(warnings))


def solve_general(z, config: PfaConfig, model: PredictionModel | None = None) -> ExtractionResult:
    """Solve the (iterated) relaxation for any admissible prediction model."""
    z = as_array(z)
    config.check_dim(z.shape[0])
    model = LinearARModel() if model is None else model
    z_test = None
    if config.holdout > 0:
        cut = int(round(z.shape[1] * (1.0 - config.holdout)))
        z, z_test = z[:, :cut], z[:, cut:]
        if z_test.shape[1] <= config.p * config.delta:
            raise InsufficientDataError("holdout segment too short for p*delta=%d" % (config.p * config.delta))
    M = residual_covariance(z, config, model)
    return _extract(z, config, model, M, z_test)


def solve_pfa_k(z, config: PfaConfig) -> ExtractionResult:
    """Robust extraction with iterated-prediction horizon ``config.k``."""
    return solve_general(z, config, LinearARModel())


def solve_relaxation(z, config: PfaConfig) -> ExtractionResult:
    """PCA on the residuals of the full linear AR fit (horizon 0)."""
    if config.k != 0:
        raise ValueError("solve_relaxation expects k=0; use solve_pfa_k for k > 0")
    return solve_pfa_k(z, config)


@dataclass(frozen=True)
class AgnosticityReport:
    """Worst violation per criterion over all trials."""

    trials: int
    violations: dict
    tolerance: float = 1e-8

    def passed(self, criterion: str) -> bool:
        return self.violations[criterion] <= self.tolerance

    @property
    def ok(self) -> bool:
        return all(self.passed(c) for c in self.violations)

    def lines(self) -> list[str]:
        return ["%-26s %s  max violation %.3e" % (c, "PASS" if self.passed(c) else "FAIL", v)
                for c, v in self.violations.items()]


def verify_agnosticity(model: PredictionModel, z, trials: int, p: int = 1, delta: int = 1,
                       policy: ThresholdPolicy = DEFAULT_POLICY, seed=0,
                       tolerance: float = 1e-8) -> AgnosticityReport:
    """Check a model against the admissibility criteria on random rotations.

    For each trial a Haar-random ``A`` and a random ``r`` are drawn and
    the following are evaluated:

    * ``orthogonal_agnosticity``: ``|err(z) - err(A^T z)|``, relative to ``max(1, err(z))``;
    * ``projective_agnosticity``: error of the first ``r`` predictions of the
      model fitted on ``A^T z`` versus the ``A_r``-projected predictions of the
      model fitted on ``z`` (relative difference);
    * ``commuting``: relative Frobenius difference of those two prediction sets
      over all ``n`` components;
    * ``information_consistency``: by how much the model refitted on
      ``A_r^T z`` beats the projected full-signal model (0 if it does not).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    z = as_array(z)
    n = z.shape[0]
    rng = np.random.default_rng(seed)
    fitted = model.fit(z, p, delta, policy)
    H = history_matrix(z, p, delta)
    pred_z = fitted.predict(H)
    err_z = model.error(fitted, z, p=p, delta=delta)
    worst = dict.fromkeys(("orthogonal_agnosticity", "projective_agnosticity",
                           "commuting", "information_consistency"), 0.0)
    for _ in range(trials):
        A = random_orthogonal(n, rng)
        r = int(rng.integers(1, n + 1))
        A_r = A[:, :r]
        y = A.T @ z
        fitted_y = model.fit(y, p, delta, policy)
        err_y = model.error(fitted_y, y, p=p, delta=delta)
        worst["orthogonal_agnosticity"] = max(worst["orthogonal_agnosticity"],
                                              abs(err_z - err_y) / max(1.0, err_z))

        pred_y = fitted_y.predict(history_matrix(y, p, delta))
        rotated = A.T @ pred_z
        worst["commuting"] = max(worst["commuting"],
                                 np.linalg.norm(pred_y - rotated) / max(1.0, np.linalg.norm(rotated)))

        m = A_r.T @ z
        lhs_proj = model.error(fitted_y, m, histories=y, projector=np.eye(n)[:r], p=p, delta=delta)
        rhs_proj = model.error(fitted, m, histories=z, projector=A_r.T, p=p, delta=delta)
        worst["projective_agnosticity"] = max(worst["projective_agnosticity"],
                                              abs(lhs_proj - rhs_proj) / max(1.0, rhs_proj))

        fitted_m = model.fit(m, p, delta, policy)
        err_m = model.error(fitted_m, m, p=p, delta=delta)
        worst["information_consistency"] = max(worst["information_consistency"], rhs_proj - err_m)
    return AgnosticityReport(trials=trials, violations=worst, tolerance=tolerance)


def extract_features(x, config: PfaConfig) -> tuple[SpheringTransform, np.ndarray, ExtractionResult]:
    """Full pipeline: expand, sphere, solve.

    Returns
    -------
    transform : SpheringTransform
        Fitted on the expanded input.
    z : ndarray, shape (n, T)
        Sphered expanded signal.
    result : ExtractionResult
    """
    x = as_array(x)
    h = expand(x, Expansion(config.degree, x.shape[0]))
    transform = fit_sphering(h, config.policy)
    z = apply_sphering(transform, h)
    return transform, z, solve_pfa_k(z, config)
