"""Seeded property suites for prediction models and the relaxed solver.

Each suite draws random instances from its own seed and returns the worst
deviation observed, so callers can compare against a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .ar_model import fit_full, fit_reduced, prediction_error
from .orthogonal import random_block_orthogonal, random_orthogonal
from .preprocessing import apply_sphering, fit_sphering
from .solver import (AgnosticityReport, LinearARModel, PfaConfig, residual_covariance,
                     solve_relaxation, verify_agnosticity)
from .timeseries import kron_block

__all__ = [
    "SuiteResult",
    "random_var_signal",
    "noiseless_instance",
    "contract_suite",
    "commuting_suite",
    "relaxation_gap_suite",
    "lemma2_suite",
    "optimality_suite",
]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    value: float
    tolerance: float
    trials: int

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def line(self) -> str:
        return "%-26s %s  worst %.3e (tol %.0e, %d trials)" % (
            self.name, "PASS" if self.passed else "FAIL", self.value, self.tolerance, self.trials)


def random_var_signal(n, p, T, rng, sphere=True):
    """Sample a stable random VAR(p) signal of dimension ``n``."""
    blocks = [0.6 / p * random_orthogonal(n, rng) for _ in range(p)]
    burn = 50
    x = np.zeros((n, T + burn))
    noise = rng.standard_normal((n, T + burn))
    for t in range(p, T + burn):
        x[:, t] = noise[:, t] + sum(B @ x[:, t - i - 1] for i, B in enumerate(blocks))
    x = x[:, burn:]
    if sphere:
        x = apply_sphering(fit_sphering(x), x)
    return x


def noiseless_instance(n, r, T, rng):
    """Orthogonal mix of ``r`` pure sines and ``n - r`` white-noise dimensions.

    Returns the signal and the true ``n x r`` basis of the sine subspace.
    """
    t = np.arange(T)
    freqs = np.sort(rng.uniform(0.05, 1.2, size=r))
    phases = rng.uniform(0, 2 * np.pi, size=r)
    sines = np.sqrt(2.0) * np.sin(freqs[:, None] * t + phases[:, None])
    x = np.vstack([sines, rng.standard_normal((n - r, T))])
    Q = random_orthogonal(n, rng)
    return Q @ x, Q[:, :r]


def contract_suite(model, trials=100, seed=0, T=300, tolerance=1e-8) -> AgnosticityReport:
    """Agnosticity and consistency criteria on ``trials`` random signals (n <= 8, p <= 3)."""
    rng = np.random.default_rng(seed)
    worst = None
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, 4))
        z = random_var_signal(n, p, T, rng)
        rep = verify_agnosticity(model, z, trials=1, p=p, seed=int(rng.integers(2**32)), tolerance=tolerance)
        worst = dict(rep.violations) if worst is None else {c: max(worst[c], v) for c, v in rep.violations.items()}
    return AgnosticityReport(trials=trials, violations=worst, tolerance=tolerance)


def commuting_suite(trials=100, seed=1, T=300, tolerance=1e-8) -> SuiteResult:
    """Relative Frobenius gap between ``fit_full(A^T z)`` and ``A^T W kron_block(A)``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, 4))
        z = random_var_signal(n, p, T, rng)
        A = random_orthogonal(n, rng)
        W = fit_full(z, p).coefficients
        expected = A.T @ W @ kron_block(A, p)
        got = fit_full(A.T @ z, p).coefficients
        worst = max(worst, np.linalg.norm(got - expected) / np.linalg.norm(expected))
    return SuiteResult("commuting", worst, tolerance, trials)


def relaxation_gap_suite(trials=20, seed=2, T=600, tolerance=1e-8) -> tuple[SuiteResult, SuiteResult]:
    """Noiseless instances: refitted error and principal angle to the true sine subspace."""
    rng = np.random.default_rng(seed)
    worst_err = 0.0
    worst_angle = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        r = int(rng.integers(1, n))
        z, basis = noiseless_instance(n, r, T, rng)
        res = solve_relaxation(z, PfaConfig(r=r, p=2))
        worst_err = max(worst_err, res.achieved_error)
        worst_angle = max(worst_angle, float(subspace_angles(res.A_r, basis).max()))
    return (SuiteResult("relaxation_gap", worst_err, tolerance, trials),
            SuiteResult("relaxation_gap_angle", worst_angle, 1e-4, trials))


def lemma2_suite(trials=20, seed=3, T=300, tolerance=1e-8) -> SuiteResult:
    """Change of the refitted error when the solution is rotated within O(r, n-r)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, 4))
        r = int(rng.integers(1, n + 1))
        z = random_var_signal(n, p, T, rng)
        res = solve_relaxation(z, PfaConfig(r=r, p=p))
        A2 = res.A @ random_block_orthogonal(r, n - r, rng)
        e2 = prediction_error(fit_reduced(z, A2[:, :r], p), A2[:, :r].T @ z)
        worst = max(worst, abs(e2 - res.achieved_error) / max(1.0, res.achieved_error))
    return SuiteResult("lemma2_invariance", worst, tolerance, trials)


def optimality_suite(trials=20, seed=4, T=300, grid=360, tolerance=1e-9) -> SuiteResult:
    """Eigen-solution objective minus the best of a rotation-angle grid (n=2, r=1)."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    angles = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    directions = np.vstack([np.cos(angles), np.sin(angles)])
    for _ in range(trials):
        p = int(rng.integers(1, 4))
        z = random_var_signal(2, p, T, rng)
        cfg = PfaConfig(r=1, p=p)
        res = solve_relaxation(z, cfg)
        M = residual_covariance(z, cfg, LinearARModel())
        grid_best = np.einsum("it,ij,jt->t", directions, M, directions).min()
        worst = max(worst, res.objective - grid_best)
    return SuiteResult("brute_force_optimality", float(max(worst, 0.0)), tolerance, trials)

