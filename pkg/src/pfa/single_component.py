"""Extraction of single well-predictable components under a scalar AR model.

Each component ``m = a^T z`` is predicted from its own past only,
``m(t) ~ b_1 m(t-delta) + ... + b_p m(t-p delta)``. The joint problem in
``(a, b)`` is not tractable globally; it is approached by alternating the
two exact conditional minimisers (an eigenvector problem for ``a``, a
least-squares problem for ``b``). Further components are obtained by
deflation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg import null_space

from .ar_model import fit_full
from .exceptions import InsufficientDataError
from .preprocessing import DEFAULT_POLICY, ThresholdPolicy, thresholded_inverse
from .solver import PfaConfig, solve_relaxation
from .timeseries import as_array

__all__ = [
    "AlternationState",
    "Component",
    "init_b",
    "residual_matrix",
    "single_error",
    "update_a",
    "update_b",
    "extract_alternating",
    "extract_deflated",
    "fixed_point_residual",
]

logger = logging.getLogger(__name__)

AMBIGUITY_TOL = 1e-9


@dataclass(frozen=True)
class AlternationState:
    """Result of the alternating optimisation.

    ``errors`` traces the objective after every half-step (update of ``a``,
    then of ``b``); it is nonincreasing up to rounding.
    ``ambiguous`` is set when the two smallest eigenvalues of the final
    ``a``-problem coincide, i.e. the returned direction is one of several
    equally good ones.
    """

    a: np.ndarray
    b: np.ndarray
    error: float
    iteration: int
    converged: bool = False
    ambiguous: bool = False
    errors: tuple = ()


class Component(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    error: float


def _lags(z: np.ndarray, p: int, delta: int):
    T = z.shape[1]
    start = p * delta
    if T <= start:
        raise InsufficientDataError("insufficient samples: T=%d <= p*delta=%d" % (T, start))
    L = np.stack([z[:, start - i * delta:T - i * delta] for i in range(1, p + 1)])
    return z[:, start:], L


def init_b(z, p: int, delta: int = 1, policy: ThresholdPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Coefficients of the best common scalar predictor for all components of ``z``."""
    target, L = _lags(as_array(z), p, delta)
    N = target.shape[1]
    g = np.einsum("jt,ijt->i", target, L) / N
    G = np.einsum("ijt,ljt->il", L, L) / N
    return thresholded_inverse(G, policy) @ g


def residual_matrix(z, b, p: int, delta: int = 1) -> np.ndarray:
    """Covariance of ``z(t) - sum_i b_i z(t - i delta)``; ``a^T M a`` is the error of ``a``."""
    target, L = _lags(as_array(z), p, delta)
    R = target - np.tensordot(np.asarray(b, dtype=float), L, axes=1)
    M = R @ R.T / R.shape[1]
    return 0.5 * (M + M.T)


def single_error(z, a, b, p: int, delta: int = 1) -> float:
    a = np.asarray(a, dtype=float)
    return float(a @ residual_matrix(z, b, p, delta) @ a)


def _second_moment(z: np.ndarray) -> np.ndarray:
    C = z @ z.T / z.shape[1]
    return 0.5 * (C + C.T)


def _fix_sign(a: np.ndarray) -> np.ndarray:
    i = np.argmax(np.abs(a))
    return -a if a[i] < 0 else a


def _smallest_pair(z, b, p, delta):
    z = as_array(z)
    M = residual_matrix(z, b, p, delta)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite residual matrix")
    vals, vecs = scipy.linalg.eigh(M, _second_moment(z))
    return vals, vecs


def update_a(z, b, p: int, delta: int = 1) -> np.ndarray:
    """Unit-variance direction minimising the error for fixed ``b``.

    Solves the eigenproblem of the residual matrix relative to ``<z z^T>``,
    so ``a^T <z z^T> a = 1``; for sphered ``z`` this is the unit vector.
    """
    vals, vecs = _smallest_pair(z, b, p, delta)
    if vals.size > 1 and vals[1] - vals[0] <= AMBIGUITY_TOL * max(np.abs(vals).max(), np.finfo(float).tiny):
        logger.warning("smallest eigenvalue is degenerate; choosing the first eigenvector")
    return _fix_sign(vecs[:, 0])


def update_b(z, a, p: int, delta: int = 1, policy: ThresholdPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Least-squares AR coefficients of the component ``a^T z``."""
    m = np.asarray(a, dtype=float) @ as_array(z)
    return fit_full(m, p, delta, policy).coefficients[0]


def extract_alternating(z, p: int, delta: int = 1, max_iter: int = 500, tol: float = 1e-9,
                        policy: ThresholdPolicy = DEFAULT_POLICY) -> AlternationState:
    """Alternate ``a`` and ``b`` updates from :func:`init_b` until the error settles.

    Stops when one half-step lowers the error by less than ``tol`` relative
    to its previous value (or the error reaches rounding level), or after
    ``max_iter`` rounds. The result may be a local optimum.
    """
    z = as_array(z)
    b = init_b(z, p, delta, policy)
    errors = []
    prev = None
    converged = False
    a = None
    iteration = 0
    for iteration in range(1, max_iter + 1):
        a = update_a(z, b, p, delta)
        err_a = single_error(z, a, b, p, delta)
        b = update_b(z, a, p, delta, policy)
        err_b = single_error(z, a, b, p, delta)
        errors += [err_a, err_b]
        steps = [(err_a, err_b)] if prev is None else [(prev, err_a), (err_a, err_b)]
        if any(abs(before - after) <= tol * max(before, 0.0) + 1e-15 for before, after in steps):
            converged = True
            break
        prev = err_b
    vals, _ = _smallest_pair(z, b, p, delta)
    ambiguous = bool(vals.size > 1 and vals[1] - vals[0] <= AMBIGUITY_TOL * max(np.abs(vals).max(), np.finfo(float).tiny))
    if not converged:
        logger.warning("alternating extraction did not converge in %d iterations", max_iter)
    return AlternationState(a=a, b=b, error=errors[-1], iteration=iteration,
                            converged=converged, ambiguous=ambiguous, errors=tuple(errors))


def fixed_point_residual(z, state: AlternationState, p: int, delta: int = 1,
                         policy: ThresholdPolicy = DEFAULT_POLICY) -> tuple[float, float]:
    """Angle between ``state.a`` and ``update_a(state.b)``, and max deviation of ``b`` from ``update_b(state.a)``."""
    a_new = update_a(z, state.b, p, delta)
    cos = abs(a_new @ state.a) / (np.linalg.norm(a_new) * np.linalg.norm(state.a))
    angle = float(np.arccos(min(1.0, cos)))
    b_new = update_b(z, state.a, p, delta, policy)
    return angle, float(np.abs(b_new - state.b).max())


def extract_deflated(z, p: int, count: int, mode: str = "pfa-r1", delta: int = 1,
                     policy: ThresholdPolicy = DEFAULT_POLICY, max_iter: int = 500,
                     tol: float = 1e-9) -> list[Component]:
    """Extract ``count`` single components one after another.

    After each extraction the signal is restricted to the orthogonal
    complement of the found direction (for sphered input: the uncorrelated
    subspace) and the next component is sought there.

    Parameters
    ----------
    mode : {'pfa-r1', 'alternating'}
        ``'pfa-r1'`` solves the relaxed PFA problem with ``r = 1`` each round;
        ``'alternating'`` uses :func:`extract_alternating`.
    """
    z = as_array(z)
    n = z.shape[0]
    if mode not in ("pfa-r1", "alternating"):
        raise ValueError("unknown mode %r" % (mode,))
    if not 1 <= count <= n:
        raise ValueError("count=%d exceeds the remaining rank %d" % (count, n))
    basis = np.eye(n)
    components = []
    for _ in range(count):
        zc = basis.T @ z
        if mode == "alternating":
            state = extract_alternating(zc, p, delta, max_iter=max_iter, tol=tol, policy=policy)
            a_loc, b, err = state.a, state.b, state.error
        else:
            res = solve_relaxation(zc, PfaConfig(r=1, p=p, delta=delta, policy=policy))
            a_loc, b, err = res.A[:, 0], res.refitted.coefficients[0], res.achieved_error
        a_loc = a_loc / np.linalg.norm(a_loc)
        components.append(Component(a=basis @ a_loc, b=np.asarray(b), error=float(err)))
        if zc.shape[0] > 1:
            basis = basis @ null_space(a_loc[np.newaxis, :])
    return components
