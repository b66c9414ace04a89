import numpy as np
import pytest
from conftest import zero_mean_sine
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import subspace_angles

from pfa.ar_model import fit_full
from pfa.orthogonal import random_orthogonal
from pfa.single_component import (extract_alternating, extract_deflated, fixed_point_residual,
                                  init_b, residual_matrix, single_error, update_a, update_b)


def sine_in_noise(rng, noise_dims=5, T=1000, omega=0.3):
    """Unit-variance AR(2)-exact sine next to white noise, orthogonally mixed."""
    x = np.vstack([np.sqrt(2) * zero_mean_sine(omega, T), rng.standard_normal((noise_dims, T))])
    Q = random_orthogonal(noise_dims + 1, rng)
    return Q @ x, Q[:, 0]


def _monotone(errors, slack=1e-10):
    return all(b <= a + slack for a, b in zip(errors, errors[1:]))


def test_init_b_examples(rng):
    z = np.sqrt(2) * zero_mean_sine(0.2, 500)[None, :]
    np.testing.assert_allclose(init_b(z, 2), [2 * np.cos(0.2), -1.0], atol=1e-8)
    T = 10000
    assert abs(init_b(rng.standard_normal((3, T)), 1)[0]) < 4 / np.sqrt(3 * T)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(1, 3), st.integers(0, 2**31))
def test_init_b_rotation_invariant(n, p, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 100)).cumsum(axis=1) * 0.1
    A = random_orthogonal(n, rng)
    np.testing.assert_allclose(init_b(A.T @ z, p), init_b(z, p), rtol=1e-8, atol=1e-10)


def test_update_a_recovers_sine(rng):
    z, direction = sine_in_noise(rng, noise_dims=1)
    a = update_a(z, [2 * np.cos(0.3), -1.0], 2)
    assert abs(a @ direction) / np.linalg.norm(a) > 1 - 1e-6
    idx = np.argmax(np.abs(a))
    assert a[idx] > 0
    C = z @ z.T / z.shape[1]
    assert abs(a @ C @ a - 1.0) <= 1e-8


def test_update_a_zero_b(rng):
    x = rng.standard_normal((3, 400))
    z = x - x.mean(axis=1, keepdims=True)
    z = np.linalg.cholesky(np.linalg.inv(z @ z.T / 400)).T @ z
    M = residual_matrix(z, np.zeros(2), 2)
    np.testing.assert_allclose(M, z[:, 2:] @ z[:, 2:].T / 398)
    a = update_a(z, np.zeros(2), 2)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-8


def test_update_b_examples(rng):
    z, direction = sine_in_noise(rng, noise_dims=2)
    np.testing.assert_allclose(update_b(z, direction, 2), [2 * np.cos(0.3), -1.0], atol=1e-6)
    y = rng.standard_normal((1, 200)).cumsum(axis=1)
    np.testing.assert_allclose(update_b(y, [1.0], 3), fit_full(y, 3).coefficients[0])


def test_update_b_is_optimal(rng):
    z = rng.standard_normal((3, 300)).cumsum(axis=1) * 0.1
    a = random_orthogonal(3, rng)[:, 0]
    b = update_b(z, a, 2)
    best = single_error(z, a, b, 2)
    for _ in range(100):
        assert single_error(z, a, b + 1e-3 * rng.standard_normal(2), 2) >= best


def test_alternating_finds_exact_sine(rng):
    z, direction = sine_in_noise(rng)
    state = extract_alternating(z, 2)
    assert state.error <= 1e-6
    assert state.iteration <= 200 and state.converged
    assert _monotone(state.errors)
    assert abs(state.a @ direction) / np.linalg.norm(state.a) > 1 - 1e-6
    angle, bdiff = fixed_point_residual(z, state, 2)
    assert angle <= 1e-6 and bdiff <= 1e-8


def test_alternating_one_dimensional(rng):
    z = rng.standard_normal((1, 200))
    z /= np.sqrt(np.mean(z ** 2))
    state = extract_alternating(z, 2)
    assert state.iteration == 1 and state.converged
    np.testing.assert_allclose(state.a, [1.0])


def test_alternating_symmetric_instance_flagged(rng):
    t = np.arange(1000)
    omega = 0.25
    # sin and cos of one frequency: every direction in their plane is equally predictable
    pair = np.sqrt(2) * np.vstack([np.sin(omega * t), np.cos(omega * t)])
    z = np.vstack([pair, rng.standard_normal((2, 1000))])
    z = random_orthogonal(4, rng) @ z
    state = extract_alternating(z, 2)
    assert _monotone(state.errors)
    assert state.ambiguous


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 2**31))
def test_alternation_monotone(n, p, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 300))
    for j in range(n):
        z[j] = np.convolve(z[j], rng.uniform(0, 1, 4), mode="same")
    state = extract_alternating(z, p, max_iter=100)
    assert _monotone(state.errors)


def test_deflated_pfa_r1(rng):
    T = 1000
    x = np.vstack([np.sqrt(2) * zero_mean_sine(0.1, T), np.sqrt(2) * zero_mean_sine(0.7, T),
                   rng.standard_normal(T)])
    Q = random_orthogonal(3, rng)
    z = Q @ x
    # both sines are exact, so the first direction is any point of their plane;
    # such a mixture is AR(4), hence p=4 for the second round to stay exact
    comps = extract_deflated(z, 4, count=2)
    found = np.column_stack([c.a for c in comps])
    assert subspace_angles(found, Q[:, :2]).max() <= 1e-3
    np.testing.assert_allclose(found.T @ found, np.eye(2), atol=1e-8)


def test_deflated_full_basis(rng):
    z = rng.standard_normal((4, 300)).cumsum(axis=1) * 0.1
    for mode in ("pfa-r1", "alternating"):
        comps = extract_deflated(z, 2, count=4, mode=mode)
        basis = np.column_stack([c.a for c in comps])
        np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-8)


def test_deflation_increases_error(rng):
    z, _ = sine_in_noise(rng, noise_dims=3)
    comps = extract_deflated(z, 2, count=2, mode="alternating")
    assert comps[0].error <= 1e-6 < comps[1].error


def test_modes_agree_on_easy_instance(rng):
    z, _ = sine_in_noise(rng, noise_dims=4)
    a_alt = extract_deflated(z, 2, count=1, mode="alternating")[0].a
    a_pfa = extract_deflated(z, 2, count=1, mode="pfa-r1")[0].a
    assert np.arccos(min(1.0, abs(a_alt @ a_pfa))) <= 1e-3


def test_deflated_errors(rng):
    z = rng.standard_normal((2, 50))
    with pytest.raises(ValueError):
        extract_deflated(z, 1, count=3)
    with pytest.raises(ValueError):
        extract_deflated(z, 1, count=1, mode="greedy")
