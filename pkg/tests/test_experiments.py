import numpy as np
import pytest

from pfa.experiments import (DEFAULT_COMPONENTS, EmbeddingSpec, NoisySineSpec, embed_and_mix,
                             generate_base, lower_bound, run_realization, run_seeds, run_sweep)
from pfa.preprocessing import apply_sphering, fit_sphering
from pfa.solver import PfaConfig, solve_relaxation

CONFIG = PfaConfig(r=2, p=2)


def test_signal_settings_validation():
    with pytest.raises(ValueError):
        NoisySineSpec(samples=0)
    with pytest.raises(ValueError):
        NoisySineSpec(components=((np.inf, 1.0),))
    with pytest.raises(ValueError):
        EmbeddingSpec(noise_dims=-1)


def test_pure_sines_without_noise():
    spec = NoisySineSpec(components=((0.1, 0.0), (0.3, 0.0)), samples=50)
    t = np.arange(50)
    np.testing.assert_array_equal(generate_base(spec), np.vstack([np.sin(0.1 * t), np.sin(0.3 * t)]))


def test_base_is_deterministic_and_prefix_stable():
    a = generate_base(NoisySineSpec(samples=1000))
    np.testing.assert_array_equal(a, generate_base(NoisySineSpec(samples=1000)))
    np.testing.assert_array_equal(a, generate_base(NoisySineSpec(samples=2000))[:, :1000])
    assert not np.array_equal(a, generate_base(NoisySineSpec(samples=1000, seed=1)))


def test_base_variance():
    x = generate_base(NoisySineSpec(samples=1000))
    expected = [0.5 + amp ** 2 for _, amp in DEFAULT_COMPONENTS]
    np.testing.assert_allclose(x.var(axis=1), expected, rtol=0.1)


def test_embed_identity_hook():
    base = generate_base(NoisySineSpec(samples=100))
    np.testing.assert_array_equal(embed_and_mix(base, EmbeddingSpec(0, mix=False)), base)


def test_mixing_properties():
    base = generate_base(NoisySineSpec(samples=300))
    mixed, Q = embed_and_mix(base, EmbeddingSpec(7, noise_seed=3, mixing_seed=4), return_mixing=True)
    assert mixed.shape == (10, 300)
    np.testing.assert_allclose(Q.T @ Q, np.eye(10), atol=1e-12)
    unmixed = embed_and_mix(base, EmbeddingSpec(7, noise_seed=3, mix=False))
    c = lambda x: np.cov(x, bias=True)
    assert abs(np.trace(c(mixed)) - np.trace(c(unmixed))) <= 1e-9 * np.trace(c(unmixed))
    np.testing.assert_allclose(Q.T @ mixed, unmixed, atol=1e-12)


def test_run_seeds_distinct():
    seeds = {run_seeds(0, T, d, run) for T in (1000, 2000) for d in (0, 10) for run in range(20)}
    assert len(seeds) == 80
    assert run_seeds(0, 1000, 10, 3) == run_seeds(0, 1000, 10, 3)
    assert run_seeds(0, 1000, 10, 3) != run_seeds(1, 1000, 10, 3)


def test_single_cell_matches_direct_solve():
    spec = NoisySineSpec(samples=500)
    (rec,) = run_sweep(spec, [0], [0], runs=1, samples=500, config=CONFIG)
    noise_seed, mixing_seed = run_seeds(0, 500, 0, 0)
    x = embed_and_mix(generate_base(spec), EmbeddingSpec(0, noise_seed, mixing_seed))
    z = apply_sphering(fit_sphering(x), x)
    assert rec.mean_err == solve_relaxation(z, CONFIG).achieved_error
    assert rec.runs == 1 and rec.std_err == 0.0
    assert rec.lower_bound == lower_bound(spec, CONFIG)


def test_realization_shares_data_across_k():
    spec = NoisySineSpec(samples=400)
    errs = run_realization(spec, 5, 0, 0, [0, 2, 0], CONFIG)
    assert errs[0] == errs[2]


def test_sweep_order_and_jobs_independent():
    spec = NoisySineSpec()
    kw = dict(k_values=[0, 2], noise_dims=[0, 5], runs=3, samples=[300, 400], config=CONFIG, master_seed=7)
    serial = run_sweep(spec, jobs=1, **kw)
    parallel = run_sweep(spec, jobs=3, **kw)
    assert serial == parallel
    assert [(r.samples, r.noise_dim, r.k) for r in serial] == [
        (T, d, k) for T in (300, 400) for d in (0, 5) for k in (0, 2)]
    with pytest.raises(ValueError):
        run_sweep(spec, [0], [0], runs=0, samples=100, config=CONFIG)


def test_below_bound_flag():
    (rec,) = run_sweep(NoisySineSpec(), [0], [30], runs=2, samples=300, config=CONFIG)
    assert rec.below_bound == (rec.mean_err < rec.lower_bound)


@pytest.mark.slow
def test_k0_error_nondecreasing_in_noise_dim():
    recs = run_sweep(NoisySineSpec(), [0], range(0, 51, 10), runs=30, samples=1000, config=CONFIG, jobs=4)
    means = [r.mean_err for r in recs]
    assert all(b >= a for a, b in zip(means, means[1:])), means


@pytest.mark.slow
def test_k4_beats_k0_at_2000_samples():
    recs = run_sweep(NoisySineSpec(), [0, 4], [100], runs=30, samples=2000, config=CONFIG, jobs=4)
    assert recs[1].mean_err < recs[0].mean_err
