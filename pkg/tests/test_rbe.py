import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from camwake import rbe
from camwake.rbe import (FilterProcessParams, ParticleDump, ParticleSet, effective_sample_size,
                         init_particles, posterior_summary, resample_if_needed, systematic_resample, update)
from camwake.world import RssiObservation


def rng(seed=0):
    return np.random.default_rng(seed)


def test_init_uniform_weights_and_spread():
    pset = init_particles(100, -40.0, rng())
    assert np.allclose(pset.weights, 0.01)
    big = init_particles(100_000, -40.0, rng(1))
    assert abs(big.particles.mean() + 40.0) <= 0.3
    assert big.particles.std() == pytest.approx(9.0, rel=0.02)


def test_init_from_range():
    pset = init_particles(1000, (-80.0, -20.0), rng())
    assert pset.particles.min() >= -80 and pset.particles.max() <= -20


def test_init_rejects_empty():
    with pytest.raises(ValueError):
        init_particles(0, -40.0, rng())


def test_predict_zero_noise_is_identity():
    pset = init_particles(10, -40.0, rng())
    moved = rbe.predict(pset, FilterProcessParams(guessed_noise_std=0.0), rng())
    assert np.array_equal(moved.particles, pset.particles)


def test_random_walk_spread():
    pset = ParticleSet(np.zeros(20_000), np.full(20_000, 1 / 20_000))
    params = FilterProcessParams(guessed_noise_std=1.0)
    g = rng(2)
    for _ in range(100):
        pset = rbe.predict(pset, params, g)
    assert 9.0 <= pset.particles.std() <= 11.0


def test_mapped_distance_walk_keeps_range():
    pset = init_particles(500, -40.0, rng())
    params = FilterProcessParams(model=rbe.MAPPED_DISTANCE_WALK)
    moved = rbe.predict(pset, params, rng(3))
    # d >= d_min = 0.01 m bounds the RSSI above by -30 - 20 log10(0.01) = 10 dBm
    assert np.all(moved.particles <= 10.0 + 1e-9)
    assert np.all(np.isfinite(moved.particles))


def test_filter_params_validation():
    with pytest.raises(ValueError):
        FilterProcessParams(guessed_noise_std=-0.1)
    with pytest.raises(ValueError):
        FilterProcessParams(model="kalman")


def test_empty_observation_is_noop():
    pset = init_particles(10, -40.0, rng())
    assert update(pset, RssiObservation(None, 0.05)) is pset
    assert update(pset, None) is pset


def test_update_weight_ratio():
    pset = ParticleSet(np.array([-40.0, -60.0]), np.array([0.5, 0.5]))
    out = update(pset, -40.0, 3.0)
    assert np.log(out.weights[0] / out.weights[1]) == pytest.approx(200 / 9)
    assert out.weights.sum() == pytest.approx(1.0)


def test_update_far_observation_does_not_underflow():
    pset = ParticleSet(np.array([-40.0, -41.0]), np.array([0.5, 0.5]))
    out = update(pset, 400.0, 3.0)
    assert np.all(np.isfinite(out.weights))
    assert out.weights[0] > out.weights[1]


def test_update_sharp_likelihood_picks_nearest():
    pset = ParticleSet(np.array([-50.0, -44.0, -41.0, -30.0]), np.full(4, 0.25))
    out = update(pset, -42.0, 1e-3)
    assert out.weights[2] == pytest.approx(1.0)


@pytest.mark.parametrize("weights, expected", [
    ([0.25] * 4, 4.0), ([1, 0, 0, 0], 1.0), ([0.5, 0.5, 0, 0], 2.0),
])
def test_effective_sample_size(weights, expected):
    assert effective_sample_size(weights) == pytest.approx(expected)


def test_resample_threshold_is_strict():
    pset = ParticleSet(np.arange(4.0), np.array([0.5, 0.5, 0.0, 0.0]))
    assert resample_if_needed(pset, 0.5, rng()) is pset
    out = resample_if_needed(ParticleSet(np.arange(4.0), np.array([0.7, 0.3, 0.0, 0.0])), 0.5, rng())
    assert np.allclose(out.weights, 0.25)
    assert set(out.particles) <= {0.0, 1.0}


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50), st.integers(0, 2**32 - 1))
def test_systematic_resample_counts(raw, seed):
    w = np.asarray(raw) + 1e-3
    w /= w.sum()
    idx = systematic_resample(w, rng(seed))
    n = len(w)
    counts = np.bincount(idx, minlength=n)
    assert counts.sum() == n
    assert np.all(np.abs(counts - n * w) < 1 + 1e-9)


def test_posterior_summary():
    mean, var = posterior_summary(ParticleSet(np.array([-40.0, -50.0]), np.array([0.5, 0.5])))
    assert mean == pytest.approx(-45.0)
    assert var == pytest.approx(25.0)


@given(st.lists(st.floats(-100, 0), min_size=1, max_size=30), st.floats(-100, 0))
def test_update_keeps_weights_normalized(particles, obs):
    n = len(particles)
    out = update(ParticleSet(np.asarray(particles), np.full(n, 1 / n)), obs)
    assert out.weights.sum() == pytest.approx(1.0)
    assert np.all(out.weights >= 0)


def test_particle_dump(tmp_path):
    pset = init_particles(3, -40.0, rng())
    with ParticleDump(tmp_path / "p.csv") as dump:
        dump.write(0.1, pset)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "t,particle,rssi_dbm,weight"
    assert len(lines) == 4
