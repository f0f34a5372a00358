"""Channel propagation, noisy observation, wrapping and observation files."""

import math

import numpy as np
import pytest

from ddsense import (ConfigurationError, GridConfig, ModulationConfig,
                     Observation, PathSet, build_mask, generate_frame, observe,
                     propagate, vectorize, wrap_delay, wrap_doppler)
from ddsense.channel import (load_observation, observation_from_text,
                             observation_to_text, save_observation)
from ddsense.errors import FormatError
from conftest import make_observation


def _frame(seed=0, eta=0.45, beta=0.9, n_f=16, n_t=10):
    mask = build_mask(GridConfig(n_subcarriers=n_f, n_symbols=n_t, occupancy=0.5,
                                 pilot_spacing_freq=4, pilot_spacing_time=2, seed=seed))
    return generate_frame(mask, ModulationConfig(16), eta, beta, seed=seed + 1)


def test_pathset_validation():
    with pytest.raises(ConfigurationError):
        PathSet(taus=[0.0], alphas=[0.1], gammas=[1.0])
    with pytest.raises(ConfigurationError):
        PathSet(taus=[0.5], alphas=[-0.5], gammas=[1.0])
    with pytest.raises(ConfigurationError):
        PathSet(taus=[0.5, 0.6], alphas=[0.1], gammas=[1.0, 1.0])
    empty = PathSet.empty()
    assert empty.n_paths == 0


def test_wrap_helpers():
    assert wrap_delay(1.0) == 1.0
    assert wrap_delay(0.0) == 1.0
    assert wrap_delay(1.25) == pytest.approx(0.25)
    assert wrap_delay(-0.25) == pytest.approx(0.75)
    assert wrap_doppler(0.5) == 0.5
    assert wrap_doppler(-0.5) == 0.5
    assert wrap_doppler(0.75) == pytest.approx(-0.25)
    np.testing.assert_allclose(wrap_doppler(np.array([1.1, -1.1])), [0.1, -0.1], atol=1e-12)


def test_propagate_no_paths_gives_zero_grid():
    frame = _frame()
    out = propagate(frame, PathSet.empty())
    np.testing.assert_array_equal(out, np.zeros_like(out))


def test_propagate_zero_delay_alias_scales_the_frame():
    # tau = 1 with alpha = 0 is the all-ones steering, so the received grid is
    # gamma times the transmit grid
    frame = _frame()
    gamma = 0.8 - 0.3j
    out = propagate(frame, PathSet(taus=[1.0], alphas=[0.0], gammas=[gamma]))
    np.testing.assert_allclose(out, gamma * frame.grid, atol=1e-12)


def test_propagate_is_linear_in_paths():
    frame = _frame(seed=3)
    rng = np.random.default_rng(0)
    taus = rng.uniform(0.1, 1.0, size=4)
    alphas = rng.uniform(-0.4, 0.5, size=4)
    gammas = rng.normal(size=4) + 1j * rng.normal(size=4)
    whole = propagate(frame, PathSet(taus=taus, alphas=alphas, gammas=gammas))
    first = propagate(frame, PathSet(taus=taus[:2], alphas=alphas[:2], gammas=gammas[:2]))
    second = propagate(frame, PathSet(taus=taus[2:], alphas=alphas[2:], gammas=gammas[2:]))
    np.testing.assert_allclose(whole, first + second, atol=1e-12)


def test_infinite_snr_is_noiseless():
    frame = _frame(seed=4)
    paths = PathSet(taus=[0.3], alphas=[0.2], gammas=[1.0])
    obs = observe(frame, paths, snr_db=math.inf, seed=0)
    np.testing.assert_array_equal(obs.y, vectorize(frame.mask, propagate(frame, paths)))
    np.testing.assert_array_equal(obs.x_hat, vectorize(frame.mask, frame.grid))
    assert obs.noise_var == 1.0


def test_snr_definition_and_empirical_noise_variance():
    # sample-variance oracle over >= 1e5 REs
    mask = build_mask(GridConfig(n_subcarriers=256, n_symbols=400, occupancy=1.0,
                                 pilot_spacing_freq=8, pilot_spacing_time=8, seed=0))
    frame = generate_frame(mask, ModulationConfig(4), eta=0.6, beta=0.6, seed=1)
    paths = PathSet(taus=[0.4], alphas=[0.1], gammas=[1.0])
    snr_db = 7.0
    obs = observe(frame, paths, snr_db, seed=2)
    clean = vectorize(frame.mask, propagate(frame, paths))
    expected_var = np.mean(np.abs(clean) ** 2) / 10 ** (snr_db / 10)
    assert obs.noise_var == pytest.approx(expected_var, rel=1e-12)
    noise = obs.y - clean
    powers = np.abs(noise) ** 2
    tol = 3 * powers.std() / math.sqrt(powers.size)
    assert abs(powers.mean() - obs.noise_var) < tol


def test_same_seed_same_noise():
    frame = _frame(seed=5)
    paths = PathSet(taus=[0.3], alphas=[0.2], gammas=[1.0])
    o1 = observe(frame, paths, 10.0, seed=42)
    o2 = observe(frame, paths, 10.0, seed=42)
    np.testing.assert_array_equal(o1.y, o2.y)
    assert observe(frame, paths, 10.0, seed=43).y[0] != o1.y[0]


def test_zero_signal_with_finite_snr_is_an_error():
    frame = _frame(seed=6)
    with pytest.raises(ConfigurationError):
        observe(frame, PathSet.empty(), snr_db=10.0, seed=0)


def test_snr_invariant_to_joint_complex_scaling():
    # scaling the transmit grid and the weights by c multiplies signal power
    # by |c|^4 and the recorded noise variance follows
    frame = _frame(seed=7)
    paths = PathSet(taus=[0.3], alphas=[0.2], gammas=[0.5 + 0.5j])
    obs1 = observe(frame, paths, 12.0, seed=1)
    c = 1.7 - 0.4j
    frame_scaled = _frame(seed=7)
    frame_scaled.grid = frame_scaled.grid * c
    paths_scaled = PathSet(taus=[0.3], alphas=[0.2], gammas=[(0.5 + 0.5j) * c])
    obs2 = observe(frame_scaled, paths_scaled, 12.0, seed=1)
    assert obs2.noise_var == pytest.approx(abs(c) ** 4 * obs1.noise_var, rel=1e-12)


def test_noise_only_on_used_res():
    frame = _frame(seed=8)
    paths = PathSet(taus=[0.3], alphas=[0.2], gammas=[1.0])
    obs = observe(frame, paths, 0.0, seed=3)
    assert obs.y.shape == (frame.mask.n_used,)


def test_observation_validation():
    frame = _frame(seed=9)
    n = frame.mask.n_used
    with pytest.raises(ConfigurationError):
        Observation(y=np.zeros(n - 1), x_hat=np.zeros(n), mask=frame.mask, noise_var=1.0)
    with pytest.raises(ConfigurationError):
        Observation(y=np.zeros(n), x_hat=np.zeros(n), mask=frame.mask, noise_var=0.0)


def test_observation_text_round_trip_is_bit_exact(tmp_path):
    _, obs = make_observation(PathSet(taus=[0.31], alphas=[0.12], gammas=[1.0 - 0.2j]),
                              snr_db=5.0)
    path = tmp_path / "obs.txt"
    save_observation(obs, path)
    loaded = load_observation(path, obs.mask)
    np.testing.assert_array_equal(loaded.y, obs.y)
    np.testing.assert_array_equal(loaded.x_hat, obs.x_hat)
    assert loaded.noise_var == obs.noise_var
    assert observation_to_text(loaded) == observation_to_text(obs)


def test_observation_text_rejects_mismatched_mask():
    _, obs = make_observation(PathSet(taus=[0.31], alphas=[0.12], gammas=[1.0]),
                              snr_db=5.0)
    other_mask = build_mask(GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=99))
    text = observation_to_text(obs)
    with pytest.raises(FormatError):
        observation_from_text(text, other_mask)
