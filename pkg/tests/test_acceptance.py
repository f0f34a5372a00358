"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The Monte Carlo sweep
behind criteria 2 and 3 (7 SNR points x 500 trials x 2 estimators) runs once
as a session fixture; expect a few minutes of wall time.
"""

import math

import numpy as np
import pytest

from ddsense import (EstimatorConfig, Observation, PathSet, SamplingAxes,
                     ambiguity_function, build_mask, estimate,
                     fisher_information, jacobian, spreading_function, steering)
from ddsense.baselines import ambiguity_axes, dft_axes, dft_spreading, zf_channel
from ddsense.channel import save_observation
from ddsense.cli import main
from ddsense.config import default_config
from ddsense.estimator import coarse_grids, spreading_surface
from ddsense.grid import GridConfig, save_mask
from ddsense.harness import build_scenario, match_paths, run_campaign
from ddsense.model import steering_matrix
from conftest import make_observation

CAMPAIGN_SEED = 2026
CAMPAIGN_TRIALS = 500
HIGH_SNR = (20.0, 25.0, 30.0)


def _report(num, name):
    print(f"\nACCEPTANCE {num} ({name}): PASS")


@pytest.fixture(scope="session")
def reference_campaign():
    """Fig. 3 style sweep at desk scale: defaults, 7 SNR points, 500 trials."""
    cfg = default_config({"n_trials": CAMPAIGN_TRIALS, "seed": CAMPAIGN_SEED})
    return cfg, run_campaign(cfg, n_jobs=2)


def test_criterion_1_noiseless_exactness():
    # 3 well-separated paths on the reference grid, no noise: parameters to
    # 1e-8 and residual energy below 1e-14 of the observation energy
    import time

    cfg = default_config()
    for trial in range(5):
        scenario = build_scenario(cfg, math.inf, 0, trial)
        start = time.time()
        report = estimate(scenario.obs, cfg.estimator)
        elapsed = time.time() - start
        sq_tau, sq_alpha = match_paths(scenario.paths, report.paths)
        assert np.sqrt(sq_tau).max() < 1e-8
        assert np.sqrt(sq_alpha).max() < 1e-8
        y_energy = float(np.vdot(scenario.obs.y, scenario.obs.y).real)
        assert report.residual_energy[-1] < 1e-14 * y_energy
        assert elapsed < 10.0
    _report(1, "noiseless exactness")


def test_criterion_2_crb_attainment(reference_campaign):
    cfg, table = reference_campaign
    for param in ("tau", "alpha"):
        curve = table.select("weighted", param)
        assert set(curve) == set(cfg.snr_points_db)
        for snr, row in curve.items():
            assert row.n_fail == 0, f"failures at {snr} dB"
            # Monte Carlo guard: three standard errors of the MSE estimate
            # (squared Gaussian errors have std sqrt(2) times their mean)
            n_err = row.n_ok * 3
            stderr = row.mse * math.sqrt(2.0 / n_err)
            assert row.mse >= row.crb - 3 * stderr, \
                f"MSE below CRB at {snr} dB ({param}): {row.mse} < {row.crb}"
            if snr in HIGH_SNR:
                assert row.mse / row.crb < 2.0, \
                    f"bound not attained at {snr} dB ({param}): ratio {row.mse / row.crb}"
            if snr == 10.0:
                # bound attainment already holds in the moderate-SNR regime
                # (within 3 dB of the bound)
                assert row.mse / row.crb < 2.0
    _report(2, "CRB attainment at high SNR, bound validity everywhere")


def test_criterion_3_weighted_beats_unweighted(reference_campaign):
    cfg, table = reference_campaign
    for param in ("tau", "alpha"):
        weighted = table.select("weighted", param)
        unweighted = table.select("unweighted", param)
        for snr in cfg.snr_points_db:
            assert unweighted[snr].mse >= weighted[snr].mse, \
                f"ordering violated at {snr} dB ({param})"
            if snr <= 10.0:
                assert unweighted[snr].mse > 1.5 * weighted[snr].mse, \
                    f"no strict gap at {snr} dB ({param})"
    _report(3, "weighted estimator dominates the unweighted ZF variant")


def test_criterion_4_dft_equivalence():
    # full grid, all-ones transmit estimate: the weighted correlation sampled
    # at the grid points equals the 2-D DFT spreading of the ZF channel
    n_f, n_t = 16, 10
    mask = build_mask(GridConfig(n_subcarriers=n_f, n_symbols=n_t, occupancy=1.0,
                                 pilot_spacing_freq=n_f, pilot_spacing_time=n_t, seed=0))
    rng = np.random.default_rng(41)
    y = rng.normal(size=mask.n_used) + 1j * rng.normal(size=mask.n_used)
    obs = Observation(y=y, x_hat=np.ones(mask.n_used, dtype=complex), mask=mask,
                      noise_var=1.0)
    surface = dft_spreading(zf_channel(obs))
    taus, alphas = dft_axes((n_f, n_t))
    scale = np.abs(surface).max()
    worst = 0.0
    for i in range(n_f):
        for j in range(n_t):
            direct = spreading_function(obs, taus[i], alphas[j])
            worst = max(worst, abs(direct - surface[i, j]) / scale)
    assert worst < 1e-10
    _report(4, f"DFT equivalence on full grids (worst rel dev {worst:.1e})")


def test_criterion_5_jacobian_finite_differences():
    mask = build_mask(GridConfig(n_subcarriers=16, n_symbols=10, occupancy=0.6,
                                 pilot_spacing_freq=4, pilot_spacing_time=3, seed=2))
    axes = SamplingAxes.for_mask(mask)
    rng = np.random.default_rng(17)
    step = 1e-6
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 4))
        paths = PathSet(taus=rng.uniform(0.05, 0.95, p),
                        alphas=rng.uniform(-0.45, 0.45, p),
                        gammas=rng.normal(size=p) + 1j * rng.normal(size=p))
        x_hat = rng.normal(size=mask.n_used) + 1j * rng.normal(size=mask.n_used)
        analytic = jacobian(paths, x_hat, mask, axes)
        base = np.concatenate([paths.taus, paths.alphas,
                               paths.gammas.real, paths.gammas.imag])

        def model_of(v):
            s = np.zeros(mask.n_used, dtype=complex)
            for k in range(p):
                s += (v[2 * p + k] + 1j * v[3 * p + k]) * steering(v[k], v[p + k], mask, axes)
            return x_hat * s

        scale = np.abs(analytic).max()
        for col in range(4 * p):
            plus = base.copy()
            minus = base.copy()
            plus[col] += step
            minus[col] -= step
            numeric = (model_of(plus) - model_of(minus)) / (2 * step)
            dev = np.abs(analytic[:, col] - numeric).max() / scale
            worst = max(worst, dev)
    assert worst < 1e-5
    _report(5, f"analytic Jacobian vs central differences (worst rel dev {worst:.1e})")


def test_criterion_6_blue_variance_matches_weight_block_crb():
    # true (tau, alpha) fixed and known: the weight estimator's empirical
    # variance over 1e4 noisy trials matches the weight block of the CRB
    paths = PathSet(taus=[0.31, 0.67], alphas=[0.12, -0.29],
                    gammas=[0.9 - 0.4j, 0.5 + 0.6j])
    _, clean = make_observation(paths, snr_db=math.inf)
    mask = clean.mask
    axes = SamplingAxes.for_mask(mask)
    noise_var = 0.3
    p = paths.n_paths

    fim = fisher_information(paths, clean.x_hat, mask, axes, noise_var)
    weight_block = fim[2 * p:, 2 * p:]
    bound = np.diag(np.linalg.inv(weight_block))

    z = clean.x_hat[:, None] * steering_matrix(paths.taus, paths.alphas, mask, axes)
    solver = np.linalg.pinv(z)
    from ddsense import blue_weights
    check = Observation(y=clean.y, x_hat=clean.x_hat, mask=mask, noise_var=noise_var)
    np.testing.assert_allclose(solver @ clean.y,
                               blue_weights(check, paths.taus, paths.alphas), atol=1e-10)

    rng = np.random.default_rng(99)
    n_trials = 10000
    noise = rng.normal(scale=math.sqrt(noise_var / 2), size=(n_trials, mask.n_used, 2))
    ys = clean.y[None, :] + noise[..., 0] + 1j * noise[..., 1]
    weights = ys @ solver.T
    empirical = np.concatenate([weights.real.var(axis=0), weights.imag.var(axis=0)])
    rel = np.abs(empirical - bound) / bound
    assert rel.max() < 0.05
    _report(6, f"BLUE variance matches the weight-block CRB (worst rel dev {rel.max():.3f})")


def test_criterion_7_aliasing_and_payload_suppression():
    # pilots-only lattice: full-height grating lobes at the reciprocal points;
    # adding payload REs pushes every non-mainlobe value below 0.5
    from dataclasses import replace

    cfg = default_config()
    pilots_scenario = build_scenario(replace(cfg, eta=0.0), math.inf)
    data_scenario = build_scenario(cfg, math.inf)
    oversampling = 8
    taus, alphas = ambiguity_axes(pilots_scenario.mask, oversampling)

    af_pilots = ambiguity_function(pilots_scenario.frame, oversampling)
    for m in (-1, 0, 1):
        for l in (-1, 0, 1):
            if (m, l) == (0, 0):
                continue
            i = int(np.argmin(np.abs(taus - m / 4)))
            j = int(np.argmin(np.abs(alphas - l / 4)))
            assert af_pilots[i, j] > 0.9, f"missing grating lobe at ({m}/4, {l}/4)"

    af_data = ambiguity_function(data_scenario.frame, oversampling)
    # main lobe: one resolution cell around the origin in both axes
    main = np.ix_(np.abs(taus) <= 1 / 32 + 1e-12, np.abs(alphas) <= 1 / 20 + 1e-12)
    work = af_data.copy()
    work[main] = 0.0
    assert work.max() < 0.5, f"max non-mainlobe {work.max():.3f}"
    _report(7, f"pilot-lattice aliasing reproduced; payload REs suppress side-lobes "
               f"to {work.max():.3f}")


def test_criterion_8_sidelobe_cancellation():
    # subtracting a single estimated path removes its side-lobes: the whole
    # correlation surface drops by at least 40 dB on a noiseless instance
    paths = PathSet(taus=[0.3117], alphas=[0.0523], gammas=[1.0])
    _, obs = make_observation(paths)
    cfg = EstimatorConfig(n_paths=1)
    taus, alphas = coarse_grids(obs.mask.n_subcarriers, obs.mask.n_symbols, 4)
    before = np.abs(spreading_surface(obs, obs.y, taus, alphas)).max()
    report = estimate(obs, cfg)
    from ddsense import signal_model
    axes = SamplingAxes.for_mask(obs.mask)
    residual = obs.y - signal_model(report.paths, obs.x_hat, obs.mask, axes)
    after = np.abs(spreading_surface(obs, residual, taus, alphas)).max()
    drop_db = 20 * math.log10(before / max(after, 1e-300))
    assert drop_db >= 40.0
    _report(8, f"path subtraction drops the correlation surface by {drop_db:.0f} dB")


def test_criterion_9_cli_determinism(tmp_path):
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(
        "n_subcarriers = 16\nn_symbols = 10\noccupancy = 0.5\n"
        "pilot_spacing_freq = 4\npilot_spacing_time = 2\nqam_order = 16\n"
        "n_paths = 2\nsnr_points_db = 10, 20\nn_trials = 3\nseed = 9\n"
        "methods = weighted\n"
    )

    def run_twice(argv, name):
        out_a = tmp_path / f"{name}_a.out"
        out_b = tmp_path / f"{name}_b.out"
        assert main(argv + ["--out", str(out_a)]) == 0
        assert main(argv + ["--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes(), f"{name} output not reproducible"

    base = ["--config", str(cfg_path)]
    run_twice(["simulate"] + base, "simulate")
    run_twice(["af"] + base + ["--oversampling", "2"], "af")
    run_twice(["sf"] + base + ["--snr", "12", "--oversampling", "2"], "sf")

    truth = PathSet(taus=[0.31], alphas=[0.12], gammas=[0.9 - 0.4j])
    _, obs = make_observation(truth, snr_db=15.0)
    mask_path = tmp_path / "mask.txt"
    obs_path = tmp_path / "obs.txt"
    save_mask(obs.mask, mask_path)
    save_observation(obs, obs_path)
    run_twice(["estimate", "--mask", str(mask_path), "--obs", str(obs_path),
               "--paths", "1"], "estimate")
    _report(9, "byte-identical CLI outputs for identical seeds")
