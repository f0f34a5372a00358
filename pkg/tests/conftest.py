import math

import pytest

from ddsense import (EstimatorConfig, GridConfig, ModulationConfig, PathSet,
                     build_mask, generate_frame, observe)


def paper_grid_config(seed=7, **kwargs):
    """The reference simulation grid: 32 x 20, occupancy 0.4."""
    defaults = dict(n_subcarriers=32, n_symbols=20, occupancy=0.4,
                    pilot_spacing_freq=4, pilot_spacing_time=4, seed=seed)
    defaults.update(kwargs)
    return GridConfig(**defaults)


def make_observation(paths, snr_db=math.inf, mask_seed=7, frame_seed=3, noise_seed=11,
                     qam_order=256, eta=0.45, beta=0.9, grid_kwargs=None):
    mask = build_mask(paper_grid_config(seed=mask_seed, **(grid_kwargs or {})))
    frame = generate_frame(mask, ModulationConfig(qam_order), eta, beta, seed=frame_seed)
    return frame, observe(frame, paths, snr_db, seed=noise_seed)


@pytest.fixture
def three_paths():
    return PathSet(taus=[0.3, 0.62, 0.11], alphas=[0.1, -0.21, 0.33],
                   gammas=[1.0, 0.8j, -0.6 + 0.2j])


@pytest.fixture
def default_cfg():
    return EstimatorConfig(n_paths=3)
