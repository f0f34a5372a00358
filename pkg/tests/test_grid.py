"""Allocation mask construction, vectorization and text round trips."""

import numpy as np
import pytest

from ddsense import ConfigurationError, GridConfig, build_mask, scatter, vectorize
from ddsense.errors import FormatError
from ddsense.grid import load_mask, mask_from_text, mask_to_text, save_mask


def test_full_occupancy_uses_every_re():
    cfg = GridConfig(n_subcarriers=8, n_symbols=5, occupancy=1.0,
                     pilot_spacing_freq=2, pilot_spacing_time=2, seed=0)
    mask = build_mask(cfg)
    assert mask.n_used == 8 * 5


def test_unit_pilot_spacing_degenerates_to_full_pilot_grid():
    cfg = GridConfig(n_subcarriers=8, n_symbols=5, occupancy=1.0,
                     pilot_spacing_freq=1, pilot_spacing_time=1, seed=0)
    mask = build_mask(cfg)
    assert mask.n_used == 8 * 5
    assert len(mask.pilots) == 8 * 5 and not mask.data


def test_reference_grid_re_count():
    # 20 symbols x round(0.4 * 32) REs per symbol
    cfg = GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=1)
    mask = build_mask(cfg)
    assert mask.n_used == 20 * 13 == 260


def test_per_symbol_quota_is_exact():
    cfg = GridConfig(n_subcarriers=10, n_symbols=6, occupancy=0.45,
                     pilot_spacing_freq=5, pilot_spacing_time=2, seed=3)
    mask = build_mask(cfg)
    # 0.45 * 10 = 4.5 rounds half away from zero to 5
    counts = {}
    for s, _c in mask.all_used:
        counts[s] = counts.get(s, 0) + 1
    assert all(v == 5 for v in counts.values())
    assert len(counts) == 6


def test_all_gap_symbols_is_an_error():
    cfg = GridConfig(n_subcarriers=8, n_symbols=4, occupancy=0.5,
                     tdd_gap_symbols=frozenset({0, 1, 2, 3}), seed=0)
    with pytest.raises(ConfigurationError):
        build_mask(cfg)


def test_quota_below_pilot_count_names_the_symbol():
    cfg = GridConfig(n_subcarriers=8, n_symbols=4, occupancy=0.25,
                     pilot_spacing_freq=1, pilot_spacing_time=1, seed=0)
    with pytest.raises(ConfigurationError, match="symbol 0"):
        build_mask(cfg)


def test_gap_symbols_carry_nothing():
    cfg = GridConfig(n_subcarriers=16, n_symbols=8, occupancy=0.5,
                     tdd_gap_symbols=frozenset({2, 5}), seed=9)
    mask = build_mask(cfg)
    used_symbols = {s for s, _ in mask.all_used}
    assert used_symbols.isdisjoint({2, 5})


@pytest.mark.parametrize("seed", range(8))
def test_pilots_and_data_are_disjoint_random_configs(seed):
    rng = np.random.default_rng(seed)
    cfg = GridConfig(
        n_subcarriers=int(rng.integers(4, 64)),
        n_symbols=int(rng.integers(2, 32)),
        occupancy=float(rng.uniform(0.2, 1.0)),
        pilot_spacing_freq=int(rng.integers(1, 6)),
        pilot_spacing_time=int(rng.integers(1, 6)),
        seed=seed,
    )
    try:
        mask = build_mask(cfg)
    except ConfigurationError:
        return  # occupancy too low for the pilot row; a valid rejection
    assert set(mask.pilots).isdisjoint(mask.data)
    assert mask.n_used == len(mask.pilots) + len(mask.data)
    assert mask.all_used == tuple(sorted(mask.pilots + mask.data))


def test_build_mask_is_deterministic():
    cfg = GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=42)
    assert build_mask(cfg) == build_mask(cfg)


def test_different_seed_changes_data_placement():
    cfg_a = GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=1)
    cfg_b = GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=2)
    assert build_mask(cfg_a) != build_mask(cfg_b)


def test_vectorize_all_ones():
    mask = build_mask(GridConfig(n_subcarriers=6, n_symbols=4, occupancy=0.5, seed=0))
    ones = np.ones((6, 4), dtype=complex)
    np.testing.assert_array_equal(vectorize(mask, ones), np.ones(mask.n_used))


def test_vectorize_scatter_round_trip():
    mask = build_mask(GridConfig(n_subcarriers=12, n_symbols=7, occupancy=0.6, seed=5))
    rng = np.random.default_rng(0)
    grid = rng.normal(size=(12, 7)) + 1j * rng.normal(size=(12, 7))
    vec = vectorize(mask, grid)
    back = scatter(mask, vec)
    s_idx, c_idx = mask.used_index_arrays()
    np.testing.assert_array_equal(back[c_idx, s_idx], grid[c_idx, s_idx])
    unused = np.ones(grid.shape, dtype=bool)
    unused[c_idx, s_idx] = False
    assert np.all(back[unused] == 0)


def test_vectorize_is_deterministic():
    mask = build_mask(GridConfig(n_subcarriers=12, n_symbols=7, occupancy=0.6, seed=5))
    rng = np.random.default_rng(1)
    grid = rng.normal(size=(12, 7)) + 1j * rng.normal(size=(12, 7))
    np.testing.assert_array_equal(vectorize(mask, grid), vectorize(mask, grid))


def test_vectorize_rejects_wrong_shape():
    mask = build_mask(GridConfig(n_subcarriers=6, n_symbols=4, occupancy=0.5, seed=0))
    with pytest.raises(ConfigurationError):
        vectorize(mask, np.ones((4, 6)))


def test_mask_text_round_trip(tmp_path):
    mask = build_mask(GridConfig(n_subcarriers=32, n_symbols=20, occupancy=0.4, seed=17))
    path = tmp_path / "mask.txt"
    save_mask(mask, path)
    loaded = load_mask(path)
    assert loaded == mask
    assert mask_to_text(loaded) == mask_to_text(mask)


def test_mask_text_rejects_garbage():
    with pytest.raises(FormatError):
        mask_from_text("not a header\n")
    with pytest.raises(FormatError):
        mask_from_text("4 4 0\nQ 1 1\n")
    with pytest.raises(FormatError):
        mask_from_text("4 4 0\nP 1 1\nD 1 1\n")


def test_config_validation():
    with pytest.raises(ConfigurationError):
        GridConfig(n_subcarriers=1, n_symbols=4)
    with pytest.raises(ConfigurationError):
        GridConfig(n_subcarriers=8, n_symbols=4, occupancy=0.0)
    with pytest.raises(ConfigurationError):
        GridConfig(n_subcarriers=8, n_symbols=4, occupancy=1.2)
    with pytest.raises(ConfigurationError):
        GridConfig(n_subcarriers=8, n_symbols=4, tdd_gap_symbols=frozenset({9}))
    with pytest.raises(ConfigurationError):
        GridConfig(n_subcarriers=8, n_symbols=4, occupancy=0.01)
