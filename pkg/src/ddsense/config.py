"""Flat key-value campaign configuration files.

Format: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored.  Unknown keys are rejected.  Keys and defaults:

    n_subcarriers = 32          grid width (frequency)
    n_symbols = 20              grid length (time)
    occupancy = 0.4             active fraction of subcarriers per symbol
    pilot_spacing_freq = 4      pilot lattice spacing across subcarriers
    pilot_spacing_time = 4      pilot lattice spacing across non-gap symbols
    tdd_gap_symbols =           comma-separated symbol indices with no signal
    qam_order = 256             data constellation order (4/16/64/256)
    eta = 0.45                  data amplitude weight, in [0, 1)
    beta = 0.9                  pilot amplitude weight, in [0, 1)
    n_paths = 3                 model order / number of drawn paths
    min_separation_cells = 2.0  pairwise separation for random path draws
    gamma_magnitude = 1.0       weight magnitude for random path draws
    fixed_paths =               'tau:alpha:re:im;...' overrides random draws
    snr_points_db = 0,5,10,15,20,25,30
    n_trials = 500
    seed = 1
    methods = weighted,unweighted
    compute_crb = true
    coarse_oversampling = 4
    lm_max_iters = 50
    lm_tol = 1e-10
    lm_lambda0 = 0.01
    lm_lambda_up = 10
    lm_lambda_down = 0.3
    residual_threshold =        blank disables early stopping
    final_joint_refine = true   joint refinement pass after cancellation
"""

import numpy as np

from .channel import PathSet
from .errors import ConfigurationError
from .estimator import EstimatorConfig
from .grid import GridConfig
from .harness import CampaignConfig, RandomPathSpec
from .txgen import ModulationConfig

_DEFAULTS = {
    "n_subcarriers": "32",
    "n_symbols": "20",
    "occupancy": "0.4",
    "pilot_spacing_freq": "4",
    "pilot_spacing_time": "4",
    "tdd_gap_symbols": "",
    "qam_order": "256",
    "eta": "0.45",
    "beta": "0.9",
    "n_paths": "3",
    "min_separation_cells": "2.0",
    "gamma_magnitude": "1.0",
    "fixed_paths": "",
    "snr_points_db": "0,5,10,15,20,25,30",
    "n_trials": "500",
    "seed": "1",
    "methods": "weighted,unweighted",
    "compute_crb": "true",
    "coarse_oversampling": "4",
    "lm_max_iters": "50",
    "lm_tol": "1e-10",
    "lm_lambda0": "0.01",
    "lm_lambda_up": "10",
    "lm_lambda_down": "0.3",
    "residual_threshold": "",
    "final_joint_refine": "true",
}


def parse_config_text(text: str) -> dict:
    """Key-value pairs from config text; unknown keys raise."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _to_bool(key, value):
    low = value.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")


def _int_list(value):
    return [int(v) for v in value.split(",") if v.strip()]


def _float_list(value):
    return [float(v) for v in value.split(",") if v.strip()]


def _parse_fixed_paths(value: str) -> PathSet:
    taus, alphas, gammas = [], [], []
    for chunk in value.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 4:
            raise ConfigurationError(f"fixed_paths entry {chunk!r} must be tau:alpha:re:im")
        taus.append(float(parts[0]))
        alphas.append(float(parts[1]))
        gammas.append(float(parts[2]) + 1j * float(parts[3]))
    if not taus:
        raise ConfigurationError("fixed_paths contained no entries")
    return PathSet(taus=np.array(taus), alphas=np.array(alphas), gammas=np.array(gammas))


def build_campaign_config(values: dict | None = None, overrides: dict | None = None) -> CampaignConfig:
    """Merge defaults, file values and CLI overrides into a CampaignConfig."""
    merged = dict(_DEFAULTS)
    merged.update(values or {})
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _DEFAULTS:
            raise ConfigurationError(f"unknown override {key!r}")
        merged[key] = str(value)

    try:
        grid = GridConfig(
            n_subcarriers=int(merged["n_subcarriers"]),
            n_symbols=int(merged["n_symbols"]),
            occupancy=float(merged["occupancy"]),
            pilot_spacing_freq=int(merged["pilot_spacing_freq"]),
            pilot_spacing_time=int(merged["pilot_spacing_time"]),
            tdd_gap_symbols=frozenset(_int_list(merged["tdd_gap_symbols"])),
            seed=0,
        )
        modulation = ModulationConfig(qam_order=int(merged["qam_order"]))
        if merged["fixed_paths"].strip():
            paths = _parse_fixed_paths(merged["fixed_paths"])
        else:
            paths = RandomPathSpec(
                n_paths=int(merged["n_paths"]),
                min_separation_cells=float(merged["min_separation_cells"]),
                gamma_magnitude=float(merged["gamma_magnitude"]),
            )
        threshold = merged["residual_threshold"].strip()
        estimator = EstimatorConfig(
            n_paths=int(merged["n_paths"]),
            coarse_oversampling=int(merged["coarse_oversampling"]),
            lm_max_iters=int(merged["lm_max_iters"]),
            lm_tol=float(merged["lm_tol"]),
            lm_lambda0=float(merged["lm_lambda0"]),
            lm_lambda_up=float(merged["lm_lambda_up"]),
            lm_lambda_down=float(merged["lm_lambda_down"]),
            residual_threshold=float(threshold) if threshold else None,
            final_joint_refine=_to_bool("final_joint_refine", merged["final_joint_refine"]),
        )
        return CampaignConfig(
            grid=grid,
            modulation=modulation,
            eta=float(merged["eta"]),
            beta=float(merged["beta"]),
            paths=paths,
            snr_points_db=tuple(_float_list(merged["snr_points_db"])),
            n_trials=int(merged["n_trials"]),
            estimator=estimator,
            seed=int(merged["seed"]),
            methods=tuple(m.strip() for m in merged["methods"].split(",") if m.strip()),
            compute_crb=_to_bool("compute_crb", merged["compute_crb"]),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid config value: {exc}") from exc


def load_config_file(path, overrides: dict | None = None) -> CampaignConfig:
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    return build_campaign_config(values, overrides)


def default_config(overrides: dict | None = None) -> CampaignConfig:
    return build_campaign_config({}, overrides)
