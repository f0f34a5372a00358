"""Monte Carlo campaign runner and plot-ready surface exports.

Trials are independent given the campaign seed: every (SNR point, trial)
pair derives its own mask/frame/path/noise seeds through a splitmix64
construction, so aggregation is order insensitive and campaigns are
reproducible bit for bit.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import baselines, bounds
from .channel import Observation, PathSet, observe, wrap_difference
from .errors import ConfigurationError, DdsenseError
from .estimator import EstimatorConfig, coarse_grids, estimate, spreading_surface
from .grid import GridConfig, build_mask
from .model import SamplingAxes
from .txgen import ModulationConfig, generate_frame

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

KNOWN_METHODS = ("weighted", "unweighted", "zf_dft", "mf_dft")


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given state (state + golden, mixed)."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(root: int, *indices: int) -> int:
    """Fold trial/stream indices into a 64-bit seed via iterated splitmix64."""
    s = root & _MASK64
    for idx in indices:
        s = splitmix64(s ^ (idx & _MASK64))
    return s


@dataclass(frozen=True)
class RandomPathSpec:
    """Random path draws with a minimum pairwise separation.

    Separation is measured in resolution cells (1/n_subcarriers in delay,
    1/n_symbols in Doppler); a candidate is rejected when it is closer than
    ``min_separation_cells`` to an existing path in *both* axes.  Weights
    have magnitude ``gamma_magnitude`` and uniform phase.
    """

    n_paths: int = 3
    min_separation_cells: float = 2.0
    gamma_magnitude: float = 1.0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigurationError("n_paths must be >= 1")
        if self.min_separation_cells < 0 or self.gamma_magnitude <= 0:
            raise ConfigurationError("invalid random path specification")


@dataclass
class CampaignConfig:
    """Scenario plus sweep settings for a Monte Carlo campaign."""

    grid: GridConfig
    modulation: ModulationConfig
    eta: float
    beta: float
    paths: object  # PathSet (fixed truth) or RandomPathSpec (drawn per trial)
    snr_points_db: tuple
    n_trials: int
    estimator: EstimatorConfig
    seed: int = 1
    methods: tuple = ("weighted", "unweighted")
    compute_crb: bool = True

    def __post_init__(self):
        self.snr_points_db = tuple(float(s) for s in self.snr_points_db)
        self.methods = tuple(self.methods)
        if self.n_trials < 1:
            raise ConfigurationError("n_trials must be >= 1")
        if not self.snr_points_db:
            raise ConfigurationError("snr_points_db must be non-empty")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ConfigurationError(f"unknown methods {unknown}; known: {KNOWN_METHODS}")
        if not isinstance(self.paths, (PathSet, RandomPathSpec)):
            raise ConfigurationError("paths must be a PathSet or a RandomPathSpec")


def draw_paths(spec: RandomPathSpec, n_subcarriers: int, n_symbols: int, seed: int) -> PathSet:
    """Rejection-sample paths meeting the pairwise separation rule."""
    rng = np.random.default_rng(seed)
    sep_tau = spec.min_separation_cells / n_subcarriers
    sep_alpha = spec.min_separation_cells / n_symbols
    taus: list = []
    alphas: list = []
    attempts = 0
    while len(taus) < spec.n_paths:
        attempts += 1
        if attempts > 10000:
            raise ConfigurationError("could not draw paths with the requested separation")
        tau = 1.0 - rng.random()  # uniform on (0, 1]
        alpha = 0.5 - rng.random()  # uniform on (-0.5, 0.5]
        close = any(
            abs(wrap_difference(tau - t0)) < sep_tau and abs(wrap_difference(alpha - a0)) < sep_alpha
            for t0, a0 in zip(taus, alphas)
        )
        if not close:
            taus.append(tau)
            alphas.append(alpha)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=spec.n_paths)
    gammas = spec.gamma_magnitude * np.exp(1j * phases)
    return PathSet(taus=np.array(taus), alphas=np.array(alphas), gammas=gammas)


@dataclass
class Scenario:
    mask: object
    frame: object
    paths: PathSet
    obs: Observation


def build_scenario(config: CampaignConfig, snr_db: float, snr_index: int = 0,
                   trial: int = 0) -> Scenario:
    """Materialize one trial: mask, frame, true paths and noisy observation."""
    grid_cfg = replace(config.grid, seed=derive_seed(config.seed, snr_index, trial, 0))
    mask = build_mask(grid_cfg)
    frame = generate_frame(mask, config.modulation, config.eta, config.beta,
                           seed=derive_seed(config.seed, snr_index, trial, 1))
    if isinstance(config.paths, PathSet):
        paths = config.paths
    else:
        paths = draw_paths(config.paths, mask.n_subcarriers, mask.n_symbols,
                           seed=derive_seed(config.seed, snr_index, trial, 2))
    obs = observe(frame, paths, snr_db, seed=derive_seed(config.seed, snr_index, trial, 3))
    return Scenario(mask=mask, frame=frame, paths=paths, obs=obs)


def match_paths(true_paths: PathSet, est_paths: PathSet):
    """Associate estimates to truth by minimum-cost assignment on wrapped
    (delay, Doppler) distance; returns squared wrapped errors per matched pair.
    """
    n = min(true_paths.n_paths, est_paths.n_paths)
    if n == 0:
        return np.empty(0), np.empty(0)
    d_tau = wrap_difference(true_paths.taus[:, None] - est_paths.taus[None, :])
    d_alpha = wrap_difference(true_paths.alphas[:, None] - est_paths.alphas[None, :])
    cost = d_tau ** 2 + d_alpha ** 2
    rows, cols = linear_sum_assignment(cost)
    return d_tau[rows, cols] ** 2, d_alpha[rows, cols] ** 2


def _dft_peak_estimates(channel_grid: np.ndarray, n_paths: int,
                        oversampling: int) -> PathSet:
    """Top peaks of a DFT spreading surface with one-cell exclusion zones.

    Grid-limited baseline (no refinement); used for the zf_dft / mf_dft
    comparison methods.
    """
    surface = np.abs(baselines.dft_spreading(channel_grid, oversampling))
    taus, alphas = baselines.dft_axes(channel_grid.shape, oversampling)
    n_f = channel_grid.shape[0]
    n_t = channel_grid.shape[1]
    picked_t: list = []
    picked_a: list = []
    work = surface.copy()
    for _ in range(n_paths):
        i, j = np.unravel_index(int(np.argmax(work)), work.shape)
        picked_t.append(float(taus[i]))
        picked_a.append(float(alphas[j]))
        blk_t = np.abs(wrap_difference(taus - taus[i])) < 1.0 / n_f
        blk_a = np.abs(wrap_difference(alphas - alphas[j])) < 1.0 / n_t
        work[np.ix_(blk_t, blk_a)] = -1.0
    gammas = np.ones(n_paths, dtype=np.complex128)
    return PathSet(taus=np.array(picked_t), alphas=np.array(picked_a), gammas=gammas)


def _run_method(method: str, scenario: Scenario, cfg: EstimatorConfig) -> PathSet:
    if method == "weighted":
        return estimate(scenario.obs, cfg).paths
    if method == "unweighted":
        return baselines.unweighted_estimate(scenario.obs, cfg).paths
    if method == "zf_dft":
        grid = baselines.zf_channel(scenario.obs)
        return _dft_peak_estimates(grid, cfg.n_paths, cfg.coarse_oversampling)
    if method == "mf_dft":
        grid = baselines.mf_channel(scenario.obs)
        return _dft_peak_estimates(grid, cfg.n_paths, cfg.coarse_oversampling)
    raise ConfigurationError(f"unknown method {method!r}")


def _run_trial(config: CampaignConfig, snr_db: float, snr_index: int, trial: int) -> dict:
    scenario = build_scenario(config, snr_db, snr_index, trial)
    out: dict = {"methods": {}, "crb_tau": None, "crb_alpha": None}
    for method in config.methods:
        try:
            est = _run_method(method, scenario, config.estimator)
            sq_tau, sq_alpha = match_paths(scenario.paths, est)
            out["methods"][method] = (sq_tau, sq_alpha)
        except DdsenseError:
            out["methods"][method] = None
    if config.compute_crb:
        axes = SamplingAxes.for_mask(scenario.mask)
        p = scenario.paths.n_paths
        var = bounds.crb(scenario.paths, scenario.obs.x_hat, scenario.mask, axes,
                         scenario.obs.noise_var)
        out["crb_tau"] = var[0:p]
        out["crb_alpha"] = var[p:2 * p]
    return out


def _trial_star(args):
    return _run_trial(*args)


@dataclass
class MseRow:
    snr_db: float
    method: str
    param: str
    mse: float
    crb: float
    n_ok: int
    n_fail: int


@dataclass
class MseTable:
    rows: list = field(default_factory=list)

    def to_csv_text(self) -> str:
        lines = ["snr_db,method,param,mse,crb,n_ok,n_fail"]
        for r in self.rows:
            lines.append(
                f"{r.snr_db:.17g},{r.method},{r.param},{r.mse:.17g},{r.crb:.17g},"
                f"{r.n_ok},{r.n_fail}"
            )
        return "\n".join(lines) + "\n"

    def select(self, method: str, param: str) -> dict:
        """snr_db -> MseRow for one method/parameter curve."""
        return {r.snr_db: r for r in self.rows if r.method == method and r.param == param}


def run_campaign(config: CampaignConfig, n_jobs: int = 1) -> MseTable:
    """Sweep SNR points, averaging squared wrapped errors over trials.

    Per SNR point and method the table reports the MSE of the matched delay
    and Doppler estimates, the average conditional CRB over the same
    realizations, and the number of successful/failed trials.  Failed trials
    (estimator exceptions) are excluded from the average.  The result depends
    only on the config, not on ``n_jobs`` or execution order.
    """
    table = MseTable()
    for snr_index, snr_db in enumerate(config.snr_points_db):
        jobs = [(config, snr_db, snr_index, t) for t in range(config.n_trials)]
        if n_jobs > 1:
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                results = list(pool.map(_trial_star, jobs, chunksize=8))
        else:
            results = [_run_trial(*j) for j in jobs]

        crb_tau = float(np.mean(np.concatenate([r["crb_tau"] for r in results]))) \
            if config.compute_crb else math.nan
        crb_alpha = float(np.mean(np.concatenate([r["crb_alpha"] for r in results]))) \
            if config.compute_crb else math.nan
        for method in config.methods:
            sq_tau: list = []
            sq_alpha: list = []
            n_ok = 0
            n_fail = 0
            for r in results:
                entry = r["methods"][method]
                if entry is None:
                    n_fail += 1
                    continue
                n_ok += 1
                sq_tau.append(entry[0])
                sq_alpha.append(entry[1])
            mse_tau = float(np.mean(np.concatenate(sq_tau))) if sq_tau else math.nan
            mse_alpha = float(np.mean(np.concatenate(sq_alpha))) if sq_alpha else math.nan
            table.rows.append(MseRow(snr_db, method, "tau", mse_tau, crb_tau, n_ok, n_fail))
            table.rows.append(MseRow(snr_db, method, "alpha", mse_alpha, crb_alpha, n_ok, n_fail))
    return table


# --- surface exports --------------------------------------------------------


def _surface_csv(taus, alphas, surface, markers) -> str:
    lines = []
    for tag, tau, alpha, mag in markers:
        lines.append(f"# {tag} {tau:.17g} {alpha:.17g} {mag:.17g}")
    lines.append("tau,alpha,value")
    for i, tau in enumerate(taus):
        for j, alpha in enumerate(alphas):
            lines.append(f"{tau:.17g},{alpha:.17g},{surface[i, j]:.17g}")
    return "\n".join(lines) + "\n"


def export_af(config: CampaignConfig, out_path, oversampling: int = 8,
              pilots_only: bool = False, snr_db: float = math.inf) -> None:
    """Write the transmit-grid ambiguity surface as tau,alpha,value triplets.

    ``pilots_only`` zeroes the data amplitude so only the pilot lattice
    contributes (the reference-signal-only ambiguity).
    """
    scenario_cfg = config
    if pilots_only:
        scenario_cfg = replace(config, eta=0.0)
    scenario = build_scenario(scenario_cfg, snr_db)
    surface = baselines.ambiguity_function(scenario.frame, oversampling)
    taus, alphas = baselines.ambiguity_axes(scenario.mask, oversampling)
    markers = [("true", t, a, float(abs(g)))
               for t, a, g in zip(scenario.paths.taus, scenario.paths.alphas,
                                  scenario.paths.gammas)]
    text = _surface_csv(taus, alphas, surface, markers)
    with open(out_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def export_sf(config: CampaignConfig, out_path, method: str = "weighted",
              snr_db: float = 10.0, oversampling: int = 4,
              slice_alpha: float | None = None, include_estimate: bool = False) -> None:
    """Write a spreading-function surface or 1-D delay slice, peak normalized.

    Methods: ``weighted`` (amplitude-weighted correlation with the received
    samples), ``zf`` / ``mf`` (DFT spreading of the zero-filled ZF / MF
    channel estimate).  With ``slice_alpha`` only the delay profile at the
    requested Doppler (nearest grid line for the DFT methods) is written.
    True-path markers are always included; estimated-path markers are added
    when ``include_estimate`` is set.
    """
    scenario = build_scenario(config, snr_db)
    obs = scenario.obs
    if method == "weighted":
        taus, alphas = coarse_grids(obs.mask.n_subcarriers, obs.mask.n_symbols, oversampling)
        if slice_alpha is not None:
            alphas = np.array([slice_alpha])
        surface = np.abs(spreading_surface(obs, obs.y, taus, alphas))
    elif method in ("zf", "mf"):
        grid = baselines.zf_channel(obs) if method == "zf" else baselines.mf_channel(obs)
        surface = np.abs(baselines.dft_spreading(grid, oversampling))
        taus, alphas = baselines.dft_axes(grid.shape, oversampling)
        if slice_alpha is not None:
            j = int(np.argmin(np.abs(wrap_difference(alphas - slice_alpha))))
            surface = surface[:, j:j + 1]
            alphas = alphas[j:j + 1]
    else:
        raise ConfigurationError(f"unknown spreading-function method {method!r}")
    peak = surface.max()
    if peak > 0:
        surface = surface / peak
    markers = [("true", t, a, float(abs(g)))
               for t, a, g in zip(scenario.paths.taus, scenario.paths.alphas,
                                  scenario.paths.gammas)]
    if include_estimate:
        report = estimate(obs, config.estimator)
        markers += [("estimate", t, a, float(abs(g)))
                    for t, a, g in zip(report.paths.taus, report.paths.alphas,
                                       report.paths.gammas)]
    text = _surface_csv(taus, alphas, surface, markers)
    with open(out_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
