"""Reference processing chains: ZF/MF channel estimation with zero filling,
DFT-based spreading surfaces, the transmit-grid ambiguity function, and the
non-weighted estimator operating on a ZF channel estimate.
"""

import numpy as np

from . import _kernels
from .channel import Observation
from .errors import ConfigurationError
from .estimator import EstimatorConfig, EstimationReport, estimate
from .grid import scatter, vectorize
from .model import SamplingAxes, used_axis_samples
from .txgen import Frame

ZF_DIVISION_GUARD = 1e-12


def zf_channel_with_diagnostics(obs: Observation):
    """Zero-forcing channel estimate and the count of guarded divisions.

    Per used RE the received sample is divided by the transmit estimate;
    entries with |x_hat| below the guard are set to zero instead of dividing.
    Unused REs are zero filled.
    """
    safe = np.abs(obs.x_hat) >= ZF_DIVISION_GUARD
    h = np.zeros(obs.mask.n_used, dtype=np.complex128)
    np.divide(obs.y, obs.x_hat, out=h, where=safe)
    return scatter(obs.mask, h), int(np.count_nonzero(~safe))


def zf_channel(obs: Observation) -> np.ndarray:
    """Zero-forcing channel estimate on the full grid (zero filled)."""
    return zf_channel_with_diagnostics(obs)[0]


def mf_channel(obs: Observation) -> np.ndarray:
    """Matched-filter channel estimate: conjugate transmit times received."""
    return scatter(obs.mask, np.conj(obs.x_hat) * obs.y)


def dft_spreading(channel_grid: np.ndarray, oversampling: int = 1) -> np.ndarray:
    """Delay-Doppler spreading surface of a zero-filled channel grid via FFTs.

    Output bin (i, j) corresponds to delay ``(i+1)/(oversampling*n_subcarriers)``
    in (0, 1] and Doppler ``(j+1)/(oversampling*n_symbols) - 0.5`` in
    (-0.5, 0.5] (see :func:`dft_axes`); a single path peaks at its own
    parameters under the package's axis convention.
    """
    channel_grid = np.asarray(channel_grid, dtype=np.complex128)
    if channel_grid.ndim != 2:
        raise ConfigurationError("channel grid must be 2-D")
    if oversampling < 1:
        raise ConfigurationError("oversampling must be >= 1")
    n_f, n_t = channel_grid.shape
    # sum_k h[k, n] exp(+2j*pi*k*i/n_tau) is an unnormalized inverse DFT over
    # frequency; the time axis takes a forward DFT.
    n_tau = oversampling * n_f
    n_alpha = oversampling * n_t
    surface = n_tau * np.fft.ifft(channel_grid, n=n_tau, axis=0)
    surface = np.fft.fft(surface, n=n_alpha, axis=1)
    (_, tau_order), (_, alpha_order) = _dft_bin_maps(n_tau, n_alpha)
    return surface[np.ix_(tau_order, alpha_order)]


def _dft_bin_maps(n_tau, n_alpha):
    # raw DFT bins live on tau in [0, 1) and alpha in [0, 1); relabel onto the
    # package windows tau in (0, 1] and alpha in (-0.5, 0.5] and sort
    tau_vals = np.arange(n_tau) / n_tau
    tau_vals = np.where(tau_vals == 0.0, 1.0, tau_vals)
    alpha_vals = np.arange(n_alpha) / n_alpha
    alpha_vals = np.where(alpha_vals > 0.5, alpha_vals - 1.0, alpha_vals)
    tau_order = np.argsort(tau_vals)
    alpha_order = np.argsort(alpha_vals)
    return (tau_vals[tau_order], tau_order), (alpha_vals[alpha_order], alpha_order)


def dft_axes(shape, oversampling: int = 1):
    """(tau, alpha) coordinates of the dft_spreading bins."""
    n_f, n_t = shape
    (taus, _), (alphas, _) = _dft_bin_maps(oversampling * n_f, oversampling * n_t)
    return taus, alphas


def ambiguity_function(frame: Frame, oversampling: int = 8) -> np.ndarray:
    """Self-ambiguity of the transmit grid's power pattern, peak normalized.

    ``AF(tau, alpha) = |sum_u |x_u|^2 exp(2j*pi*(t_u*alpha - f_u*tau))|``
    evaluated on a centered oversampled grid (see :func:`ambiguity_axes`) and
    scaled so the value at (0, 0) is 1.
    """
    axes = SamplingAxes.for_mask(frame.mask)
    f_u, t_u = used_axis_samples(frame.mask, axes)
    weights = np.abs(vectorize(frame.mask, frame.grid)) ** 2
    total = weights.sum()
    if total == 0.0:
        raise ConfigurationError("frame carries no power; ambiguity undefined")
    taus, alphas = ambiguity_axes(frame.mask, oversampling)
    surface = _kernels.phase_surface(weights.astype(np.complex128), f_u, t_u, taus, alphas)
    return np.abs(surface) / total


def ambiguity_axes(mask, oversampling: int = 8):
    """Centered (tau, alpha) grids for the ambiguity surface, spacing 1 cell/os."""
    n_tau = oversampling * mask.n_subcarriers
    n_alpha = oversampling * mask.n_symbols
    taus = (np.arange(n_tau) - n_tau // 2) / n_tau
    alphas = (np.arange(n_alpha) - n_alpha // 2) / n_alpha
    return taus, alphas


def unweighted_estimate(obs: Observation, cfg: EstimatorConfig) -> EstimationReport:
    """Estimator variant that ignores the transmit amplitudes.

    Runs the same pipeline on the vectorized ZF channel estimate with an
    all-ones transmit estimate, i.e. correlating against the plain steering
    model instead of the amplitude-weighted one.
    """
    h_grid = zf_channel(obs)
    zf_obs = Observation(
        y=vectorize(obs.mask, h_grid),
        x_hat=np.ones(obs.mask.n_used, dtype=np.complex128),
        mask=obs.mask,
        noise_var=obs.noise_var,
    )
    return estimate(zf_obs, cfg)
