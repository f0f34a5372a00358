"""Device model on the sparse grid: steering arrays, path superposition,
amplitude-weighted signal model and its analytic derivatives.

Parameter conventions used throughout the package: the normalized delay tau
lives in (0, 1] and the normalized Doppler shift alpha in (-0.5, 0.5].  The
sampling axes are the integer sample indices (f[k] = k, t[n] = n), so each
parameter window spans exactly one unambiguous period (steering is exactly
1-periodic in both tau and alpha) and one resolution cell is 1/n_subcarriers
in tau and 1/n_symbols in alpha.  tau = 1 is the zero-delay alias.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import AllocationMask


@dataclass(frozen=True, eq=False)
class SamplingAxes:
    """Frequency/time sample positions of the coherent processing block."""

    f: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", np.asarray(self.f, dtype=np.float64))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=np.float64))
        for name, ax in (("f", self.f), ("t", self.t)):
            if ax.ndim != 1 or ax.size < 2:
                raise ConfigurationError(f"axis {name} must be a vector of length >= 2")
            if ax[0] != 0.0 or np.any(np.diff(ax) <= 0):
                raise ConfigurationError(f"axis {name} must start at 0 and strictly increase")

    @classmethod
    def for_grid(cls, n_subcarriers: int, n_symbols: int) -> "SamplingAxes":
        return cls(f=np.arange(n_subcarriers, dtype=np.float64),
                   t=np.arange(n_symbols, dtype=np.float64))

    @classmethod
    def for_mask(cls, mask: AllocationMask) -> "SamplingAxes":
        return cls.for_grid(mask.n_subcarriers, mask.n_symbols)


def used_axis_samples(mask: AllocationMask, axes: SamplingAxes):
    """Frequency and time sample values at the used REs, canonical order."""
    s_idx, c_idx = mask.used_index_arrays()
    return axes.f[c_idx], axes.t[s_idx]


def steering_full(tau: float, alpha: float, axes: SamplingAxes) -> np.ndarray:
    """Rank-one steering array exp(-2j*pi*f*tau) outer exp(+2j*pi*t*alpha)."""
    return np.outer(np.exp(-2j * np.pi * axes.f * tau), np.exp(2j * np.pi * axes.t * alpha))


def steering(tau: float, alpha: float, mask: AllocationMask, axes: SamplingAxes) -> np.ndarray:
    """Steering vector over the used REs (vectorized steering_full)."""
    f_u, t_u = used_axis_samples(mask, axes)
    return np.exp(-2j * np.pi * (f_u * tau - t_u * alpha))


def steering_matrix(taus, alphas, mask: AllocationMask, axes: SamplingAxes) -> np.ndarray:
    """Column-stacked steering vectors, one column per (tau, alpha) pair."""
    taus = np.atleast_1d(np.asarray(taus, dtype=np.float64))
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    f_u, t_u = used_axis_samples(mask, axes)
    return np.exp(-2j * np.pi * (np.outer(f_u, taus) - np.outer(t_u, alphas)))


def synth_channel(paths, mask: AllocationMask, axes: SamplingAxes) -> np.ndarray:
    """Noiseless channel samples over the used REs: sum of weighted steerings."""
    if paths.n_paths == 0:
        return np.zeros(mask.n_used, dtype=np.complex128)
    return steering_matrix(paths.taus, paths.alphas, mask, axes) @ paths.gammas


def signal_model(paths, x_hat: np.ndarray, mask: AllocationMask, axes: SamplingAxes) -> np.ndarray:
    """Expected noiseless received samples: transmit estimate times channel."""
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    if x_hat.shape != (mask.n_used,):
        raise ConfigurationError(f"x_hat must have length {mask.n_used}, got {x_hat.shape}")
    return x_hat * synth_channel(paths, mask, axes)


def jacobian(paths, x_hat: np.ndarray, mask: AllocationMask, axes: SamplingAxes) -> np.ndarray:
    """Derivatives of the signal model with respect to the real parameters.

    Column order (P paths): tau_1..tau_P, alpha_1..alpha_P, then the real and
    imaginary parts of the path weights in the same path order.  For path p
    with steering column a_p:

        d s / d tau_p     = x_hat * gamma_p * (-2j*pi*f) * a_p
        d s / d alpha_p   = x_hat * gamma_p * (+2j*pi*t) * a_p
        d s / d Re(gamma) = x_hat * a_p
        d s / d Im(gamma) = 1j * x_hat * a_p
    """
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    if x_hat.shape != (mask.n_used,):
        raise ConfigurationError(f"x_hat must have length {mask.n_used}, got {x_hat.shape}")
    p = paths.n_paths
    f_u, t_u = used_axis_samples(mask, axes)
    cols = steering_matrix(paths.taus, paths.alphas, mask, axes)
    weighted = x_hat[:, None] * cols
    jac = np.empty((mask.n_used, 4 * p), dtype=np.complex128)
    jac[:, 0:p] = weighted * paths.gammas * (-2j * np.pi) * f_u[:, None]
    jac[:, p:2 * p] = weighted * paths.gammas * (2j * np.pi) * t_u[:, None]
    jac[:, 2 * p:3 * p] = weighted
    jac[:, 3 * p:4 * p] = 1j * weighted
    return jac
