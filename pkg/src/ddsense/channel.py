"""Multipath delay-Doppler channel simulation and noisy observation.

The received grid is the elementwise product of the transmit grid with the
synthesized channel transfer function, plus circular complex Gaussian noise on
the used REs only.  SNR is defined as mean received signal power per used RE
over the noise variance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, FormatError
from .grid import AllocationMask, scatter, vectorize
from .model import SamplingAxes, synth_channel
from .txgen import Frame


def wrap_delay(x):
    """Wrap into (0, 1]; the zero-delay alias is represented as 1."""
    x = np.asarray(x, dtype=np.float64)
    w = x - np.floor(x)
    w = np.where(w == 0.0, 1.0, w)
    return w if w.ndim else float(w)


def wrap_doppler(x):
    """Wrap into (-0.5, 0.5]."""
    x = np.asarray(x, dtype=np.float64)
    w = x - np.floor(x + 0.5)
    w = np.where(w == -0.5, 0.5, w)
    return w if w.ndim else float(w)


def wrap_difference(x):
    """Wrapped difference on the unit circle, in (-0.5, 0.5]."""
    return wrap_doppler(x)


@dataclass
class PathSet:
    """Per-path normalized delay, Doppler shift and complex weight.

    Ground truth and estimates share this type.  Delays lie in (0, 1] and
    Doppler shifts in (-0.5, 0.5].
    """

    taus: np.ndarray
    alphas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        self.taus = np.atleast_1d(np.asarray(self.taus, dtype=np.float64))
        self.alphas = np.atleast_1d(np.asarray(self.alphas, dtype=np.float64))
        self.gammas = np.atleast_1d(np.asarray(self.gammas, dtype=np.complex128))
        if not (self.taus.shape == self.alphas.shape == self.gammas.shape):
            raise ConfigurationError("taus, alphas and gammas must have equal lengths")
        if self.taus.size:
            if np.any(self.taus <= 0.0) or np.any(self.taus > 1.0):
                raise ConfigurationError("delays must lie in (0, 1]")
            if np.any(self.alphas <= -0.5) or np.any(self.alphas > 0.5):
                raise ConfigurationError("Doppler shifts must lie in (-0.5, 0.5]")

    @property
    def n_paths(self) -> int:
        return self.taus.size

    @classmethod
    def empty(cls) -> "PathSet":
        return cls(taus=np.empty(0), alphas=np.empty(0), gammas=np.empty(0, dtype=np.complex128))

    def sorted_by_weight(self) -> "PathSet":
        """Paths reordered by descending weight magnitude."""
        order = np.argsort(-np.abs(self.gammas), kind="stable")
        return PathSet(self.taus[order], self.alphas[order], self.gammas[order])


@dataclass
class Observation:
    """Vectorized received samples plus the transmit estimate and noise level."""

    y: np.ndarray
    x_hat: np.ndarray
    mask: AllocationMask
    noise_var: float

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.complex128)
        self.x_hat = np.asarray(self.x_hat, dtype=np.complex128)
        if self.y.shape != (self.mask.n_used,) or self.x_hat.shape != (self.mask.n_used,):
            raise ConfigurationError("y and x_hat must have length mask.n_used")
        if not self.noise_var > 0.0:
            raise ConfigurationError("noise_var must be positive")


def propagate(frame: Frame, paths: PathSet) -> np.ndarray:
    """Noiseless received grid: transmit grid times channel, zero off the mask."""
    axes = SamplingAxes.for_mask(frame.mask)
    h = synth_channel(paths, frame.mask, axes)
    x = vectorize(frame.mask, frame.grid)
    return scatter(frame.mask, x * h)


def observe(frame: Frame, paths: PathSet, snr_db: float, seed: int) -> Observation:
    """Add circular complex Gaussian noise at the requested per-RE SNR.

    ``snr_db = 10*log10(mean |signal|^2 / noise_var)`` over the used REs.
    Pass ``snr_db=math.inf`` to disable noise; the recorded noise variance is
    then the placeholder 1.0 (it only scales the estimator cost).  The
    transmit estimate is the vectorized transmit grid (perfect decoding).
    """
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ConfigurationError(f"invalid snr_db: {snr_db}")
    axes = SamplingAxes.for_mask(frame.mask)
    x = vectorize(frame.mask, frame.grid)
    signal = x * synth_channel(paths, frame.mask, axes)
    if math.isinf(snr_db):
        return Observation(y=signal.copy(), x_hat=x, mask=frame.mask, noise_var=1.0)
    power = float(np.mean(np.abs(signal) ** 2))
    if power == 0.0:
        raise ConfigurationError("zero signal energy; finite SNR is undefined")
    noise_var = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.normal(scale=math.sqrt(noise_var / 2.0), size=(frame.mask.n_used, 2))
    y = signal + noise[:, 0] + 1j * noise[:, 1]
    return Observation(y=y, x_hat=x, mask=frame.mask, noise_var=noise_var)


# --- structured text export/import -----------------------------------------
#
# Header line: "n_used noise_var"; then one line per used RE in canonical
# order: "s c y_re y_im x_re x_im".  All floats use 17 significant digits so
# the decimal round trip is bit exact.


def observation_to_text(obs: Observation) -> str:
    lines = [f"{obs.mask.n_used} {obs.noise_var:.17g}"]
    for i, (s, c) in enumerate(obs.mask.all_used):
        y = obs.y[i]
        x = obs.x_hat[i]
        lines.append(f"{s} {c} {y.real:.17g} {y.imag:.17g} {x.real:.17g} {x.imag:.17g}")
    return "\n".join(lines) + "\n"


def observation_from_text(text: str, mask: AllocationMask) -> Observation:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise FormatError("observation text is empty")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("observation header must be 'n_used noise_var'")
    n_used = int(head[0])
    noise_var = float(head[1])
    if n_used != mask.n_used:
        raise FormatError(f"observation has {n_used} REs but the mask has {mask.n_used}")
    if len(lines) - 1 != n_used:
        raise FormatError(f"expected {n_used} sample lines, found {len(lines) - 1}")
    y = np.empty(n_used, dtype=np.complex128)
    x = np.empty(n_used, dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(f"expected 's c y_re y_im x_re x_im', got {line!r}")
        if (int(parts[0]), int(parts[1])) != mask.all_used[i]:
            raise FormatError(f"sample line {i} does not follow the mask's canonical order")
        y[i] = float(parts[2]) + 1j * float(parts[3])
        x[i] = float(parts[4]) + 1j * float(parts[5])
    return Observation(y=y, x_hat=x, mask=mask, noise_var=noise_var)


def save_observation(obs: Observation, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(observation_to_text(obs))


def load_observation(path, mask: AllocationMask) -> Observation:
    with open(path, "r", encoding="ascii") as fh:
        return observation_from_text(fh.read(), mask)
