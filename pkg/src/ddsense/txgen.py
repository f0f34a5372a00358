"""Transmit-side generation: QAM alphabets, pilot sequences, composite frames.

The transmit grid is the sum of an amplitude-weighted data part and an
amplitude-weighted pilot part with disjoint supports; ``eta`` scales data REs,
``beta`` scales pilot REs (pilot boosting means beta > eta).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, FormatError
from .grid import AllocationMask, mask_from_text, mask_to_text

SUPPORTED_QAM_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class ModulationConfig:
    """Square QAM alphabet; always normalized to unit average power."""

    qam_order: int = 256
    unit_power: bool = True

    def __post_init__(self):
        if self.qam_order not in SUPPORTED_QAM_ORDERS:
            raise ConfigurationError(
                f"unsupported QAM order {self.qam_order}; supported: {SUPPORTED_QAM_ORDERS}"
            )
        if not self.unit_power:
            raise ConfigurationError("constellations are always unit-power normalized")


def _gray_decode(g):
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def make_constellation(config: ModulationConfig) -> np.ndarray:
    """Square Gray-mapped QAM points, unit average power, fixed ordering.

    Point k splits its bits into an I half (high bits) and a Q half (low
    bits); each half is Gray-decoded to an amplitude level.  The returned
    order is by symbol index k, so it is deterministic.
    """
    order = config.qam_order
    side = math.isqrt(order)
    bits_per_axis = side.bit_length() - 1
    levels = np.array([2 * _gray_decode(v) - (side - 1) for v in range(side)], dtype=np.float64)
    i_idx = np.arange(order) >> bits_per_axis
    q_idx = np.arange(order) & (side - 1)
    points = levels[i_idx] + 1j * levels[q_idx]
    # unit average power: mean |p|^2 over a square grid is 2(side^2-1)/3
    points /= math.sqrt(2.0 * (side * side - 1) / 3.0)
    return points


@dataclass
class Frame:
    """Composite transmit grid with its mask and amplitude weights."""

    grid: np.ndarray
    mask: AllocationMask
    eta: float
    beta: float

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.complex128)
        if self.grid.shape != (self.mask.n_subcarriers, self.mask.n_symbols):
            raise ConfigurationError("frame grid shape does not match its mask")


def generate_frame(mask: AllocationMask, mod: ModulationConfig, eta: float, beta: float,
                   seed: int) -> Frame:
    """Draw data REs i.i.d. from the constellation and pilots from seeded QPSK.

    Data REs get ``eta * constellation point``; pilot REs get ``beta`` times a
    unit-modulus pseudo-random QPSK symbol.  Pilot and data draws use
    independent child streams of ``seed``, so the pilot part never depends on
    how much data is consumed.
    """
    if not (0.0 <= eta < 1.0 and 0.0 <= beta < 1.0):
        raise ConfigurationError(f"eta and beta must lie in [0, 1), got {eta}, {beta}")
    pilot_ss, data_ss = np.random.SeedSequence(seed).spawn(2)
    pilot_rng = np.random.default_rng(pilot_ss)
    data_rng = np.random.default_rng(data_ss)

    grid = np.zeros((mask.n_subcarriers, mask.n_symbols), dtype=np.complex128)
    if mask.pilots:
        s_idx, c_idx = mask.pilot_index_arrays()
        quadrants = pilot_rng.integers(0, 4, size=len(mask.pilots))
        phases = (2 * quadrants + 1) * (np.pi / 4.0)
        grid[c_idx, s_idx] = beta * np.exp(1j * phases)
    if mask.data:
        s_idx, c_idx = mask.data_index_arrays()
        points = make_constellation(mod)
        picks = data_rng.integers(0, mod.qam_order, size=len(mask.data))
        grid[c_idx, s_idx] = eta * points[picks]
    return Frame(grid=grid, mask=mask, eta=eta, beta=beta)


# --- structured text export/import -----------------------------------------
#
# First line: "eta beta"; then the embedded mask block (header + P/D lines);
# then one "s c re im" line per used RE in canonical order.


def frame_to_text(frame: Frame) -> str:
    lines = [f"{frame.eta:.17g} {frame.beta:.17g}"]
    lines.append(mask_to_text(frame.mask).rstrip("\n"))
    for s, c in frame.mask.all_used:
        v = frame.grid[c, s]
        lines.append(f"{s} {c} {v.real:.17g} {v.imag:.17g}")
    return "\n".join(lines) + "\n"


def frame_from_text(text: str) -> Frame:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) < 2:
        raise FormatError("frame text too short")
    try:
        eta, beta = (float(p) for p in lines[0].split())
    except ValueError as exc:
        raise FormatError("frame header must be 'eta beta'") from exc
    mask_lines = [lines[1]]
    i = 2
    while i < len(lines) and lines[i].split()[0] in ("P", "D"):
        mask_lines.append(lines[i])
        i += 1
    mask = mask_from_text("\n".join(mask_lines))
    grid = np.zeros((mask.n_subcarriers, mask.n_symbols), dtype=np.complex128)
    seen = []
    for line in lines[i:]:
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"expected 's c re im', got {line!r}")
        s, c = int(parts[0]), int(parts[1])
        grid[c, s] = float(parts[2]) + 1j * float(parts[3])
        seen.append((s, c))
    if tuple(seen) != mask.all_used:
        raise FormatError("frame value lines do not cover the mask in canonical order")
    return Frame(grid=grid, mask=mask, eta=eta, beta=beta)


def save_frame(frame: Frame, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(frame_to_text(frame))


def load_frame(path) -> Frame:
    with open(path, "r", encoding="ascii") as fh:
        return frame_from_text(fh.read())
