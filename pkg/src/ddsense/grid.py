"""Sparse time-frequency resource allocation.

Builds the pilot lattice, the randomized data occupancy and the TDD gaps that
together define which resource elements (REs) of the n_subcarriers x n_symbols
grid exist.  Index pairs are always ``(symbol, subcarrier)`` and the canonical
ordering is symbol-major, then subcarrier; every vectorization in the package
uses that order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, FormatError


def _round_half_away(x):
    # deterministic rounding for the per-symbol occupancy quota
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


@dataclass(frozen=True)
class GridConfig:
    """Geometry of the resource allocation.

    occupancy is the fraction of subcarriers active per data-bearing symbol;
    pilots sit on a regular lattice (every pilot_spacing_time-th non-gap
    symbol, every pilot_spacing_freq-th subcarrier) and count toward the
    occupancy quota.  Symbols listed in tdd_gap_symbols carry nothing.
    """

    n_subcarriers: int
    n_symbols: int
    occupancy: float = 1.0
    pilot_spacing_freq: int = 4
    pilot_spacing_time: int = 4
    tdd_gap_symbols: frozenset = frozenset()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tdd_gap_symbols", frozenset(int(s) for s in self.tdd_gap_symbols))
        if self.n_subcarriers < 2 or self.n_symbols < 2:
            raise ConfigurationError("grid needs at least 2 subcarriers and 2 symbols")
        if not 0.0 < self.occupancy <= 1.0:
            raise ConfigurationError(f"occupancy must lie in (0, 1], got {self.occupancy}")
        if self.pilot_spacing_freq < 1 or self.pilot_spacing_time < 1:
            raise ConfigurationError("pilot spacings must be positive integers")
        bad = [s for s in self.tdd_gap_symbols if not 0 <= s < self.n_symbols]
        if bad:
            raise ConfigurationError(f"tdd_gap_symbols out of range: {sorted(bad)}")
        if _round_half_away(self.occupancy * self.n_subcarriers) < 1:
            raise ConfigurationError("occupancy quota rounds below one RE per symbol")

    @property
    def quota_per_symbol(self):
        """Active REs per non-gap symbol (round half away from zero)."""
        return _round_half_away(self.occupancy * self.n_subcarriers)


@dataclass(frozen=True, eq=True)
class AllocationMask:
    """Which REs carry pilots, data, or nothing.

    ``pilots`` and ``data`` are disjoint tuples of (symbol, subcarrier) pairs;
    ``all_used`` is their union in the canonical symbol-major order and is the
    order of every vectorized quantity in the package.
    """

    n_subcarriers: int
    n_symbols: int
    pilots: tuple
    data: tuple
    seed: int = 0
    all_used: tuple = field(init=False, compare=False, repr=False)
    n_used: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        pilots = tuple(sorted((int(s), int(c)) for s, c in self.pilots))
        data = tuple(sorted((int(s), int(c)) for s, c in self.data))
        object.__setattr__(self, "pilots", pilots)
        object.__setattr__(self, "data", data)
        overlap = set(pilots) & set(data)
        if overlap:
            raise ConfigurationError(f"pilot and data sets overlap: {sorted(overlap)[:4]}")
        if len(set(pilots)) != len(pilots) or len(set(data)) != len(data):
            raise ConfigurationError("duplicate resource elements in mask")
        for s, c in pilots + data:
            if not (0 <= s < self.n_symbols and 0 <= c < self.n_subcarriers):
                raise ConfigurationError(f"resource element ({s}, {c}) outside the grid")
        all_used = tuple(sorted(pilots + data))
        object.__setattr__(self, "all_used", all_used)
        object.__setattr__(self, "n_used", len(all_used))
        if not all_used:
            raise ConfigurationError("mask contains no resource elements")

    def used_index_arrays(self):
        """(symbol_indices, subcarrier_indices) over all_used, canonical order."""
        arr = np.asarray(self.all_used, dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def pilot_index_arrays(self):
        arr = np.asarray(self.pilots, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def data_index_arrays(self):
        arr = np.asarray(self.data, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]


def build_mask(config: GridConfig) -> AllocationMask:
    """Place pilots on the lattice and draw data REs per non-gap symbol.

    Each non-gap symbol ends up with exactly ``config.quota_per_symbol``
    active REs (pilots count toward the quota); data positions are drawn
    uniformly at random with the configured seed.
    """
    non_gap = [s for s in range(config.n_symbols) if s not in config.tdd_gap_symbols]
    if not non_gap:
        raise ConfigurationError("every symbol is a TDD gap; the grid is empty")
    pilot_symbols = set(non_gap[:: config.pilot_spacing_time])
    pilot_subcarriers = list(range(0, config.n_subcarriers, config.pilot_spacing_freq))
    quota = config.quota_per_symbol

    rng = np.random.default_rng(config.seed)
    pilots = []
    data = []
    for s in non_gap:
        on_pilot_symbol = s in pilot_symbols
        pilot_cs = pilot_subcarriers if on_pilot_symbol else []
        if len(pilot_cs) > quota:
            raise ConfigurationError(
                f"occupancy quota {quota} is below the {len(pilot_cs)} pilots on symbol {s}"
            )
        pilots.extend((s, c) for c in pilot_cs)
        remaining = [c for c in range(config.n_subcarriers) if c not in pilot_cs]
        need = quota - len(pilot_cs)
        if need > 0:
            chosen = rng.choice(len(remaining), size=need, replace=False)
            data.extend((s, remaining[i]) for i in sorted(chosen))
    return AllocationMask(
        n_subcarriers=config.n_subcarriers,
        n_symbols=config.n_symbols,
        pilots=tuple(pilots),
        data=tuple(data),
        seed=config.seed,
    )


def vectorize(mask: AllocationMask, grid: np.ndarray) -> np.ndarray:
    """Stack grid values over the used REs in canonical order.

    ``grid`` is (n_subcarriers, n_symbols); entry i of the result is
    ``grid[c_i, s_i]`` for the i-th (s, c) pair of ``mask.all_used``.
    """
    grid = np.asarray(grid)
    if grid.shape != (mask.n_subcarriers, mask.n_symbols):
        raise ConfigurationError(
            f"grid shape {grid.shape} does not match mask "
            f"({mask.n_subcarriers}, {mask.n_symbols})"
        )
    s_idx, c_idx = mask.used_index_arrays()
    return np.ascontiguousarray(grid[c_idx, s_idx])


def scatter(mask: AllocationMask, values: np.ndarray) -> np.ndarray:
    """Inverse of vectorize: place values on the used REs, zero elsewhere."""
    values = np.asarray(values)
    if values.shape != (mask.n_used,):
        raise ConfigurationError(f"expected {mask.n_used} values, got {values.shape}")
    grid = np.zeros((mask.n_subcarriers, mask.n_symbols), dtype=np.result_type(values, np.complex128))
    s_idx, c_idx = mask.used_index_arrays()
    grid[c_idx, s_idx] = values
    return grid


# --- structured text export/import -----------------------------------------
#
# Header line: "n_subcarriers n_symbols seed", then one line per used RE in
# canonical order: "P s c" for pilots, "D s c" for data.  Lines starting with
# '#' are comments.


def mask_to_text(mask: AllocationMask) -> str:
    pilots = set(mask.pilots)
    lines = [f"{mask.n_subcarriers} {mask.n_symbols} {mask.seed}"]
    for s, c in mask.all_used:
        tag = "P" if (s, c) in pilots else "D"
        lines.append(f"{tag} {s} {c}")
    return "\n".join(lines) + "\n"


def mask_from_text(text: str) -> AllocationMask:
    header = None
    pilots = []
    data = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 3:
                raise FormatError(f"line {lineno}: expected 'n_subcarriers n_symbols seed'")
            try:
                header = tuple(int(p) for p in parts)
            except ValueError as exc:
                raise FormatError(f"line {lineno}: non-integer header field") from exc
            continue
        if len(parts) != 3 or parts[0] not in ("P", "D"):
            raise FormatError(f"line {lineno}: expected 'P s c' or 'D s c'")
        try:
            pair = (int(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: non-integer index") from exc
        (pilots if parts[0] == "P" else data).append(pair)
    if header is None:
        raise FormatError("mask text has no header line")
    try:
        return AllocationMask(
            n_subcarriers=header[0],
            n_symbols=header[1],
            pilots=tuple(pilots),
            data=tuple(data),
            seed=header[2],
        )
    except ConfigurationError as exc:
        raise FormatError(f"invalid mask: {exc}") from exc


def save_mask(mask: AllocationMask, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(mask_to_text(mask))


def load_mask(path) -> AllocationMask:
    with open(path, "r", encoding="ascii") as fh:
        return mask_from_text(fh.read())
