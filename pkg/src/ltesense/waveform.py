"""Simplified LTE downlink subframe model.

A subframe is a grid of complex cells, ``occupied_subcarriers`` wide and 14
OFDM symbols long, carrying known reference pilots on the standard
cell-specific lattice: symbols 0 and 4 of each 7-symbol slot, every sixth
subcarrier, with the symbol-4 lattice shifted by 3 subcarriers.  Pilot
values are unit-magnitude QPSK points drawn from a generator seeded by
``cell_seed``; downstream channel estimation only needs the pilots to be
known at the receiver and flat in magnitude, so no scrambling-code detail
is modelled.

OFDM modulation maps the occupied subcarriers symmetrically around an
unused DC bin, applies an inverse FFT of size ``fft_size`` and prepends a
cyclic prefix per symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# First symbol of each slot, and the in-slot pilot symbol 4 positions later.
PILOT_SYMBOLS_FIRST = (0, 7)
PILOT_SYMBOLS_SECOND = (4, 11)
PILOT_SUBCARRIER_STRIDE = 6
LATTICE_SHIFT = 3

_QPSK = np.exp(1j * np.pi * (2.0 * np.arange(4) + 1.0) / 4.0)


@dataclass(frozen=True)
class GridConfig:
    """Static layout of the simulated downlink resource grid.

    Parameters
    ----------
    fft_size:
        IFFT length, must be a power of two.
    subcarrier_spacing:
        Subcarrier spacing in Hz (15 kHz in the modelled downlink).
    occupied_subcarriers:
        Number of active subcarriers; must be smaller than ``fft_size``
        and divisible by 6 so the pilot lattice tiles exactly.
    symbols_per_subframe:
        OFDM symbols per subframe; the two-slot pilot pattern assumes 14.
    cp_length:
        Cyclic prefix length in samples; ``None`` selects the uniform
        default of ``fft_size // 8``.
    cell_seed:
        Non-negative seed controlling pilot values and the lattice offset.
    carrier_frequency:
        RF carrier in Hz, used by scene geometry for path phases.
    """

    fft_size: int = 512
    subcarrier_spacing: float = 15_000.0
    occupied_subcarriers: int = 300
    symbols_per_subframe: int = 14
    cp_length: int | None = None
    cell_seed: int = 0
    carrier_frequency: float = 2.35e9

    def __post_init__(self) -> None:
        if self.fft_size <= 0 or (self.fft_size & (self.fft_size - 1)) != 0:
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.subcarrier_spacing <= 0:
            raise ValueError("subcarrier_spacing must be positive")
        if not 0 < self.occupied_subcarriers < self.fft_size:
            raise ValueError(
                "occupied_subcarriers must lie strictly between 0 and fft_size"
            )
        if self.occupied_subcarriers % PILOT_SUBCARRIER_STRIDE != 0:
            raise ValueError(
                f"occupied_subcarriers must be divisible by {PILOT_SUBCARRIER_STRIDE}, "
                f"got {self.occupied_subcarriers}"
            )
        if self.symbols_per_subframe != 14:
            raise ValueError("symbols_per_subframe is fixed at 14 (two 7-symbol slots)")
        if self.cp_length is None:
            object.__setattr__(self, "cp_length", self.fft_size // 8)
        if not 0 < self.cp_length <= self.fft_size:
            raise ValueError("cp_length must lie in (0, fft_size]")
        if self.cell_seed < 0:
            raise ValueError("cell_seed must be non-negative")
        if self.carrier_frequency <= 0:
            raise ValueError("carrier_frequency must be positive")

    @property
    def sample_rate(self) -> float:
        """Baseband sample rate in Hz."""
        return self.subcarrier_spacing * self.fft_size

    @property
    def cp_duration(self) -> float:
        """Cyclic prefix duration in seconds; bounds usable path delays."""
        return self.cp_length / self.sample_rate

    @property
    def samples_per_subframe(self) -> int:
        return self.symbols_per_subframe * (self.fft_size + self.cp_length)

    @property
    def pilot_symbol_indices(self) -> tuple[int, ...]:
        return tuple(sorted(PILOT_SYMBOLS_FIRST + PILOT_SYMBOLS_SECOND))


@dataclass
class ResourceGrid:
    """One subframe of complex cells plus the pilot lattice bookkeeping."""

    cells: np.ndarray
    pilot_mask: np.ndarray
    config: GridConfig

    def __post_init__(self) -> None:
        expected = (self.config.occupied_subcarriers, self.config.symbols_per_subframe)
        self.cells = np.asarray(self.cells, dtype=np.complex128)
        self.pilot_mask = np.asarray(self.pilot_mask, dtype=bool)
        if self.cells.shape != expected:
            raise ValueError(f"cells must have shape {expected}, got {self.cells.shape}")
        if self.pilot_mask.shape != expected:
            raise ValueError("pilot_mask shape must match cells")

    def energy(self) -> float:
        return float(np.sum(np.abs(self.cells) ** 2))

    def validate(self, require_unit_pilots: bool = True) -> None:
        """Check the pilot lattice; transmit grids also need |pilot| = 1."""
        if not np.array_equal(self.pilot_mask, pilot_mask(self.config)):
            raise ValueError("pilot_mask does not match the configured lattice")
        if require_unit_pilots:
            mags = np.abs(self.cells[self.pilot_mask])
            if mags.size and np.max(np.abs(mags - 1.0)) > 1e-12:
                raise ValueError("pilot cells must have unit magnitude")


def _lattice_offset(config: GridConfig, symbol: int) -> int:
    base = config.cell_seed % PILOT_SUBCARRIER_STRIDE
    if symbol in PILOT_SYMBOLS_FIRST:
        return base
    return (base + LATTICE_SHIFT) % PILOT_SUBCARRIER_STRIDE


def generate_crs(config: GridConfig) -> list[tuple[int, int, complex]]:
    """Return the pilot map as ``(subcarrier, symbol, value)`` triples.

    Values are unit-magnitude QPSK points drawn deterministically from
    ``cell_seed`` in (symbol, subcarrier) order, so repeated calls agree
    exactly.  Each pilot symbol carries ``occupied_subcarriers / 6``
    pilots regardless of the seed-dependent lattice offset.
    """
    rng = np.random.default_rng(config.cell_seed)
    pilots: list[tuple[int, int, complex]] = []
    for symbol in config.pilot_symbol_indices:
        offset = _lattice_offset(config, symbol)
        subcarriers = np.arange(offset, config.occupied_subcarriers, PILOT_SUBCARRIER_STRIDE)
        values = _QPSK[rng.integers(0, 4, size=subcarriers.size)]
        pilots.extend(
            (int(k), symbol, complex(v)) for k, v in zip(subcarriers, values)
        )
    return pilots


def pilot_mask(config: GridConfig) -> np.ndarray:
    """Boolean grid marking the pilot lattice of ``config``."""
    mask = np.zeros((config.occupied_subcarriers, config.symbols_per_subframe), dtype=bool)
    for symbol in config.pilot_symbol_indices:
        offset = _lattice_offset(config, symbol)
        mask[offset::PILOT_SUBCARRIER_STRIDE, symbol] = True
    return mask


def build_subframe_grid(config: GridConfig, payload_seed: int) -> ResourceGrid:
    """Assemble a transmit grid: CRS pilots plus seeded QPSK payload.

    Changing ``payload_seed`` changes only the non-pilot cells.
    """
    rng = np.random.default_rng(payload_seed)
    shape = (config.occupied_subcarriers, config.symbols_per_subframe)
    cells = _QPSK[rng.integers(0, 4, size=shape)]
    mask = np.zeros(shape, dtype=bool)
    for k, symbol, value in generate_crs(config):
        cells[k, symbol] = value
        mask[k, symbol] = True
    grid = ResourceGrid(cells, mask, config)
    grid.validate()
    return grid


def subcarrier_frequencies(config: GridConfig) -> np.ndarray:
    """Baseband frequency in Hz of each occupied subcarrier.

    The lower half maps below DC and the upper half above it; the DC bin
    itself is never occupied, matching the OFDM mapping used here.
    """
    half = config.occupied_subcarriers // 2
    idx = np.arange(config.occupied_subcarriers)
    offsets = np.where(idx < half, idx - half, idx - half + 1)
    return offsets * config.subcarrier_spacing


def _fft_bins(config: GridConfig) -> np.ndarray:
    half = config.occupied_subcarriers // 2
    idx = np.arange(config.occupied_subcarriers)
    offsets = np.where(idx < half, idx - half, idx - half + 1)
    return offsets % config.fft_size


def ofdm_modulate(grid: ResourceGrid) -> np.ndarray:
    """Complex baseband samples for one subframe, CP included per symbol.

    ``np.fft.ifft`` carries the 1/N factor, so the time-domain energy of a
    symbol body equals the corresponding grid column energy divided by
    ``fft_size``.
    """
    config = grid.config
    spectrum = np.zeros((config.symbols_per_subframe, config.fft_size), dtype=np.complex128)
    spectrum[:, _fft_bins(config)] = grid.cells.T
    bodies = np.fft.ifft(spectrum, axis=1)
    with_cp = np.concatenate([bodies[:, config.fft_size - config.cp_length:], bodies], axis=1)
    return with_cp.ravel()


def ofdm_demodulate(samples: np.ndarray, config: GridConfig) -> ResourceGrid:
    """Invert :func:`ofdm_modulate`: strip CPs, FFT, gather occupied bins."""
    samples = np.asarray(samples, dtype=np.complex128)
    expected = config.samples_per_subframe
    if samples.ndim != 1 or samples.size != expected:
        raise ValueError(
            f"sample vector must be 1-D with length {expected}, got shape {samples.shape}"
        )
    blocks = samples.reshape(config.symbols_per_subframe, config.fft_size + config.cp_length)
    spectrum = np.fft.fft(blocks[:, config.cp_length:], axis=1)
    cells = spectrum[:, _fft_bins(config)].T
    return ResourceGrid(np.ascontiguousarray(cells), pilot_mask(config), config)
