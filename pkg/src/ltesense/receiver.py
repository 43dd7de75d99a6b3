"""Pilot-based channel recovery and impulse-response features.

Estimation is least squares per pilot cell (received divided by known
transmitted value), averaged across the pilot-bearing symbols of the
subframe.  The merged estimates, ordered by subcarrier, are turned into a
channel impulse response by a unitary inverse DFT; the feature a detector
consumes is the unit-norm magnitude of the first taps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveform import ResourceGrid

DEFAULT_FEATURE_LENGTH = 32

# Unit-norm tolerance for a valid feature vector.
_NORM_TOL = 1e-9


@dataclass
class CirFeature:
    """Unit-norm magnitudes of the leading impulse-response taps.

    A zero impulse response cannot be normalized; such features keep
    all-zero taps and carry ``degenerate=True``.
    """

    taps: np.ndarray
    degenerate: bool = False
    meta: dict | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=float)
        if self.taps.ndim != 1 or self.taps.size == 0:
            raise ValueError("taps must be a non-empty 1-D array")
        if np.any(self.taps < 0):
            raise ValueError("tap magnitudes cannot be negative")
        norm = float(np.linalg.norm(self.taps))
        if self.degenerate:
            if norm != 0.0:
                raise ValueError("degenerate features must be all-zero")
        elif abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"feature norm must be 1 within {_NORM_TOL}, got {norm}")


def estimate_channel_ls(
    received: ResourceGrid, pilot_map: list[tuple[int, int, complex]]
) -> np.ndarray:
    """Least-squares channel estimates per pilot subcarrier.

    Each pilot cell contributes ``received / transmitted``; estimates on
    the same subcarrier from different pilot symbols are averaged.  The
    result merges both shifted lattices into one array ordered by
    ascending subcarrier index.
    """
    if not pilot_map:
        raise ValueError("pilot_map is empty")
    ks = np.array([k for k, _, _ in pilot_map], dtype=int)
    ls = np.array([l for _, l, _ in pilot_map], dtype=int)
    values = np.array([v for _, _, v in pilot_map], dtype=np.complex128)

    claimed = np.zeros_like(received.pilot_mask)
    claimed[ks, ls] = True
    if not np.array_equal(claimed, received.pilot_mask):
        raise ValueError("pilot map does not match the grid's pilot lattice")

    raw = received.cells[ks, ls] / values
    order = np.argsort(ks, kind="stable")
    unique_ks, inverse, counts = np.unique(ks[order], return_inverse=True, return_counts=True)
    acc = np.zeros(unique_ks.size, dtype=np.complex128)
    np.add.at(acc, inverse, raw[order])
    return acc / counts


def cir_from_estimates(estimates: np.ndarray) -> np.ndarray:
    """Channel impulse response as the unitary inverse DFT of the estimates.

    With the ``ortho`` normalization a constant estimate ``c`` over N
    subcarriers yields a single tap of magnitude ``|c| * sqrt(N)``.
    """
    estimates = np.asarray(estimates, dtype=np.complex128)
    if estimates.ndim != 1 or estimates.size == 0:
        raise ValueError("estimates must be a non-empty 1-D array")
    return np.fft.ifft(estimates, norm="ortho")


def extract_feature(
    cir: np.ndarray, length: int = DEFAULT_FEATURE_LENGTH, meta: dict | None = None
) -> CirFeature:
    """Unit-norm magnitude of the first ``length`` impulse-response taps."""
    cir = np.asarray(cir, dtype=np.complex128)
    if length <= 0:
        raise ValueError("length must be positive")
    if length > cir.size:
        raise ValueError(f"length {length} exceeds tap count {cir.size}")
    magnitudes = np.abs(cir[:length])
    norm = float(np.linalg.norm(magnitudes))
    if norm == 0.0:
        return CirFeature(np.zeros(length), degenerate=True, meta=meta)
    return CirFeature(magnitudes / norm, degenerate=False, meta=meta)
