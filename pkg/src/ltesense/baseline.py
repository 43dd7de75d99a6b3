"""Conventional bistatic-radar reference math.

These are the closed-form numbers a classical radar treatment of the
same downlink signal would give: range resolution versus bandwidth and
bistatic angle, carrier wavelength, and the timing precision a receiver
would need to separate the bounced path from the direct one in a few
standard cell layouts.  They exist to be compared against, not used by,
the passive pipeline.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .scene import SPEED_OF_LIGHT, timing_precision


@dataclass(frozen=True)
class BistaticConfig:
    """Bandwidth and bistatic angle for the range-resolution formula."""

    bandwidth_hz: float
    bistatic_angle_rad: float = 0.0

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if not 0.0 <= self.bistatic_angle_rad < math.pi:
            raise ValueError("bistatic angle must lie in [0, pi); pi is the forward-scatter singularity")


@dataclass(frozen=True)
class CellSpec:
    """One cell layout for the timing-precision sweep."""

    name: str
    radius_m: float
    tower_height_a: float = 10.0
    ue_height_b: float = 2.0

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("cell name cannot be empty")
        if min(self.radius_m, self.tower_height_a, self.ue_height_b) <= 0:
            raise ValueError("cell dimensions must be positive")


DEFAULT_CELLS = (
    CellSpec("wide_area_small", 3000.0),
    CellSpec("wide_area_large", 6000.0),
    CellSpec("home_area_small", 500.0),
    CellSpec("home_area_large", 1000.0),
)

DEFAULT_BANDWIDTHS_HZ = (5e6, 10e6, 15e6, 20e6)


def bistatic_range_resolution(config: BistaticConfig) -> float:
    """Range resolution c / (2 B cos(beta / 2)) in meters."""
    return SPEED_OF_LIGHT / (2.0 * config.bandwidth_hz * math.cos(config.bistatic_angle_rad / 2.0))


def wavelength(frequency_hz: float) -> float:
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    return SPEED_OF_LIGHT / frequency_hz


def timing_precision_table(cells: Sequence[CellSpec] = DEFAULT_CELLS) -> tuple[tuple[str, float, float], ...]:
    """Per-cell (name, radius, arrival-time gap) rows.

    The bounce point sits midway along the cell radius; see
    :func:`ltesense.scene.timing_precision` for the geometry.
    """
    if not cells:
        raise ValueError("need at least one cell")
    return tuple(
        (
            cell.name,
            cell.radius_m,
            timing_precision(cell.tower_height_a, cell.ue_height_b, cell.radius_m),
        )
        for cell in cells
    )


def range_resolution_sweep(
    bandwidths_hz: Sequence[float] = DEFAULT_BANDWIDTHS_HZ,
    angles_rad: Iterable[float] | None = None,
) -> tuple[tuple[float, float, float], ...]:
    """(angle, bandwidth, resolution) rows over an angle/bandwidth grid.

    The default angle grid covers [0, pi) in 5-degree steps, stopping
    short of the forward-scatter singularity.
    """
    if angles_rad is None:
        angles_rad = tuple(math.radians(deg) for deg in range(0, 180, 5))
    angles = tuple(angles_rad)
    if not angles or not bandwidths_hz:
        raise ValueError("angle and bandwidth grids cannot be empty")
    rows = []
    for angle in angles:
        for bandwidth in bandwidths_hz:
            config = BistaticConfig(bandwidth_hz=bandwidth, bistatic_angle_rad=angle)
            rows.append((angle, bandwidth, bistatic_range_resolution(config)))
    return tuple(rows)


def save_resolution_sweep(path: str, rows: Sequence[tuple[float, float, float]]) -> None:
    """Write a range-resolution sweep as `beta_deg,B_MHz,delta_R_m`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta_deg", "B_MHz", "delta_R_m"])
        for angle_rad, bandwidth_hz, resolution_m in rows:
            writer.writerow(
                [repr(math.degrees(angle_rad)), repr(bandwidth_hz / 1e6), repr(resolution_m)]
            )


def save_timing_table(path: str, rows: Sequence[tuple[str, float, float]]) -> None:
    """Write a timing-precision table as `cell,radius_m,delta_t_s`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cell", "radius_m", "delta_t_s"])
        for name, radius_m, delta_t in rows:
            writer.writerow([name, repr(radius_m), repr(delta_t)])
