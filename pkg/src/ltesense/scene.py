"""Bistatic reflector scene: geometry, tapped-delay channel, timing math.

The scene is a transmitter tower of height ``a``, a receiver of height
``b`` at ground distance ``c``, and up to two corner reflectors standing
on a circle of radius ``D`` centred on the receiver's ground position.
Reflector arc positions are measured from the point of the circle nearest
the tower, so sweeps over the circumferential fraction ``x`` are
reproducible.  The first reflector always sits at arc offset 0 and the
second at arc length ``S = x * pi * D``.

The channel is applied per subcarrier as a coherent sum of delayed,
scaled paths.  That flat per-subcarrier treatment is valid because every
excess delay produced by this geometry is orders of magnitude shorter
than the cyclic prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .waveform import GridConfig, ResourceGrid, subcarrier_frequencies

# Fixed at 3e8 m/s (not the CODATA value) so derived timing tables are
# reproduced digit for digit.
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class SceneGeometry:
    """Placement of tower, receiver and reflectors, in metres.

    ``reflector_distance_d`` may be ``None`` only when no reflectors are
    present.  ``reflector_gain_scale`` is a unitless cross-section proxy
    multiplying the spreading-loss gain of each reflected path.
    """

    tower_height_a: float = 10.0
    ue_height_b: float = 2.0
    bs_ue_ground_distance_c: float = 500.0
    reflector_distance_d: float | None = None
    circumferential_fraction_x: float = 0.0
    reflector_count: int = 0
    reflector_gain_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.tower_height_a <= 0 or self.ue_height_b <= 0:
            raise ValueError("tower and receiver heights must be positive")
        if self.bs_ue_ground_distance_c <= 0:
            raise ValueError("bs_ue_ground_distance_c must be positive")
        if self.reflector_count not in (0, 1, 2):
            raise ValueError("reflector_count must be 0, 1 or 2")
        if self.reflector_count > 0:
            if self.reflector_distance_d is None or self.reflector_distance_d <= 0:
                raise ValueError("reflector_distance_d must be positive when reflectors exist")
        if not 0.0 <= self.circumferential_fraction_x <= 1.0:
            raise ValueError("circumferential_fraction_x must lie in [0, 1]")
        if self.reflector_gain_scale <= 0:
            raise ValueError("reflector_gain_scale must be positive")


@dataclass(frozen=True)
class PathSet:
    """Delay/gain pairs of a multipath channel; the direct path is first."""

    delays: np.ndarray
    gains: np.ndarray

    def __post_init__(self) -> None:
        delays = np.asarray(self.delays, dtype=float)
        gains = np.asarray(self.gains, dtype=np.complex128)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains", gains)
        if delays.ndim != 1 or delays.shape != gains.shape:
            raise ValueError("delays and gains must be 1-D arrays of equal length")
        if delays.size == 0:
            raise ValueError("a PathSet needs at least the direct path")
        if delays[0] != 0.0:
            raise ValueError("the direct path must come first with zero delay")
        if np.any(delays < 0):
            raise ValueError("path delays must be non-negative")
        if np.any(np.abs(gains[1:]) > np.abs(gains[0])):
            raise ValueError("reflected paths cannot exceed the direct-path gain")

    def __len__(self) -> int:
        return int(self.delays.size)


def intra_reflector_distance(distance_d: float, fraction_x: float) -> tuple[float, float]:
    """Arc length and straight-line separation of the two reflectors.

    For reflectors separated by the arc ``S = x * pi * D`` on a circle of
    radius ``D``, the chord between them is ``2 * D * sin(S / (2 * D))``.
    Returns ``(arc, chord)`` in metres.
    """
    if distance_d <= 0:
        raise ValueError("distance_d must be positive")
    if not 0.0 <= fraction_x <= 1.0:
        raise ValueError("fraction_x must lie in [0, 1]")
    arc = fraction_x * math.pi * distance_d
    chord = 2.0 * distance_d * math.sin(arc / (2.0 * distance_d))
    return arc, chord


def _path_geometry(scene: SceneGeometry, arc_offset: float) -> tuple[float, float]:
    """Tower->reflector and reflector->receiver 3-D distances in metres."""
    d = scene.reflector_distance_d
    angle = arc_offset / d
    ground_x = scene.bs_ue_ground_distance_c - d * math.cos(angle)
    ground_y = d * math.sin(angle)
    to_tower = math.sqrt(ground_x**2 + ground_y**2 + scene.tower_height_a**2)
    to_ue = math.sqrt(d**2 + scene.ue_height_b**2)
    return to_tower, to_ue


def direct_distance(scene: SceneGeometry) -> float:
    """3-D tower-top to receiver distance in metres."""
    return math.sqrt(
        scene.bs_ue_ground_distance_c**2
        + (scene.tower_height_a - scene.ue_height_b) ** 2
    )


def reflector_paths(scene: SceneGeometry, carrier_frequency: float) -> PathSet:
    """Build the scene's multipath profile.

    The direct path has zero excess delay and unit gain.  Each reflected
    path bounces at ground level off one reflector; its excess delay is
    the extra 3-D path length over the direct path divided by the model
    speed of light, its gain magnitude is
    ``reflector_gain_scale * (direct_length / path_length)**2`` and its
    phase is ``-2 * pi * carrier_frequency * excess_delay``.
    """
    if carrier_frequency <= 0:
        raise ValueError("carrier_frequency must be positive")
    delays = [0.0]
    gains = [1.0 + 0.0j]
    if scene.reflector_count > 0:
        if math.isclose(scene.reflector_distance_d, 0.0):
            raise ValueError("reflector placement coincides with the receiver")
        d_direct = direct_distance(scene)
        arc, _ = intra_reflector_distance(
            scene.reflector_distance_d, scene.circumferential_fraction_x
        )
        offsets = [0.0, arc][: scene.reflector_count]
        for arc_offset in offsets:
            to_tower, to_ue = _path_geometry(scene, arc_offset)
            length = to_tower + to_ue
            excess = (length - d_direct) / SPEED_OF_LIGHT
            magnitude = scene.reflector_gain_scale * (d_direct / length) ** 2
            phase = -2.0 * math.pi * carrier_frequency * excess
            delays.append(excess)
            gains.append(magnitude * complex(math.cos(phase), math.sin(phase)))
    return PathSet(np.array(delays), np.array(gains))


def response_at(paths: PathSet, frequencies: np.ndarray) -> np.ndarray:
    """Frequency response ``H(f) = sum_p gain_p * exp(-2j*pi*f*delay_p)``."""
    frequencies = np.asarray(frequencies, dtype=float)
    phases = np.exp(-2j * np.pi * np.outer(frequencies, paths.delays))
    return phases @ paths.gains


def frequency_response(paths: PathSet, config: GridConfig) -> np.ndarray:
    """Per-subcarrier response of ``paths`` on the grid of ``config``.

    Delays at or beyond the cyclic prefix would break the flat
    per-subcarrier channel model, so they are rejected.
    """
    if np.any(paths.delays >= config.cp_duration):
        raise ValueError("path delay exceeds the cyclic prefix duration")
    return response_at(paths, subcarrier_frequencies(config))


def apply_channel(
    grid: ResourceGrid,
    response: np.ndarray,
    snr_db: float,
    noise_seed: int,
) -> ResourceGrid:
    """Multiply each subcarrier by its response and add calibrated noise.

    The complex Gaussian noise variance is set per cell so that the mean
    received signal power over the subframe divided by the noise power
    equals ``10 ** (snr_db / 10)``.  ``snr_db = math.inf`` disables noise
    entirely.  The realization is a pure function of ``noise_seed``.
    """
    response = np.asarray(response, dtype=np.complex128)
    if response.shape != (grid.config.occupied_subcarriers,):
        raise ValueError(
            f"response must have one entry per occupied subcarrier, got {response.shape}"
        )
    received = grid.cells * response[:, np.newaxis]
    if not math.isinf(snr_db):
        signal_power = float(np.mean(np.abs(received) ** 2))
        noise_power = signal_power / 10.0 ** (snr_db / 10.0)
        rng = np.random.default_rng(noise_seed)
        scale = math.sqrt(noise_power / 2.0)
        noise = scale * (
            rng.standard_normal(received.shape) + 1j * rng.standard_normal(received.shape)
        )
        received = received + noise
    return ResourceGrid(received, grid.pilot_mask.copy(), grid.config)


def timing_precision(tower_height: float, receiver_height: float, ground_distance: float) -> float:
    """Arrival-time gap in seconds between the bounced and direct paths.

    For a bounce point midway along the ground separation ``c``::

        d1 = sqrt(a**2 + (c/2)**2)      tower top to bounce
        d2 = sqrt(b**2 + (c/2)**2)      bounce to receiver
        d3 = sqrt((a - b)**2 + c**2)    direct
        delta_t = (d1 + d2 - d3) / SPEED_OF_LIGHT

    This is the timing precision a conventional receiver would need in
    order to separate the two arrivals.
    """
    if tower_height <= 0 or receiver_height <= 0 or ground_distance <= 0:
        raise ValueError("all geometry arguments must be positive")
    bounce = ground_distance / 2.0
    d1 = math.sqrt(tower_height**2 + bounce**2)
    d2 = math.sqrt(receiver_height**2 + bounce**2)
    d3 = math.sqrt((tower_height - receiver_height) ** 2 + ground_distance**2)
    return (d1 + d2 - d3) / SPEED_OF_LIGHT
