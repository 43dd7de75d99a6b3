"""Simulation campaigns: scenario grids, reading records, dataset files.

A campaign sweeps reflector configurations and produces one recording per
scenario: class TWO gets one recording per (distance, fraction) pair,
class ONE one per distance with its reflector at arc offset 0, and class
NONE a single reflector-free recording.  Every reading inside a recording
is an independent noise realization of the same scene, seeded by a stable
hash of (master_seed, scenario id, reading index) so records can be
generated in any order, or in parallel, without changing the result.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .receiver import DEFAULT_FEATURE_LENGTH, cir_from_estimates, estimate_channel_ls, extract_feature
from .scene import SceneGeometry, apply_channel, frequency_response, reflector_paths
from .waveform import GridConfig, build_subframe_grid, generate_crs

LABEL_NONE = "NONE"
LABEL_ONE = "ONE"
LABEL_TWO = "TWO"
ALL_LABELS = (LABEL_NONE, LABEL_ONE, LABEL_TWO)

DEFAULT_DISTANCES = (0.5, 2.0, 4.0, 7.0, 10.0)
DEFAULT_FRACTIONS = (0.0, 0.10, 0.25, 0.50, 0.75, 1.00)


@dataclass(frozen=True)
class ScenarioSpec:
    """Campaign description: scenario grid, readings, noise and seeding."""

    distances_d: tuple[float, ...] = DEFAULT_DISTANCES
    fractions_x: tuple[float, ...] = DEFAULT_FRACTIONS
    readings_per_recording: int = 1500
    snr_db: float = 7.0
    classes: tuple[str, ...] = ALL_LABELS
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "distances_d", tuple(float(d) for d in self.distances_d))
        object.__setattr__(self, "fractions_x", tuple(float(x) for x in self.fractions_x))
        object.__setattr__(self, "classes", tuple(self.classes))
        if not self.distances_d or any(d <= 0 for d in self.distances_d):
            raise ValueError("distances_d must be a non-empty tuple of positive values")
        if len(set(self.distances_d)) != len(self.distances_d):
            raise ValueError("distances_d must be distinct")
        if not self.fractions_x or any(not 0.0 <= x <= 1.0 for x in self.fractions_x):
            raise ValueError("fractions_x must be a non-empty tuple of values in [0, 1]")
        if len(set(self.fractions_x)) != len(self.fractions_x):
            raise ValueError("fractions_x must be distinct")
        if self.readings_per_recording < 1:
            raise ValueError("readings_per_recording must be at least 1")
        if not self.classes or any(c not in ALL_LABELS for c in self.classes):
            raise ValueError(f"classes must be a non-empty subset of {ALL_LABELS}")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("classes must be distinct")


@dataclass(frozen=True)
class RecordingSpec:
    """One scene to be recorded: label plus reflector placement."""

    scenario_id: str
    label: str
    distance_d: float
    fraction_x: float
    reflector_count: int


@dataclass(eq=False)
class DatasetRecord:
    """A single reading: scenario metadata plus its feature taps."""

    scenario_id: str
    label: str
    distance_d: float
    fraction_x: float
    reading_idx: int
    seed: int
    taps: np.ndarray

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=float)
        if self.label not in ALL_LABELS:
            raise ValueError(f"unknown class label {self.label!r}")


@dataclass(eq=False)
class Dataset:
    """Ordered reading records with a fixed feature length."""

    records: list[DatasetRecord]
    feature_length: int = DEFAULT_FEATURE_LENGTH

    def __post_init__(self) -> None:
        if self.feature_length <= 0:
            raise ValueError("feature_length must be positive")
        for record in self.records:
            if record.taps.shape != (self.feature_length,):
                raise ValueError("record tap count does not match feature_length")

    def __len__(self) -> int:
        return len(self.records)

    def feature_matrix(self) -> np.ndarray:
        return np.array([r.taps for r in self.records], dtype=float).reshape(
            len(self.records), self.feature_length
        )

    def labels(self) -> list[str]:
        return [r.label for r in self.records]


def derive_seed(master_seed: int, scenario_id: str, reading: int | str) -> int:
    """Stable per-record seed: a 64-bit hash of the identifying triple.

    Uses blake2b rather than ``hash()`` so the value survives interpreter
    restarts and is identical across platforms.
    """
    payload = f"{master_seed}|{scenario_id}|{reading}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def enumerate_recordings(spec: ScenarioSpec) -> list[RecordingSpec]:
    """Recording list in canonical (class, distance, fraction) order."""
    recordings: list[RecordingSpec] = []
    if LABEL_NONE in spec.classes:
        recordings.append(RecordingSpec("none", LABEL_NONE, 0.0, 0.0, 0))
    if LABEL_ONE in spec.classes:
        for d in sorted(spec.distances_d):
            recordings.append(RecordingSpec(f"one_D{d:g}", LABEL_ONE, d, 0.0, 1))
    if LABEL_TWO in spec.classes:
        for d in sorted(spec.distances_d):
            for x in sorted(spec.fractions_x):
                recordings.append(
                    RecordingSpec(f"two_D{d:g}_x{x:g}", LABEL_TWO, d, x, 2)
                )
    return recordings


def _simulate_recording(
    recording: RecordingSpec,
    spec: ScenarioSpec,
    grid_config: GridConfig,
    geometry: SceneGeometry,
    feature_length: int,
) -> list[DatasetRecord]:
    scene = dataclasses.replace(
        geometry,
        reflector_distance_d=recording.distance_d if recording.reflector_count else None,
        circumferential_fraction_x=recording.fraction_x,
        reflector_count=recording.reflector_count,
    )
    paths = reflector_paths(scene, grid_config.carrier_frequency)
    response = frequency_response(paths, grid_config)
    pilot_map = generate_crs(grid_config)
    grid = build_subframe_grid(
        grid_config, payload_seed=derive_seed(spec.master_seed, recording.scenario_id, "payload")
    )
    records = []
    for idx in range(spec.readings_per_recording):
        seed = derive_seed(spec.master_seed, recording.scenario_id, idx)
        received = apply_channel(grid, response, spec.snr_db, noise_seed=seed)
        estimates = estimate_channel_ls(received, pilot_map)
        feature = extract_feature(cir_from_estimates(estimates), feature_length)
        records.append(
            DatasetRecord(
                scenario_id=recording.scenario_id,
                label=recording.label,
                distance_d=recording.distance_d,
                fraction_x=recording.fraction_x,
                reading_idx=idx,
                seed=seed,
                taps=feature.taps,
            )
        )
    return records


def run_campaign(
    spec: ScenarioSpec,
    *,
    grid_config: GridConfig | None = None,
    geometry: SceneGeometry | None = None,
    feature_length: int = DEFAULT_FEATURE_LENGTH,
    workers: int = 1,
) -> Dataset:
    """Simulate every recording of ``spec`` and collect the readings.

    The output order is the canonical recording enumeration regardless of
    ``workers``; per-record seeds make parallel and serial runs produce
    identical datasets.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    grid_config = grid_config if grid_config is not None else GridConfig()
    geometry = geometry if geometry is not None else SceneGeometry()
    recordings = enumerate_recordings(spec)

    def job(recording: RecordingSpec) -> list[DatasetRecord]:
        return _simulate_recording(recording, spec, grid_config, geometry, feature_length)

    if workers == 1:
        per_recording = [job(r) for r in recordings]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_recording = list(pool.map(job, recordings))
    records = [record for chunk in per_recording for record in chunk]
    return Dataset(records, feature_length)


def _csv_header(feature_length: int) -> list[str]:
    return ["scenario_id", "class", "D_m", "x", "reading_idx", "seed"] + [
        f"tap_{i}" for i in range(feature_length)
    ]


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write the dataset as UTF-8, LF-terminated CSV at full precision.

    Floats are serialized with ``repr`` so a load/save round trip is
    lossless bit for bit.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(_csv_header(dataset.feature_length))
        for r in dataset.records:
            writer.writerow(
                [
                    r.scenario_id,
                    r.label,
                    repr(r.distance_d),
                    repr(r.fraction_x),
                    r.reading_idx,
                    r.seed,
                ]
                + [repr(float(t)) for t in r.taps]
            )


def load_dataset(path: str) -> Dataset:
    """Parse a dataset CSV, reporting malformed rows by line number."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        n_taps = len(header) - 6
        if n_taps < 1 or header != _csv_header(n_taps):
            raise ValueError(f"{path}: unexpected header {header!r}")
        records = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                record = DatasetRecord(
                    scenario_id=row[0],
                    label=row[1],
                    distance_d=float(row[2]),
                    fraction_x=float(row[3]),
                    reading_idx=int(row[4]),
                    seed=int(row[5]),
                    taps=np.array([float(v) for v in row[6:]]),
                )
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: {exc}") from None
            records.append(record)
    return Dataset(records, n_taps)


def stratum_key(record: DatasetRecord) -> tuple[str, float, float]:
    """Stratification key used by splits and scoring: (class, D, x)."""
    return (record.label, record.distance_d, record.fraction_x)


def split_train_test(
    dataset: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic stratified split by (class, D, x).

    Every stratum is shuffled with a generator seeded once; both sides of
    the split keep the original record order.  Strata with fewer than two
    records cannot be split and are rejected.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    if not dataset.records:
        raise ValueError("dataset is empty")
    strata: dict[tuple[str, float, float], list[int]] = {}
    for idx, record in enumerate(dataset.records):
        strata.setdefault(stratum_key(record), []).append(idx)

    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for key in sorted(strata):
        indices = strata[key]
        if len(indices) < 2:
            raise ValueError(f"stratum {key} has fewer than 2 records")
        n_train = int(round(train_fraction * len(indices)))
        n_train = min(max(n_train, 1), len(indices) - 1)
        order = rng.permutation(len(indices))
        chosen = {indices[i] for i in order[:n_train]}
        train_idx.extend(sorted(chosen))
        test_idx.extend(sorted(set(indices) - chosen))

    train_idx.sort()
    test_idx.sort()
    train = Dataset([dataset.records[i] for i in train_idx], dataset.feature_length)
    test = Dataset([dataset.records[i] for i in test_idx], dataset.feature_length)
    return train, test
