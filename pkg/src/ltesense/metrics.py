"""Detection metrics and the two resolution definitions.

Scoring follows the verification framing of the one-versus-two decision:
readings of class ONE act as impostor attempts against the count stage
(accepting one of them as TWO is a false acceptance), readings of class
TWO are legitimate attempts (calling one of them ONE is a false
rejection).  Each reading is presented exactly once; the ONE readings of
a distance are dealt round the fraction grid in reading order so the
per-cell counts partition the dataset.

Resolution definition 1 (threshold style): scanning the false-acceptance
curve upward from the smallest separation, the resolution is the total
span covered before a single grid step changes FAR by more than epsilon.
Resolution definition 2 (estimation style): fit the per-cell score
samples, convert Fisher information to a variance bound per cell, and
return the grid step across which that bound changes least.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .campaign import Dataset, LABEL_ONE, LABEL_TWO
from .detector import CascadeModel, cascade_scores
from .scene import intra_reflector_distance

DEFAULT_EPSILON = 0.01

# One-sample Kolmogorov-Smirnov acceptance threshold at the 5% level is
# 1.36 / sqrt(n); samples under it are treated as Gaussian.
KS_COEFFICIENT = 1.36

METHOD_NP = "np"
METHOD_CR = "cr"


@dataclass(frozen=True)
class ConfusionCounts:
    """Attempt counts for the accept/reject framing of one decision."""

    n_impostor: int
    n_false_accept: int
    n_legit: int
    n_false_reject: int
    correct: int
    total: int

    def __post_init__(self) -> None:
        for name in ("n_impostor", "n_false_accept", "n_legit", "n_false_reject", "correct", "total"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} cannot be negative")
        if self.n_false_accept > self.n_impostor:
            raise ValueError("false acceptances cannot exceed impostor attempts")
        if self.n_false_reject > self.n_legit:
            raise ValueError("false rejections cannot exceed legitimate attempts")
        if self.total != self.n_impostor + self.n_legit:
            raise ValueError("total must equal impostor plus legitimate attempts")
        if self.correct > self.total:
            raise ValueError("correct cannot exceed total")


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total == 0:
        raise ValueError("accuracy is undefined without attempts")
    return counts.correct / counts.total


def far(counts: ConfusionCounts) -> float:
    """False acceptance rate: N_FA / N_IA."""
    if counts.n_impostor == 0:
        raise ValueError("FAR is undefined without impostor attempts")
    return counts.n_false_accept / counts.n_impostor


def frr(counts: ConfusionCounts) -> float:
    """False rejection rate: N_FR / N_EA."""
    if counts.n_legit == 0:
        raise ValueError("FRR is undefined without legitimate attempts")
    return counts.n_false_reject / counts.n_legit


@dataclass(frozen=True)
class MetricCurve:
    """One metric sampled over strictly increasing separations."""

    distance_d: float
    metric: str
    thetas: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.thetas) != len(self.values):
            raise ValueError("thetas and values must have equal length")
        if len(self.thetas) == 0:
            raise ValueError("curve cannot be empty")
        if any(b <= a for a, b in zip(self.thetas, self.thetas[1:])):
            raise ValueError("thetas must be strictly increasing")


@dataclass(frozen=True)
class ResolutionCurve:
    """Per-distance resolutions from one method.

    ``epsilon`` applies to the threshold method only; ``kde_cells`` lists
    the (distance, theta) cells where the estimation method had to fall
    back to a kernel-density fit.
    """

    method: str
    entries: tuple[tuple[float, float], ...]
    epsilon: float | None = None
    kde_cells: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.method not in (METHOD_NP, METHOD_CR):
            raise ValueError(f"unknown resolution method {self.method!r}")
        for distance_d, resolution in self.entries:
            if resolution < 0:
                raise ValueError("resolutions cannot be negative")
            if resolution > 2.0 * distance_d:
                raise ValueError(
                    f"resolution {resolution} exceeds the maximum chord {2 * distance_d}"
                )

    def as_dict(self) -> dict[float, float]:
        return {d: r for d, r in self.entries}


def tally_counts(truth_accept: np.ndarray, decided_accept: np.ndarray) -> ConfusionCounts:
    """Count acceptance outcomes for boolean truth/decision arrays."""
    truth_accept = np.asarray(truth_accept, dtype=bool)
    decided_accept = np.asarray(decided_accept, dtype=bool)
    if truth_accept.shape != decided_accept.shape:
        raise ValueError("truth and decision arrays must match in shape")
    n_legit = int(np.sum(truth_accept))
    n_impostor = int(truth_accept.size - n_legit)
    n_false_accept = int(np.sum(~truth_accept & decided_accept))
    n_false_reject = int(np.sum(truth_accept & ~decided_accept))
    correct = int(np.sum(truth_accept == decided_accept))
    return ConfusionCounts(
        n_impostor=n_impostor,
        n_false_accept=n_false_accept,
        n_legit=n_legit,
        n_false_reject=n_false_reject,
        correct=correct,
        total=truth_accept.size,
    )


@dataclass
class ScoreReport:
    """Everything score_predictions measures on a held-out dataset.

    ``score_cells`` maps each distance to (fraction, theta, samples)
    triples holding the count-stage scores of its legitimate readings.
    """

    overall: ConfusionCounts
    curves: dict[float, dict[str, MetricCurve]]
    score_cells: dict[float, tuple[tuple[float, float, np.ndarray], ...]]
    warnings: list[str] = field(default_factory=list)


def score_predictions(
    model: CascadeModel,
    test: Dataset,
    positive_class_def: tuple[str, str] = (LABEL_TWO, LABEL_ONE),
) -> ScoreReport:
    """Score the count-stage decision per (distance, fraction) cell.

    ``positive_class_def`` is (legitimate class, impostor class); the
    default presents ONE readings as impostors to the two-object
    decision.  Impostor readings of each distance are dealt round that
    distance's fraction grid in reading order, so every reading is
    counted exactly once and per-cell counts sum to the number of
    presented readings.  Cells whose classes are missing are skipped and
    reported in the warnings list.  The per-cell count-stage scores of
    legitimate readings are kept for the estimation-style resolution.
    """
    legit_label, impostor_label = positive_class_def
    if {legit_label, impostor_label} != {LABEL_ONE, LABEL_TWO}:
        raise ValueError("positive_class_def must pair ONE and TWO")
    if not test.records:
        raise ValueError("test dataset is empty")

    features = test.feature_matrix()
    _, count_scores = cascade_scores(model, features)
    # Count-stage acceptance: score >= 0 declares TWO (ties resolve toward
    # detection); acceptance means declaring the legitimate class.
    declared_two = count_scores >= 0.0
    accepted = declared_two if legit_label == LABEL_TWO else ~declared_two

    legit_cells: dict[float, dict[float, list[int]]] = {}
    impostor_pool: dict[float, list[int]] = {}
    ignored = 0
    for idx, record in enumerate(test.records):
        if record.label == legit_label:
            legit_cells.setdefault(record.distance_d, {}).setdefault(
                record.fraction_x, []
            ).append(idx)
        elif record.label == impostor_label:
            impostor_pool.setdefault(record.distance_d, []).append(idx)
        else:
            ignored += 1

    warnings: list[str] = []
    if ignored:
        warnings.append(f"ignored {ignored} readings outside the {positive_class_def} framing")

    curves: dict[float, dict[str, MetricCurve]] = {}
    score_cells: dict[float, tuple[tuple[float, np.ndarray], ...]] = {}
    total_counts = np.zeros(4, dtype=int)  # impostor, false accept, legit, false reject
    total_correct = 0
    total_presented = 0

    for distance_d in sorted(set(legit_cells) | set(impostor_pool)):
        cells = legit_cells.get(distance_d)
        if not cells:
            warnings.append(f"D={distance_d:g}: no {legit_label} readings, distance skipped")
            continue
        fractions = sorted(cells)
        pool = impostor_pool.get(distance_d, [])
        if not pool:
            warnings.append(f"D={distance_d:g}: no {impostor_label} readings, FAR unavailable")
        pool_sorted = sorted(
            pool, key=lambda i: (test.records[i].scenario_id, test.records[i].reading_idx)
        )
        chunks = (
            [list(chunk) for chunk in np.array_split(np.array(pool_sorted, dtype=int), len(fractions))]
            if pool_sorted
            else [[] for _ in fractions]
        )

        thetas = []
        cell_metrics: dict[str, list[float]] = {"accuracy": [], "far": [], "frr": []}
        cells_with_far = []
        d_score_cells = []
        for j, fraction_x in enumerate(fractions):
            theta = intra_reflector_distance(distance_d, fraction_x)[1]
            legit_idx = np.array(cells[fraction_x], dtype=int)
            impostor_idx = np.array(chunks[j], dtype=int)
            presented = np.concatenate([legit_idx, impostor_idx])
            truth = np.concatenate(
                [np.ones(legit_idx.size, dtype=bool), np.zeros(impostor_idx.size, dtype=bool)]
            )
            decided = accepted[presented]
            counts = tally_counts(truth, decided)
            total_counts += (
                counts.n_impostor,
                counts.n_false_accept,
                counts.n_legit,
                counts.n_false_reject,
            )
            total_correct += counts.correct
            total_presented += counts.total

            thetas.append(theta)
            cell_metrics["accuracy"].append(accuracy(counts))
            cell_metrics["frr"].append(frr(counts))
            if counts.n_impostor > 0:
                cell_metrics["far"].append(far(counts))
                cells_with_far.append(theta)
            else:
                warnings.append(
                    f"D={distance_d:g} x={fraction_x:g}: empty impostor cell, FAR skipped"
                )
            d_score_cells.append((fraction_x, theta, count_scores[legit_idx]))

        d_curves = {
            "accuracy": MetricCurve(distance_d, "accuracy", tuple(thetas), tuple(cell_metrics["accuracy"])),
            "frr": MetricCurve(distance_d, "frr", tuple(thetas), tuple(cell_metrics["frr"])),
        }
        if cells_with_far:
            d_curves["far"] = MetricCurve(
                distance_d, "far", tuple(cells_with_far), tuple(cell_metrics["far"])
            )
        curves[distance_d] = d_curves
        score_cells[distance_d] = tuple(d_score_cells)

    overall = ConfusionCounts(
        n_impostor=int(total_counts[0]),
        n_false_accept=int(total_counts[1]),
        n_legit=int(total_counts[2]),
        n_false_reject=int(total_counts[3]),
        correct=total_correct,
        total=total_presented,
    )
    return ScoreReport(overall=overall, curves=curves, score_cells=score_cells, warnings=warnings)


def np_resolution(curve: MetricCurve, epsilon: float = DEFAULT_EPSILON) -> float:
    """Threshold-style resolution of a false-acceptance curve.

    Scanning consecutive grid steps from the smallest separation upward,
    the resolution is the span from the first grid point to the last one
    reachable before a step changes FAR by more than ``epsilon``.  If the
    very first step violates, the first grid value is returned; if no
    step violates, the full grid span is.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if len(curve.thetas) < 2:
        raise ValueError("resolution needs at least two grid points")
    thetas = curve.thetas
    values = curve.values
    for j in range(len(thetas) - 1):
        if abs(values[j + 1] - values[j]) > epsilon:
            if j == 0:
                return thetas[0]
            return thetas[j] - thetas[0]
    return thetas[-1] - thetas[0]


@dataclass(frozen=True)
class GaussianFit:
    """Sample mean/std with its Kolmogorov-Smirnov normality verdict."""

    mean: float
    std: float
    ks_statistic: float
    is_gaussian: bool


def gaussian_fit(samples: np.ndarray) -> GaussianFit:
    """Fit a Gaussian and test it with the one-sample KS statistic.

    ``std`` is the unbiased (ddof=1) estimate.  The fit counts as
    Gaussian if the KS statistic stays below ``1.36 / sqrt(n)``.
    Degenerate samples (fewer than two, or zero variance) are rejected.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise ValueError("need at least two samples")
    mean = float(np.mean(samples))
    std = float(np.std(samples, ddof=1))
    if std == 0.0:
        raise ValueError("samples have zero variance")
    ks = float(stats.kstest(samples, "norm", args=(mean, std)).statistic)
    return GaussianFit(
        mean=mean,
        std=std,
        ks_statistic=ks,
        is_gaussian=ks < KS_COEFFICIENT / math.sqrt(samples.size),
    )


def fisher_information(samples: np.ndarray, mean: float, std: float) -> float:
    """Numerical Fisher information of a Gaussian location estimate.

    Averages the squared score ``(mean - s) / std**2`` over the samples;
    for well-fit Gaussian data this approaches ``1 / std**2``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("samples are empty")
    if std <= 0:
        raise ValueError("std must be positive")
    scores = (mean - samples) / std**2
    return float(np.mean(scores**2))


def _kde_fisher(samples: np.ndarray) -> float:
    """Fisher information from a kernel-density fit.

    Differentiates the log of the KDE likelihood numerically at every
    sample and averages the squared slope.  Used when a cell fails the
    normality test.
    """
    kde = stats.gaussian_kde(samples)
    step = 1e-3 * float(np.std(samples, ddof=1))
    upper = np.log(kde(samples + step))
    lower = np.log(kde(samples - step))
    slope = (upper - lower) / (2.0 * step)
    info = float(np.mean(slope**2))
    if info <= 0 or not math.isfinite(info):
        raise ValueError("kernel-density Fisher information is degenerate")
    return info


ScoreCells = Mapping[float, Sequence[tuple[float, np.ndarray]]]


def crlb_resolution(cells: ScoreCells) -> ResolutionCurve:
    """Estimation-style resolution from per-cell score samples.

    Per distance: fit each theta cell, convert Fisher information to the
    variance bound ``1 / I``, then scan consecutive theta steps keeping
    the step whose variance change is smallest (earliest step wins ties).
    Cells failing the normality test fall back to the kernel-density fit
    and are listed in the result's ``kde_cells``.
    """
    if not cells:
        raise ValueError("no score cells provided")
    entries = []
    kde_cells = []
    for distance_d in sorted(cells):
        cell_list = sorted(cells[distance_d], key=lambda item: item[0])
        if len(cell_list) < 2:
            raise ValueError(f"D={distance_d:g}: need at least two theta cells")
        thetas = [theta for theta, _ in cell_list]
        if any(b < a for a, b in zip(thetas, thetas[1:])):
            raise ValueError("theta grid must be non-decreasing")
        variances = []
        for theta, samples in cell_list:
            fit = gaussian_fit(samples)
            if fit.is_gaussian:
                info = fisher_information(samples, fit.mean, fit.std)
            else:
                info = _kde_fisher(np.asarray(samples, dtype=float))
                kde_cells.append((distance_d, theta))
            if info <= 0:
                raise ValueError("Fisher information must be positive")
            variances.append(1.0 / info)
        best_change = math.inf
        best_step = 0.0
        for j in range(len(cell_list) - 1):
            change = abs(variances[j + 1] - variances[j])
            if change < best_change:
                best_change = change
                best_step = thetas[j + 1] - thetas[j]
        entries.append((distance_d, best_step))
    return ResolutionCurve(
        method=METHOD_CR,
        entries=tuple(entries),
        epsilon=None,
        kde_cells=tuple(kde_cells),
    )


def np_resolution_curve(
    far_curves: Mapping[float, MetricCurve], epsilon: float = DEFAULT_EPSILON
) -> ResolutionCurve:
    """Apply :func:`np_resolution` across a family of FAR curves."""
    entries = tuple(
        (distance_d, np_resolution(far_curves[distance_d], epsilon))
        for distance_d in sorted(far_curves)
    )
    return ResolutionCurve(method=METHOD_NP, entries=entries, epsilon=epsilon)


def crlb_cells(report: ScoreReport) -> dict[float, tuple[tuple[float, np.ndarray], ...]]:
    """Strip fractions from a report's score cells for crlb_resolution."""
    return {
        distance_d: tuple((theta, samples) for _, theta, samples in triples)
        for distance_d, triples in report.score_cells.items()
    }


METRIC_TABLE_HEADER = ["D_m", "theta_m", "accuracy", "far", "frr"]
SCORE_TABLE_HEADER = ["D_m", "x", "theta_m", "score"]
RESOLUTION_TABLE_HEADER = ["method", "D_m", "resolution_m", "epsilon"]


def save_metric_table(
    path: str, curves: Mapping[float, Mapping[str, MetricCurve]]
) -> None:
    """Write per-cell metrics as CSV, one row per (distance, theta) cell.

    Metrics missing at a grid point (an empty impostor cell, or a table
    that only carries FAR) are written as ``nan``.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRIC_TABLE_HEADER)
        for distance_d in sorted(curves):
            d_curves = curves[distance_d]
            maps = {
                name: dict(zip(curve.thetas, curve.values))
                for name, curve in d_curves.items()
            }
            thetas = sorted({t for m in maps.values() for t in m})
            for theta in thetas:
                writer.writerow(
                    [
                        repr(distance_d),
                        repr(theta),
                        repr(maps.get("accuracy", {}).get(theta, float("nan"))),
                        repr(maps.get("far", {}).get(theta, float("nan"))),
                        repr(maps.get("frr", {}).get(theta, float("nan"))),
                    ]
                )


def load_metric_table(path: str) -> dict[float, dict[str, MetricCurve]]:
    """Read a metric table back into per-distance curves, dropping nans."""
    rows: dict[float, list[tuple[float, float, float, float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != METRIC_TABLE_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != 5:
                    raise ValueError(f"expected 5 fields, got {len(row)}")
                d, theta, acc, far_v, frr_v = (float(v) for v in row)
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: {exc}") from exc
            rows.setdefault(d, []).append((theta, acc, far_v, frr_v))
    curves: dict[float, dict[str, MetricCurve]] = {}
    for d, cells in rows.items():
        cells.sort(key=lambda c: c[0])
        d_curves = {}
        for name, column in (("accuracy", 1), ("far", 2), ("frr", 3)):
            points = [(c[0], c[column]) for c in cells if not math.isnan(c[column])]
            if points:
                d_curves[name] = MetricCurve(
                    d, name, tuple(t for t, _ in points), tuple(v for _, v in points)
                )
        curves[d] = d_curves
    return curves


def save_score_table(
    path: str, score_cells: Mapping[float, Sequence[tuple[float, float, np.ndarray]]]
) -> None:
    """Write per-reading count-stage scores, one row per legitimate reading."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_TABLE_HEADER)
        for distance_d in sorted(score_cells):
            for fraction_x, theta, samples in score_cells[distance_d]:
                for score in samples:
                    writer.writerow(
                        [repr(distance_d), repr(fraction_x), repr(theta), repr(float(score))]
                    )


def load_score_table(path: str) -> dict[float, tuple[tuple[float, float, np.ndarray], ...]]:
    """Read a score table back into per-distance (x, theta, samples) cells."""
    cells: dict[float, dict[tuple[float, float], list[float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_TABLE_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != 4:
                    raise ValueError(f"expected 4 fields, got {len(row)}")
                d, x, theta, score = (float(v) for v in row)
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: {exc}") from exc
            cells.setdefault(d, {}).setdefault((x, theta), []).append(score)
    return {
        d: tuple(
            (x, theta, np.array(scores, dtype=float))
            for (x, theta), scores in sorted(d_cells.items())
        )
        for d, d_cells in cells.items()
    }


def save_resolution_table(path: str, curves: Sequence[ResolutionCurve]) -> None:
    """Write resolution curves as CSV; the epsilon column is empty when unused."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESOLUTION_TABLE_HEADER)
        for curve in curves:
            eps = "" if curve.epsilon is None else repr(curve.epsilon)
            for distance_d, resolution in curve.entries:
                writer.writerow([curve.method, repr(distance_d), repr(resolution), eps])


def load_resolution_table(path: str) -> list[ResolutionCurve]:
    """Read a resolution table back into one curve per (method, epsilon)."""
    grouped: dict[tuple[str, float | None], list[tuple[float, float]]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESOLUTION_TABLE_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            try:
                if len(row) != 4:
                    raise ValueError(f"expected 4 fields, got {len(row)}")
                method = row[0]
                d = float(row[1])
                resolution = float(row[2])
                eps = None if row[3] == "" else float(row[3])
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: {exc}") from exc
            grouped.setdefault((method, eps), []).append((d, resolution))
    curves = []
    for (method, eps), entries in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0.0)):
        entries.sort(key=lambda e: e[0])
        curves.append(ResolutionCurve(method=method, entries=tuple(entries), epsilon=eps))
    return curves
