"""Open-set evaluation: thresholds from nonmate score order statistics,
FNIR at target FPIR, precision/recall, and parameter sweeps.

Conventions. A mate probe counts as a false negative when its top-1
identity is wrong or its top-1 distance fails the threshold; a mate
accepted under the wrong identity additionally counts as a false
positive. FPIR is the fraction of nonmate probes accepted at all.
Recall equals 1 - FNIR by construction (both are derived from the same
accepted-with-correct-id count), so the pair is reported from shared
integer counts rather than computed twice in float.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import CondensedGallery, Gallery, ProbeSet
from .errors import ConfigError, DimensionMismatchError, EmptyInputError
from .generation import GenerationParams, condense_gallery
from .identification import IdentificationResult, identify_batch
from .pruning import PruningParams


@dataclass(frozen=True)
class OperatingPoint:
    """One threshold choice and the rates measured there."""

    target_fpir: float
    threshold: float
    fnir: float
    realized_fpir: float


@dataclass(frozen=True)
class ConfusionCounts:
    """Integer tallies behind the rates, split by probe kind.

    Mate probes partition into correct-id accepts, wrong-id accepts, and
    rejects; wrong-id accepts are both false negatives and false
    positives.
    """

    mate_true_accepts: int
    mate_wrong_id_accepts: int
    mate_rejects: int
    nonmate_accepts: int
    nonmate_rejects: int

    @property
    def num_mates(self) -> int:
        return self.mate_true_accepts + self.mate_wrong_id_accepts + self.mate_rejects

    @property
    def num_nonmates(self) -> int:
        return self.nonmate_accepts + self.nonmate_rejects

    @property
    def false_negatives(self) -> int:
        return self.mate_wrong_id_accepts + self.mate_rejects

    @property
    def false_positives(self) -> int:
        return self.nonmate_accepts + self.mate_wrong_id_accepts


@dataclass(frozen=True)
class PrecisionRecall:
    """Precision/recall at one threshold. When nothing was accepted the
    precision is vacuous: it is reported as 1.0 with
    ``precision_defined`` False."""

    precision: float
    recall: float
    precision_defined: bool


@dataclass(frozen=True)
class EvalReport:
    """Everything measured for one condensation method.

    Precision and recall are reported at the first target FPIR's
    threshold; FNIR is reported per target via ``operating_points``.
    """

    method: str
    operating_points: tuple[OperatingPoint, ...]
    precision: float
    recall: float
    precision_defined: bool
    avg_gallery_size: float
    num_mates: int
    num_nonmates: int

    @property
    def probe_counts(self) -> tuple[int, int]:
        return (self.num_mates, self.num_nonmates)

    @property
    def fnir_at_fpir(self) -> dict[float, tuple[float, float]]:
        """target FPIR -> (threshold used, FNIR)."""
        return {
            p.target_fpir: (p.threshold, p.fnir) for p in self.operating_points
        }

    def fnir_at(self, target_fpir: float) -> float:
        for point in self.operating_points:
            if point.target_fpir == target_fpir:
                return point.fnir
        raise KeyError(f"no operating point for target FPIR {target_fpir}")


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian sweep space. An empty ``pruning_ratios`` sweeps the
    no-pruning variant, in which case ``bandwidths`` is ignored."""

    radii: tuple[float, ...]
    bandwidths: tuple[float, ...] = ()
    pruning_ratios: tuple[float, ...] = ()
    target_fpirs: tuple[float, ...] = (0.01,)

    def __post_init__(self):
        if not self.radii:
            raise ValueError("radii must be non-empty")
        if self.pruning_ratios and not self.bandwidths:
            raise ValueError("bandwidths must be non-empty when pruning_ratios is set")
        if not self.target_fpirs:
            raise ValueError("target_fpirs must be non-empty")
        for r in self.radii:
            if not r > 0:
                raise ValueError(f"radius must be > 0, got {r}")
        for b in self.bandwidths:
            if not b > 0:
                raise ValueError(f"bandwidth must be > 0, got {b}")
        for pr in self.pruning_ratios:
            if not 0.0 < pr <= 1.0:
                raise ValueError(f"pruning_ratio must be in (0, 1], got {pr}")
        for t in self.target_fpirs:
            if not 0.0 < t < 1.0:
                raise ValueError(f"target FPIR must be in (0, 1), got {t}")

    def cells(self) -> list[tuple[float, float | None, float | None]]:
        """(radius, bandwidth, pruning_ratio) triples in grid order:
        pruning_ratio outermost, then bandwidth, then radius."""
        if not self.pruning_ratios:
            return [(r, None, None) for r in self.radii]
        return [
            (r, b, pr)
            for pr in self.pruning_ratios
            for b in self.bandwidths
            for r in self.radii
        ]


@dataclass(frozen=True)
class SweepResult:
    """One sweep cell and its report."""

    radius: float
    bandwidth: float | None
    pruning_ratio: float | None
    report: EvalReport


def worker_count() -> int:
    """Sweep parallelism: the GSMP_THREADS environment variable when set,
    otherwise the machine's CPU count (capped at 32)."""
    raw = os.environ.get("GSMP_THREADS")
    if raw is None:
        return min(32, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"GSMP_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"GSMP_THREADS must be >= 1, got {value}")
    return value


def threshold_for_fpir(nonmate_scores, target_fpir: float) -> float:
    """Acceptance threshold realizing at most ``target_fpir`` on the given
    nonmate scores.

    With the strict accept rule (score < threshold), setting the threshold
    to the (k+1)-th smallest nonmate score accepts at most k nonmates, so
    the right rank is the largest k with k/n <= target. The two fix-up
    loops pin that k under the same float division the definition uses,
    making the choice safe against rounding in target * n.
    """
    scores = np.sort(np.asarray(nonmate_scores, dtype=np.float64).ravel())
    n = scores.shape[0]
    if n == 0:
        raise EmptyInputError("no nonmate scores")
    if not 0.0 < target_fpir < 1.0:
        raise ValueError(f"target FPIR must be in (0, 1), got {target_fpir}")
    k = min(n - 1, int(target_fpir * n))
    while k + 1 < n and (k + 1) / n <= target_fpir:
        k += 1
    while k > 0 and k / n > target_fpir:
        k -= 1
    return float(scores[k])


def confusion_counts(
    mate_results: list[IdentificationResult],
    true_ids: tuple[str, ...] | list[str],
    nonmate_results: list[IdentificationResult],
    threshold: float,
) -> ConfusionCounts:
    """Tally accept/reject outcomes at one threshold."""
    if len(mate_results) != len(true_ids):
        raise DimensionMismatchError(
            f"{len(mate_results)} mate results vs {len(true_ids)} true ids"
        )
    true_acc = wrong_acc = rejects = 0
    for result, true_id in zip(mate_results, true_ids):
        if not result.best_distance < threshold:
            rejects += 1
        elif result.best_id == true_id:
            true_acc += 1
        else:
            wrong_acc += 1
    nm_acc = sum(1 for r in nonmate_results if r.best_distance < threshold)
    return ConfusionCounts(
        mate_true_accepts=true_acc,
        mate_wrong_id_accepts=wrong_acc,
        mate_rejects=rejects,
        nonmate_accepts=nm_acc,
        nonmate_rejects=len(nonmate_results) - nm_acc,
    )


def compute_fnir(
    mate_results: list[IdentificationResult],
    true_ids: tuple[str, ...] | list[str],
    threshold: float,
) -> float:
    """Fraction of mate probes that miss: wrong top-1 identity, or top-1
    distance at or above the threshold."""
    counts = confusion_counts(mate_results, true_ids, [], threshold)
    if counts.num_mates == 0:
        raise EmptyInputError("no mate probes")
    return counts.false_negatives / counts.num_mates


def precision_recall_from_counts(counts: ConfusionCounts) -> PrecisionRecall:
    """Precision and recall from accept/reject tallies.

    Accepted wrong-id mates sit in the false-positive column, so precision
    uses them against the correct-id accepts; recall is the correct-id
    accept rate over all mates (exactly 1 - FNIR at the same threshold).
    An empty accept set makes precision vacuous: reported as 1.0 with the
    flag cleared.
    """
    if counts.num_mates == 0:
        raise EmptyInputError("no mate probes")
    tp = counts.mate_true_accepts
    fp = counts.false_positives
    # complement the miss rate, not tp/n: (n-fn)/n can differ by an ulp
    recall = 1.0 - counts.false_negatives / counts.num_mates
    if tp + fp == 0:
        return PrecisionRecall(precision=1.0, recall=recall, precision_defined=False)
    return PrecisionRecall(
        precision=tp / (tp + fp), recall=recall, precision_defined=True
    )


def compute_precision_recall(
    mate_results: list[IdentificationResult],
    true_ids: tuple[str, ...] | list[str],
    nonmate_results: list[IdentificationResult],
    threshold: float,
) -> PrecisionRecall:
    """Precision and recall at one threshold, from raw top-1 results."""
    counts = confusion_counts(mate_results, true_ids, nonmate_results, threshold)
    return precision_recall_from_counts(counts)


def evaluate_method(
    condensed: CondensedGallery,
    probes: ProbeSet,
    target_fpirs: tuple[float, ...] = (0.01,),
) -> EvalReport:
    """Measure one condensed gallery against a probe set.

    Thresholds are calibrated per target FPIR from the nonmate top-1
    scores; precision/recall are reported at the first target.
    """
    if not target_fpirs:
        raise ValueError("target_fpirs must be non-empty")
    if probes.dim != condensed.dim:
        raise DimensionMismatchError(
            f"probe dim {probes.dim} != gallery dim {condensed.dim}"
        )
    if probes.num_mates == 0:
        raise EmptyInputError("no mate probes")
    if probes.num_nonmates == 0:
        raise EmptyInputError("no nonmate probes")

    mate_results = identify_batch(probes.mate_vectors, condensed)
    nonmate_results = identify_batch(probes.nonmate_vectors, condensed)
    nonmate_scores = [r.best_distance for r in nonmate_results]

    points = []
    first_counts: ConfusionCounts | None = None
    for target in target_fpirs:
        threshold = threshold_for_fpir(nonmate_scores, target)
        counts = confusion_counts(
            mate_results, probes.mate_ids, nonmate_results, threshold
        )
        if first_counts is None:
            first_counts = counts
        points.append(
            OperatingPoint(
                target_fpir=target,
                threshold=threshold,
                fnir=counts.false_negatives / counts.num_mates,
                realized_fpir=counts.nonmate_accepts / counts.num_nonmates,
            )
        )
    pr = precision_recall_from_counts(first_counts)
    return EvalReport(
        method=condensed.provenance.value,
        operating_points=tuple(points),
        precision=pr.precision,
        recall=pr.recall,
        precision_defined=pr.precision_defined,
        avg_gallery_size=condensed.avg_gallery_size,
        num_mates=probes.num_mates,
        num_nonmates=probes.num_nonmates,
    )


def _run_cell(
    gallery: Gallery,
    probes: ProbeSet,
    cell: tuple[float, float | None, float | None],
    target_fpirs: tuple[float, ...],
) -> SweepResult:
    radius, bandwidth, pruning_ratio = cell
    generation = GenerationParams(radius=radius)
    pruning = None
    if pruning_ratio is not None:
        pruning = PruningParams(bandwidth=bandwidth, pruning_ratio=pruning_ratio)
    condensed = condense_gallery(gallery, pruning, generation)
    report = evaluate_method(condensed, probes, target_fpirs)
    return SweepResult(
        radius=radius,
        bandwidth=bandwidth,
        pruning_ratio=pruning_ratio,
        report=report,
    )


def run_sweep(gallery: Gallery, probes: ProbeSet, grid: SweepGrid) -> list[SweepResult]:
    """Evaluate every grid cell and rank the results.

    Cells are independent and run on a thread pool sized by
    ``worker_count()``. The returned list is sorted by FNIR at the first
    target FPIR, ascending, with grid order breaking ties, so the ranking
    never depends on scheduling.
    """
    cells = grid.cells()
    workers = min(worker_count(), len(cells))
    if workers == 1:
        in_grid_order = [
            _run_cell(gallery, probes, cell, grid.target_fpirs) for cell in cells
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_cell, gallery, probes, cell, grid.target_fpirs)
                for cell in cells
            ]
            in_grid_order = [f.result() for f in futures]
    return sorted(in_grid_order, key=lambda s: s.report.operating_points[0].fnir)
