"""Synthetic identity datasets on the unit hypersphere, with controlled
outlier contamination and exact ground truth.

Each identity is a spherical cap: a unit center plus isotropic Gaussian
perturbations renormalized back onto the sphere. Contamination comes in
two flavors mirroring real gallery defects: "mislabel" vectors are drawn
from a different identity's cap but keep the original label, and "noise"
vectors are uniform random unit vectors.

Randomness comes from numpy's default_rng (the PCG64 algorithm), which is
seedable and portable, and every draw happens in one documented order (see
:func:`generate`), so a seed pins the dataset bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Gallery, ProbeSet, normalize_rows


@dataclass(frozen=True)
class SynthConfig:
    """Shape and contamination knobs for one synthetic dataset."""

    num_identities: int = 100
    dim: int = 64
    vectors_per_identity: tuple[int, int] = (20, 60)
    cluster_spread: float = 0.15
    mislabel_rate: float = 0.0
    noise_rate: float = 0.0
    mates_per_identity: int = 2
    num_nonmate_identities: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.num_identities < 2:
            raise ValueError(f"num_identities must be >= 2, got {self.num_identities}")
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        lo, hi = self.vectors_per_identity
        if not 1 <= lo <= hi:
            raise ValueError(
                f"vectors_per_identity must satisfy 1 <= min <= max, got ({lo}, {hi})"
            )
        if not self.cluster_spread > 0:
            raise ValueError(f"cluster_spread must be > 0, got {self.cluster_spread}")
        if not 0.0 <= self.mislabel_rate < 1.0:
            raise ValueError(f"mislabel_rate must be in [0, 1), got {self.mislabel_rate}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError(f"noise_rate must be in [0, 1), got {self.noise_rate}")
        if self.mislabel_rate + self.noise_rate >= 1.0:
            raise ValueError("mislabel_rate + noise_rate must be < 1")
        if self.mates_per_identity < 0:
            raise ValueError(
                f"mates_per_identity must be >= 0, got {self.mates_per_identity}"
            )
        if self.num_nonmate_identities < 1:
            raise ValueError(
                f"num_nonmate_identities must be >= 1, got {self.num_nonmate_identities}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


KIND_CLEAN = 0
KIND_MISLABEL = 1
KIND_NOISE = 2


@dataclass(frozen=True)
class GroundTruth:
    """Per-gallery-vector contamination labels, aligned with each
    identity's vector block: 0 clean, 1 mislabel, 2 noise."""

    kinds: dict[str, np.ndarray]

    def outlier_indices(self, identity: str) -> set[int]:
        return set(np.flatnonzero(self.kinds[identity] != KIND_CLEAN).tolist())

    def inlier_indices(self, identity: str) -> set[int]:
        return set(np.flatnonzero(self.kinds[identity] == KIND_CLEAN).tolist())

    @property
    def num_outliers(self) -> int:
        return int(sum((k != KIND_CLEAN).sum() for k in self.kinds.values()))

    @property
    def num_inliers(self) -> int:
        return int(sum((k == KIND_CLEAN).sum() for k in self.kinds.values()))


@dataclass(frozen=True)
class SynthData:
    """One generated dataset: enrollments, probes, and the truth."""

    gallery: Gallery
    probes: ProbeSet
    truth: GroundTruth


def _unit_rows(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    return normalize_rows(rng.standard_normal((count, dim)))


def _cap_draw(rng: np.random.Generator, center: np.ndarray, spread: float) -> np.ndarray:
    v = center + spread * rng.standard_normal(center.shape[0])
    return v / np.sqrt(np.square(v).sum())


def generate(config: SynthConfig) -> SynthData:
    """Generate a dataset; the same config always yields the same bits.

    Draw order (one PCG64 stream): gallery identity centers as one block;
    per-identity vector counts as one block; then per identity in order, a
    uniform kind draw per vector followed by that vector's own draws (a
    mislabel vector first picks its source identity, then its
    perturbation); then mate probes per identity in order; then non-mate
    centers as one block; then non-mate probes per fresh identity in
    order. Non-mate probes come mates_per_identity per fresh identity.
    """
    rng = np.random.default_rng(config.seed)
    ids = [f"id_{i:04d}" for i in range(config.num_identities)]

    centers = _unit_rows(rng, config.num_identities, config.dim)
    lo, hi = config.vectors_per_identity
    counts = rng.integers(lo, hi + 1, size=config.num_identities)

    entries: dict[str, np.ndarray] = {}
    kinds: dict[str, np.ndarray] = {}
    for i, identity in enumerate(ids):
        n = int(counts[i])
        u = rng.random(n)
        kind = np.full(n, KIND_CLEAN, dtype=np.uint8)
        kind[u < config.mislabel_rate + config.noise_rate] = KIND_NOISE
        kind[u < config.mislabel_rate] = KIND_MISLABEL
        block = np.empty((n, config.dim), dtype=np.float64)
        for j in range(n):
            if kind[j] == KIND_MISLABEL:
                other = int(rng.integers(config.num_identities - 1))
                if other >= i:
                    other += 1
                block[j] = _cap_draw(rng, centers[other], config.cluster_spread)
            elif kind[j] == KIND_NOISE:
                block[j] = _unit_rows(rng, 1, config.dim)[0]
            else:
                block[j] = _cap_draw(rng, centers[i], config.cluster_spread)
        entries[identity] = block
        kinds[identity] = kind

    mate_ids: list[str] = []
    mate_rows: list[np.ndarray] = []
    for i, identity in enumerate(ids):
        for _ in range(config.mates_per_identity):
            mate_ids.append(identity)
            mate_rows.append(_cap_draw(rng, centers[i], config.cluster_spread))

    nonmate_centers = _unit_rows(rng, config.num_nonmate_identities, config.dim)
    nonmate_rows: list[np.ndarray] = []
    for i in range(config.num_nonmate_identities):
        for _ in range(config.mates_per_identity):
            nonmate_rows.append(
                _cap_draw(rng, nonmate_centers[i], config.cluster_spread)
            )

    # vectors are unit-norm by construction; skip the ingest renormalization
    gallery = Gallery.from_vectors(entries, normalize=False)
    probes = ProbeSet.from_vectors(
        mate_ids,
        np.asarray(mate_rows) if mate_rows else np.empty((0, config.dim)),
        np.asarray(nonmate_rows) if nonmate_rows else np.empty((0, config.dim)),
        dim=config.dim,
        normalize=False,
    )
    return SynthData(gallery=gallery, probes=probes, truth=GroundTruth(kinds=kinds))


def outlier_recovery_score(
    retained: dict[str, set[int]], truth: GroundTruth
) -> tuple[float, float]:
    """How well a pruning pass recovered the planted contamination.

    Returns (outlier_removal_rate, inlier_retention_rate): the fraction of
    truth outliers that were pruned, and the fraction of truth inliers
    that survived. A dataset with no outliers (or no inliers) makes the
    corresponding rate vacuous and it is reported as 1.0.
    """
    removed_outliers = total_outliers = 0
    kept_inliers = total_inliers = 0
    for identity, kind in truth.kinds.items():
        kept = retained.get(identity, set())
        for index in range(kind.shape[0]):
            if kind[index] != KIND_CLEAN:
                total_outliers += 1
                if index not in kept:
                    removed_outliers += 1
            else:
                total_inliers += 1
                if index in kept:
                    kept_inliers += 1
    removal = removed_outliers / total_outliers if total_outliers else 1.0
    retention = kept_inliers / total_inliers if total_inliers else 1.0
    return (removal, retention)
