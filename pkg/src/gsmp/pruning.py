"""Outlier pruning: per-identity mean-shift clustering, then removal of
small clusters.

Mean-shift here uses a flat (uniform) kernel: each point iterates to the
mean of all input points strictly within ``bandwidth`` of it. The flat
kernel makes the fixed-point property of reported modes exactly testable
and reads the bandwidth as a radius.

All internal computation runs over a lexicographically sorted copy of the
input, so permuting the input order changes neither the cluster structure
nor a single bit of the arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Gallery, as_matrix
from .errors import EmptyInputError


@dataclass(frozen=True)
class PruningParams:
    """Knobs for mean-shift pruning.

    ``bandwidth`` is the kernel radius (embedding distance units);
    ``pruning_ratio`` scales how aggressively small clusters are removed,
    0 = keep everything, 1 = keep only the largest cluster(s).
    """

    bandwidth: float
    pruning_ratio: float
    convergence_tol: float = 1e-6
    max_iterations: int = 300

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not 0.0 <= self.pruning_ratio <= 1.0:
            raise ValueError(f"pruning_ratio must be in [0, 1], got {self.pruning_ratio}")
        if not self.convergence_tol > 0:
            raise ValueError(f"convergence_tol must be > 0, got {self.convergence_tol}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class ClusterResult:
    """Mean-shift output: one cluster index per input point, one
    representative mode per cluster, and member counts.

    Cluster indices are canonical (sorted by the representative mode's
    coordinates), not dependent on input order.
    """

    assignments: np.ndarray  # (n,) int
    modes: np.ndarray  # (num_clusters, d)
    sizes: np.ndarray  # (num_clusters,) int

    @property
    def num_clusters(self) -> int:
        return self.modes.shape[0]


def _canonical_order(points: np.ndarray) -> np.ndarray:
    # lexsort keys are last-significant-first; reverse so column 0 leads
    return np.lexsort(points.T[::-1])


def meanshift_update(point: np.ndarray, points: np.ndarray, bandwidth: float) -> np.ndarray:
    """One flat-kernel step: mean of all ``points`` strictly within
    ``bandwidth`` of ``point``. With no neighbors the point stays put."""
    dist = np.sqrt(np.square(points - point).sum(axis=1))
    mask = dist < bandwidth
    if not mask.any():
        return point.copy()
    return (mask[:, None] * points).sum(axis=0) / mask.sum()


def _converge(points: np.ndarray, params: PruningParams) -> np.ndarray:
    """Iterate every point to its mode. Returns the position at which the
    update moved less than ``convergence_tol`` (so each returned mode m
    satisfies ||update(m) - m|| < tol, barring the max_iterations cap)."""
    n = points.shape[0]
    x = points.copy()
    active = np.ones(n, dtype=bool)
    for _ in range(params.max_iterations):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        diff = x[idx, None, :] - points[None, :, :]
        dist = np.sqrt(np.square(diff).sum(axis=2))
        nb = dist < params.bandwidth
        counts = nb.sum(axis=1)
        updated = x[idx].copy()
        has = counts > 0
        if has.any():
            sums = (nb[has][:, :, None] * points[None, :, :]).sum(axis=1)
            updated[has] = sums / counts[has, None]
        shift = np.sqrt(np.square(updated - x[idx]).sum(axis=1))
        done = shift < params.convergence_tol
        x[idx[~done]] = updated[~done]
        active[idx[done]] = False
    return x


def _merge_components(modes: np.ndarray, threshold: float) -> np.ndarray:
    """Single-linkage merge: modes closer than ``threshold`` share a
    component. Returns a component label per mode (labels arbitrary)."""
    n = modes.shape[0]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.sqrt(np.square(modes[:, None, :] - modes[None, :, :]).sum(axis=2))
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return np.asarray([find(i) for i in range(n)], dtype=np.intp)


def mean_shift(points, params: PruningParams) -> ClusterResult:
    """Cluster ``points`` by flat-kernel mean-shift.

    Each point iterates to a mode; modes within bandwidth/2 of each other
    are merged into one cluster and the lexicographically smallest mode of
    a merged group is reported as the cluster's representative.
    """
    pts = as_matrix(points)
    n = pts.shape[0]
    order = _canonical_order(pts)
    canonical = np.ascontiguousarray(pts[order])

    modes = _converge(canonical, params)
    labels = _merge_components(modes, params.bandwidth / 2.0)

    # canonical representative per component: lexicographically smallest mode
    clusters: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        clusters.setdefault(int(lab), []).append(i)
    reps = []
    for lab, members in clusters.items():
        member_modes = modes[members]
        rep = member_modes[_canonical_order(member_modes)[0]]
        reps.append((tuple(rep), lab, members))
    reps.sort(key=lambda item: item[0])

    num_clusters = len(reps)
    rep_modes = np.empty((num_clusters, pts.shape[1]), dtype=np.float64)
    sizes = np.empty(num_clusters, dtype=np.intp)
    canon_assign = np.empty(n, dtype=np.intp)
    for cluster_index, (rep, _lab, members) in enumerate(reps):
        rep_modes[cluster_index] = rep
        sizes[cluster_index] = len(members)
        canon_assign[members] = cluster_index

    assignments = np.empty(n, dtype=np.intp)
    assignments[order] = canon_assign
    return ClusterResult(assignments=assignments, modes=rep_modes, sizes=sizes)


def prune_clusters(result: ClusterResult, pruning_ratio: float) -> set[int]:
    """Indices of the points whose cluster is large enough to survive.

    A cluster survives when its size is >= pruning_ratio * (largest
    cluster's size). The >= keeps clusters tied with the largest at
    pruning_ratio = 1, and pruning_ratio = 0 keeps everything.
    """
    if not 0.0 <= pruning_ratio <= 1.0:
        raise ValueError(f"pruning_ratio must be in [0, 1], got {pruning_ratio}")
    s_max = int(result.sizes.max())
    keep_cluster = result.sizes >= pruning_ratio * s_max
    mask = keep_cluster[result.assignments]
    return set(np.flatnonzero(mask).tolist())


def prune_identity(vectors, params: PruningParams) -> np.ndarray:
    """Mean-shift ``vectors`` and drop members of small clusters.

    Output rows are a subsequence of the input and never empty (the
    largest cluster always survives).
    """
    pts = as_matrix(vectors)
    retained = prune_clusters(mean_shift(pts, params), params.pruning_ratio)
    return pts[sorted(retained)]


def prune_gallery(
    gallery: Gallery, params: PruningParams
) -> tuple[Gallery, dict[str, set[int]]]:
    """Prune every identity independently.

    Returns the pruned gallery plus the per-identity retained index sets
    (indices into each identity's original vector block).
    """
    if not gallery.entries:
        raise EmptyInputError("empty gallery")
    entries: dict[str, np.ndarray] = {}
    retained: dict[str, set[int]] = {}
    for identity in sorted(gallery.entries):
        vectors = gallery.entries[identity]
        kept = prune_clusters(mean_shift(vectors, params), params.pruning_ratio)
        retained[identity] = kept
        entries[identity] = vectors[sorted(kept)]
    # vectors were normalized (or not) when the source gallery was built
    return Gallery.from_vectors(entries, normalize=False), retained
