"""Sample generation: replace an identity's vectors with few synthetic
points whose radius-r hyperspheres cover all of them.

The construction is greedy. Each round pairs the point farthest from the
running start vector with the farthest point in its 2r neighborhood,
takes their midpoint, slides that midpoint as far toward the overall mean
as coverage allows, emits it, and removes everything it covers. Coverage
is strict (distance < radius), so emitted samples keep a real margin over
every point they absorb.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    CondensedGallery,
    Gallery,
    Provenance,
    SampleSet,
    as_matrix,
    as_vector,
    mean_vector,
)
from .errors import CoverageError
from .pruning import PruningParams, prune_identity


@dataclass(frozen=True)
class GenerationParams:
    """Knobs for covering-sample generation.

    ``radius`` is the covering hypersphere radius; ``margin`` shrinks the
    pairing neighborhood from 2*radius so midpoints cannot land exactly on
    the coverage boundary (defaults to radius / 10);
    ``line_search_steps`` bounds the bisection used when sliding a sample
    toward the start vector.
    """

    radius: float
    margin: float | None = None
    line_search_steps: int = 32

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.margin is None:
            object.__setattr__(self, "margin", 0.1 * self.radius)
        if not 0 <= self.margin < 2 * self.radius:
            raise ValueError(
                f"margin must be in [0, 2 * radius), got {self.margin}"
            )
        if self.line_search_steps < 1:
            raise ValueError(
                f"line_search_steps must be >= 1, got {self.line_search_steps}"
            )


def move_toward_init(
    sample, init, covered, radius: float, steps: int = 32
) -> np.ndarray:
    """Slide ``sample`` along the segment to ``init`` as far as coverage
    of ``covered`` allows.

    Every covered point must start strictly within ``radius`` of
    ``sample``; the function raises CoverageError otherwise. The feasible
    positions form a prefix of the segment (the covering ball's interior
    is convex), so a bisection with ``steps`` halvings pins the farthest
    feasible point. Returns ``init`` itself when it is feasible, and the
    original sample when no movement is.
    """
    v_m = as_vector(sample)
    v_i = as_vector(init)
    pts = as_matrix(covered, dim=v_m.shape[0])
    if v_i.shape[0] != v_m.shape[0]:
        raise CoverageError("sample and target dimensions differ")

    def feasible(position: np.ndarray) -> bool:
        dist = np.sqrt(np.square(pts - position).sum(axis=1))
        return bool((dist < radius).all())

    if not feasible(v_m):
        raise CoverageError("sample does not cover all points it was assigned")
    if np.array_equal(v_m, v_i):
        return v_m.copy()
    if feasible(v_i):
        return v_i.copy()

    lo, hi = 0.0, 1.0  # position(lo) feasible, position(hi) not
    for _ in range(steps):
        mid = (lo + hi) / 2.0
        if feasible(v_m + mid * (v_i - v_m)):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        return v_m.copy()
    return v_m + lo * (v_i - v_m)


def generate_samples(vectors, params: GenerationParams) -> SampleSet:
    """Condense ``vectors`` into covering samples.

    Returns at least one and at most len(vectors) samples; every input
    vector ends strictly within ``params.radius`` of some sample.
    """
    pts = as_matrix(vectors)
    n = pts.shape[0]
    v_init = mean_vector(pts)
    pairing_radius = 2.0 * params.radius - params.margin

    remaining = np.arange(n)
    samples: list[np.ndarray] = []

    dist_init = np.sqrt(np.square(pts - v_init).sum(axis=1))
    v1_pos = int(np.argmax(dist_init))

    while remaining.size > 0:
        v1 = pts[remaining[v1_pos]]
        rem_pts = pts[remaining]
        dist_v1 = np.sqrt(np.square(rem_pts - v1).sum(axis=1))
        reachable = dist_v1 < pairing_radius  # includes v1 itself
        v2 = rem_pts[reachable][int(np.argmax(dist_v1[reachable]))]
        v_m = (v1 + v2) / 2.0

        dist_m = np.sqrt(np.square(rem_pts - v_m).sum(axis=1))
        covered_now = dist_m < params.radius
        v_m = move_toward_init(
            v_m, v_init, rem_pts[covered_now], params.radius, params.line_search_steps
        )

        samples.append(v_m)
        dist_final = np.sqrt(np.square(rem_pts - v_m).sum(axis=1))
        keep = dist_final >= params.radius
        remaining = remaining[keep]
        if remaining.size == 0:
            break
        v1_pos = int(np.argmax(dist_final[keep]))

    if not samples:
        raise CoverageError("no samples generated")
    out = np.ascontiguousarray(np.stack(samples))
    return SampleSet(samples=out, source_count=n)


def condense_gallery(
    gallery: Gallery,
    pruning: PruningParams | None,
    generation: GenerationParams,
) -> CondensedGallery:
    """Condense every identity to covering samples, optionally pruning
    outliers first. No identity ever comes out empty."""
    entries: dict[str, SampleSet] = {}
    for identity in sorted(gallery.entries):
        vectors = gallery.entries[identity]
        if pruning is not None:
            vectors = prune_identity(vectors, pruning)
        entries[identity] = generate_samples(vectors, generation)
    provenance = Provenance.GENERATED if pruning is None else Provenance.PRUNED_GENERATED
    return CondensedGallery(entries=entries, dim=gallery.dim, provenance=provenance)
