"""Open-set identification against a condensed gallery.

A probe is compared to every stored vector of every identity; the
identity owning the globally nearest vector wins, and the probe is
accepted only when that nearest distance clears a threshold. Distances
are plain L2 by default, with an optional Mahalanobis variant whitened by
a covariance fitted on gallery vectors.

Also provides the single-vector baseline that collapses an identity to
its normalized mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import (
    CondensedGallery,
    Gallery,
    Provenance,
    SampleSet,
    as_matrix,
    as_vector,
    mean_vector,
    normalize,
)
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    NotPositiveDefiniteError,
)


@dataclass(frozen=True)
class IdentificationResult:
    """Top-1 search outcome for one probe."""

    probe_index: int
    best_id: str
    best_distance: float
    second_distance: float | None = None


@dataclass(frozen=True)
class MahalanobisModel:
    """Whitening model: mean and inverse covariance of a vector pool."""

    mu: np.ndarray
    sigma_inverse: np.ndarray
    shrinkage: float


def dist_cnv(query, id_vectors) -> float:
    """Distance from a query to an identity: the minimum L2 distance over
    the identity's stored vectors."""
    q = as_vector(query)
    vectors = as_matrix(id_vectors, dim=q.shape[0])
    dist = np.sqrt(np.square(vectors - q).sum(axis=1))
    return float(dist.min())


def identify_top1(
    probe, gallery: CondensedGallery, probe_index: int = 0
) -> IdentificationResult:
    """Find the identity whose nearest stored vector is closest to the
    probe.

    Distance ties between identities resolve to the lexicographically
    smallest identity id. ``second_distance`` reports the runner-up
    identity's distance (None for a single-identity gallery).
    """
    p = as_vector(probe)
    if p.shape[0] != gallery.dim:
        raise DimensionMismatchError(
            f"probe dim {p.shape[0]} != gallery dim {gallery.dim}"
        )
    dist = np.sqrt(np.square(gallery.stacked - p).sum(axis=1))
    per_identity = np.minimum.reduceat(dist, gallery.offsets[:-1])
    best = int(np.argmin(per_identity))
    second: float | None = None
    if per_identity.shape[0] > 1:
        rest = np.delete(per_identity, best)
        second = float(rest.min())
    return IdentificationResult(
        probe_index=probe_index,
        best_id=gallery.ids[best],
        best_distance=float(per_identity[best]),
        second_distance=second,
    )


def identify_batch(probes, gallery: CondensedGallery) -> list[IdentificationResult]:
    """identify_top1 over each row of ``probes``, in row order."""
    pts = as_matrix(probes, dim=gallery.dim)
    return [identify_top1(pts[i], gallery, probe_index=i) for i in range(pts.shape[0])]


def accept(result: IdentificationResult, threshold: float) -> bool:
    """Open-set accept rule: the match stands only when the best distance
    is strictly below the threshold."""
    return result.best_distance < threshold


def fit_mahalanobis(vectors, shrinkage: float = 1e-3) -> MahalanobisModel:
    """Fit mean and inverse covariance on a pool of vectors.

    The covariance gets ``shrinkage`` added on the diagonal before a
    Cholesky-based inversion; a pool too degenerate to factor raises
    NotPositiveDefiniteError with the offending smallest eigenvalue.
    """
    pts = as_matrix(vectors)
    if pts.shape[0] < 2:
        raise EmptyInputError("need at least 2 vectors to fit a covariance")
    if shrinkage < 0:
        raise ValueError(f"shrinkage must be >= 0, got {shrinkage}")
    mu = mean_vector(pts)
    centered = pts - mu
    cov = (centered.T @ centered) / (pts.shape[0] - 1)
    cov[np.diag_indices_from(cov)] += shrinkage
    try:
        factor = cho_factor(cov, lower=True)
    except np.linalg.LinAlgError as exc:
        smallest = float(np.linalg.eigvalsh(cov)[0])
        raise NotPositiveDefiniteError(
            f"covariance not positive definite even after shrinkage "
            f"{shrinkage} (smallest eigenvalue {smallest})"
        ) from exc
    inv = cho_solve(factor, np.eye(cov.shape[0]))
    inv = (inv + inv.T) / 2.0  # enforce exact symmetry
    return MahalanobisModel(mu=mu, sigma_inverse=inv, shrinkage=float(shrinkage))


def dist_mahalanobis(query, model: MahalanobisModel) -> float:
    """Mahalanobis distance from a query to a fitted model's mean.

    The quadratic form is clamped at zero before the square root so
    rounding on queries at the mean cannot surface as NaN.
    """
    q = as_vector(query)
    if q.shape[0] != model.sigma_inverse.shape[0]:
        raise DimensionMismatchError(
            f"query dim {q.shape[0]} != model dim {model.sigma_inverse.shape[0]}"
        )
    diff = q - model.mu
    quad = float(diff @ model.sigma_inverse @ diff)
    return float(np.sqrt(max(quad, 0.0)))


def aggregate_single(vectors) -> SampleSet:
    """Collapse an identity to one vector: the normalized mean of its
    vectors (zero mean raises ZeroVectorError)."""
    pts = as_matrix(vectors)
    merged = normalize(mean_vector(pts))
    return SampleSet(samples=merged[None, :].copy(), source_count=pts.shape[0])


def single_gallery(
    gallery: Gallery, provenance: Provenance = Provenance.SINGLE
) -> CondensedGallery:
    """Condense every identity to its normalized mean vector."""
    entries = {
        identity: aggregate_single(vectors)
        for identity, vectors in sorted(gallery.entries.items())
    }
    return CondensedGallery(entries=entries, dim=gallery.dim, provenance=provenance)
