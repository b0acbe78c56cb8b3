"""Vector primitives and the gallery/probe containers shared by all modules.

Vectors are plain numpy float64 arrays. Everything is upcast to float64 on
ingest even if it arrived as float32: the covering and clustering loops
compare distances against thresholds and accumulate means, and the extra
precision keeps boundary comparisons stable.

Containers mark their arrays read-only after construction, so they can be
shared across worker threads without copies.

Distance computations everywhere in this package go through
:func:`l2_distance` / :func:`row_distances` so that batched and one-at-a-time
code paths reduce in the same order and produce bit-identical values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    ZeroVectorError,
)


def as_vector(values) -> np.ndarray:
    """Coerce to a 1-D float64 array and validate finiteness."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise EmptyInputError("vector has no components")
    if not np.isfinite(v).all():
        raise ValueError("vector has non-finite components")
    return v


def as_matrix(vectors, dim: int | None = None) -> np.ndarray:
    """Coerce a sequence of vectors to an (n, d) float64 matrix."""
    m = np.asarray(vectors, dtype=np.float64)
    if m.ndim == 1 and m.size == 0:
        raise EmptyInputError("no vectors given")
    if m.ndim != 2:
        raise DimensionMismatchError(
            f"expected equal-length vectors forming an (n, d) matrix, got shape {m.shape}"
        )
    if m.shape[0] == 0:
        raise EmptyInputError("no vectors given")
    if dim is not None and m.shape[1] != dim:
        raise DimensionMismatchError(f"expected dim={dim}, got {m.shape[1]}")
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite components")
    return m


def l2_distance(a, b) -> float:
    """Euclidean distance between two vectors of equal length."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.sqrt(np.square(a - b).sum()))


def row_distances(matrix: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Euclidean distance from ``point`` to every row of ``matrix``.

    Reduces each row with the same ufunc chain as :func:`l2_distance`, so a
    row distance here equals the scalar distance bit-for-bit.
    """
    if matrix.shape[1] != point.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: {matrix.shape[1]} vs {point.shape[0]}"
        )
    return np.sqrt(np.square(matrix - point).sum(axis=1))


def normalize(v) -> np.ndarray:
    """Scale ``v`` to unit L2 norm."""
    v = as_vector(v)
    n = float(np.sqrt(np.square(v).sum()))
    if n == 0.0:
        raise ZeroVectorError("cannot normalize the zero vector")
    return v / n


def normalize_rows(m: np.ndarray) -> np.ndarray:
    """Scale every row of ``m`` to unit L2 norm."""
    norms = np.sqrt(np.square(m).sum(axis=1))
    if (norms == 0.0).any():
        raise ZeroVectorError("cannot normalize a zero row")
    return m / norms[:, None]


def mean_vector(vectors) -> np.ndarray:
    """Componentwise arithmetic mean of a non-empty list of vectors."""
    m = as_matrix(vectors)
    return m.mean(axis=0)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


class Provenance(enum.Enum):
    """How a condensed gallery's per-identity samples were produced."""

    RAW = "raw"
    PRUNED_RAW = "pruned_raw"
    SINGLE = "single"
    PRUNED_SINGLE = "pruned_single"
    GENERATED = "generated"
    PRUNED_GENERATED = "pruned_generated"


@dataclass(frozen=True)
class Gallery:
    """Enrolled identities, each with a non-empty (n_i, d) block of vectors."""

    entries: dict[str, np.ndarray]
    dim: int

    @classmethod
    def from_vectors(cls, entries: dict[str, np.ndarray], normalize: bool = True) -> "Gallery":
        """Build a gallery, optionally L2-normalizing every ingested vector.

        Normalize-on-ingest is the default: the embeddings this package
        targets come from angular-margin models and live on the unit
        hypersphere, where the usual working ranges for the covering radius
        and clustering bandwidth make sense.
        """
        if not entries:
            raise EmptyInputError("gallery needs at least one identity")
        dim = None
        frozen: dict[str, np.ndarray] = {}
        for identity, vectors in entries.items():
            if not identity:
                raise ValueError("identity ids must be non-empty strings")
            m = as_matrix(vectors, dim)
            dim = m.shape[1]
            if normalize:
                m = normalize_rows(m)
            frozen[identity] = _freeze(m)
        return cls(entries=frozen, dim=dim)

    @property
    def num_identities(self) -> int:
        return len(self.entries)

    @property
    def num_vectors(self) -> int:
        return sum(v.shape[0] for v in self.entries.values())


@dataclass(frozen=True)
class ProbeSet:
    """Query vectors: mates carry the enrolled identity they belong to,
    non-mates carry no gallery identity."""

    mate_ids: tuple[str, ...]
    mate_vectors: np.ndarray  # (m, d)
    nonmate_vectors: np.ndarray  # (k, d)
    dim: int

    @classmethod
    def from_vectors(
        cls,
        mate_ids,
        mate_vectors,
        nonmate_vectors,
        dim: int | None = None,
        normalize: bool = True,
    ) -> "ProbeSet":
        mate_ids = tuple(mate_ids)
        mates = as_matrix(mate_vectors, dim) if len(mate_vectors) > 0 else None
        if mates is not None:
            dim = mates.shape[1]
        nonmates = as_matrix(nonmate_vectors, dim) if len(nonmate_vectors) > 0 else None
        if nonmates is not None:
            dim = nonmates.shape[1]
        if dim is None or dim == 0:
            raise EmptyInputError("probe set is empty; cannot infer dimension")
        # empty sides still carry the inferred width so they concatenate
        if mates is None:
            mates = np.empty((0, dim), dtype=np.float64)
        if nonmates is None:
            nonmates = np.empty((0, dim), dtype=np.float64)
        if len(mate_ids) != mates.shape[0]:
            raise ValueError("one identity per mate vector required")
        if normalize:
            if mates.shape[0]:
                mates = normalize_rows(mates)
            if nonmates.shape[0]:
                nonmates = normalize_rows(nonmates)
        return cls(
            mate_ids=mate_ids,
            mate_vectors=_freeze(mates),
            nonmate_vectors=_freeze(nonmates),
            dim=dim,
        )

    @property
    def num_mates(self) -> int:
        return self.mate_vectors.shape[0]

    @property
    def num_nonmates(self) -> int:
        return self.nonmate_vectors.shape[0]


@dataclass(frozen=True)
class SampleSet:
    """Representative vectors standing in for one identity's enrollment."""

    samples: np.ndarray  # (k, d)
    source_count: int

    def __post_init__(self):
        object.__setattr__(self, "samples", _freeze(self.samples))
        if self.samples.shape[0] < 1:
            raise EmptyInputError("a sample set is never empty")
        if not (1 <= self.samples.shape[0] <= max(self.source_count, 1)):
            raise ValueError(
                f"sample count {self.samples.shape[0]} exceeds source count {self.source_count}"
            )

    @property
    def size(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class CondensedGallery:
    """Identities mapped to their sample sets, plus a flat search index.

    Identities are held in lexicographic order; ties in nearest-identity
    searches therefore resolve to the smaller id. The flattened arrays are
    built once here so repeated identification calls do no per-call setup.
    """

    entries: dict[str, SampleSet]
    dim: int
    provenance: Provenance
    ids: tuple[str, ...] = field(init=False, repr=False)
    stacked: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.entries:
            raise EmptyInputError("condensed gallery needs at least one identity")
        ids = tuple(sorted(self.entries))
        blocks = []
        offsets = [0]
        for identity in ids:
            samples = self.entries[identity].samples
            if samples.shape[1] != self.dim:
                raise DimensionMismatchError(
                    f"identity {identity!r} has dim {samples.shape[1]}, expected {self.dim}"
                )
            blocks.append(samples)
            offsets.append(offsets[-1] + samples.shape[0])
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "stacked", _freeze(np.concatenate(blocks, axis=0)))
        object.__setattr__(self, "offsets", np.asarray(offsets, dtype=np.intp))

    @property
    def num_identities(self) -> int:
        return len(self.entries)

    @property
    def avg_gallery_size(self) -> float:
        return self.stacked.shape[0] / len(self.entries)

    @classmethod
    def from_gallery(cls, gallery: Gallery, provenance: Provenance = Provenance.RAW) -> "CondensedGallery":
        entries = {
            identity: SampleSet(samples=vectors, source_count=vectors.shape[0])
            for identity, vectors in gallery.entries.items()
        }
        return cls(entries=entries, dim=gallery.dim, provenance=provenance)
