"""Request/response models for the HTTP service, plus converters to and
from the in-memory types.

Vectors travel as JSON lists of floats. Raw gallery and probe vectors are
normalized on ingest when the request's ``normalize`` flag is on (the
default); condensed-sample payloads are always taken verbatim, since
generated samples live off the unit sphere by design.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from ..core import CondensedGallery, Gallery, ProbeSet, Provenance, SampleSet
from ..errors import GsmpError


class GalleryPayload(BaseModel):
    entries: dict[str, list[list[float]]]


class ProbesPayload(BaseModel):
    mate_ids: list[str] = Field(default_factory=list)
    mate_vectors: list[list[float]] = Field(default_factory=list)
    nonmate_vectors: list[list[float]] = Field(default_factory=list)


class CondensedPayload(BaseModel):
    entries: dict[str, list[list[float]]]
    provenance: str = "generated"
    source_counts: dict[str, int] = Field(default_factory=dict)


class PruningOptions(BaseModel):
    bandwidth: float = 0.9
    pruning_ratio: float = 1.0
    convergence_tol: float = 1e-6
    max_iterations: int = 300


class GenerationOptions(BaseModel):
    radius: float = 0.7
    margin: float | None = None
    line_search_steps: int = 32


def gallery_payload(gallery: Gallery) -> GalleryPayload:
    return GalleryPayload(
        entries={
            identity: vectors.tolist() for identity, vectors in sorted(gallery.entries.items())
        }
    )


def to_gallery(payload: GalleryPayload, normalize: bool = True) -> Gallery:
    return Gallery.from_vectors(
        {identity: np.asarray(rows) for identity, rows in payload.entries.items()},
        normalize=normalize,
    )


def probes_payload(probes: ProbeSet) -> ProbesPayload:
    return ProbesPayload(
        mate_ids=list(probes.mate_ids),
        mate_vectors=probes.mate_vectors.tolist(),
        nonmate_vectors=probes.nonmate_vectors.tolist(),
    )


def to_probes(payload: ProbesPayload, dim: int | None = None, normalize: bool = True) -> ProbeSet:
    return ProbeSet.from_vectors(
        payload.mate_ids,
        np.asarray(payload.mate_vectors) if payload.mate_vectors else [],
        np.asarray(payload.nonmate_vectors) if payload.nonmate_vectors else [],
        dim=dim,
        normalize=normalize,
    )


def condensed_payload(condensed: CondensedGallery) -> CondensedPayload:
    return CondensedPayload(
        entries={
            identity: condensed.entries[identity].samples.tolist()
            for identity in condensed.ids
        },
        provenance=condensed.provenance.value,
        source_counts={
            identity: condensed.entries[identity].source_count
            for identity in condensed.ids
        },
    )


def to_condensed(payload: CondensedPayload) -> CondensedGallery:
    try:
        provenance = Provenance(payload.provenance)
    except ValueError as exc:
        raise GsmpError(f"unknown provenance {payload.provenance!r}") from exc
    entries = {}
    dim = None
    for identity, rows in payload.entries.items():
        samples = np.asarray(rows, dtype=np.float64)
        if samples.ndim != 2:
            raise GsmpError(f"identity {identity!r}: samples must be a vector list")
        count = payload.source_counts.get(identity, samples.shape[0])
        entries[identity] = SampleSet(samples=samples, source_count=count)
        dim = samples.shape[1]
    if not entries:
        raise GsmpError("condensed payload has no identities")
    return CondensedGallery(entries=entries, dim=dim, provenance=provenance)


class SynthRequest(BaseModel):
    num_identities: int = 100
    dim: int = 64
    min_vectors: int = 20
    max_vectors: int = 60
    cluster_spread: float = 0.15
    mislabel_rate: float = 0.0
    noise_rate: float = 0.0
    mates_per_identity: int = 2
    num_nonmate_identities: int = 10
    seed: int = 0


class SynthResponse(BaseModel):
    gallery: GalleryPayload
    probes: ProbesPayload
    truth: dict[str, list[int]]


class PruneRequest(BaseModel):
    gallery: GalleryPayload
    pruning: PruningOptions = Field(default_factory=PruningOptions)
    normalize: bool = True


class PruneResponse(BaseModel):
    gallery: GalleryPayload
    retained: dict[str, list[int]]
    removed: dict[str, list[int]]


class GenerateRequest(BaseModel):
    gallery: GalleryPayload
    generation: GenerationOptions = Field(default_factory=GenerationOptions)
    normalize: bool = True


class CondenseRequest(BaseModel):
    gallery: GalleryPayload
    pruning: PruningOptions = Field(default_factory=PruningOptions)
    generation: GenerationOptions = Field(default_factory=GenerationOptions)
    normalize: bool = True


class IdentifyRequest(BaseModel):
    condensed: CondensedPayload
    probes: ProbesPayload
    threshold: float
    normalize: bool = True


class IdentifyLine(BaseModel):
    probe_index: int
    best_id: str
    best_distance: float
    second_distance: float | None
    accepted: bool


class IdentifyResponse(BaseModel):
    results: list[IdentifyLine]


class EvaluateRequest(BaseModel):
    gallery: GalleryPayload | None = None
    condensed: CondensedPayload | None = None
    probes: ProbesPayload
    method: str = "prun_gen"
    pruning: PruningOptions = Field(default_factory=PruningOptions)
    generation: GenerationOptions = Field(default_factory=GenerationOptions)
    target_fpirs: list[float] = Field(default_factory=lambda: [0.01])
    normalize: bool = True


class OperatingPointPayload(BaseModel):
    target_fpir: float
    threshold: float
    fnir: float
    realized_fpir: float


class ReportPayload(BaseModel):
    method: str
    operating_points: list[OperatingPointPayload]
    precision: float
    recall: float
    precision_defined: bool
    avg_gallery_size: float
    num_mates: int
    num_nonmates: int


class SweepRequest(BaseModel):
    gallery: GalleryPayload
    probes: ProbesPayload
    radii: list[float]
    bandwidths: list[float] = Field(default_factory=list)
    pruning_ratios: list[float] = Field(default_factory=list)
    target_fpirs: list[float] = Field(default_factory=lambda: [0.01])
    normalize: bool = True


class SweepRow(BaseModel):
    radius: float
    bandwidth: float | None
    pruning_ratio: float | None
    report: ReportPayload


class SweepResponse(BaseModel):
    results: list[SweepRow]


class SplitRequest(BaseModel):
    gallery: GalleryPayload
    identity_fraction: float = 0.8
    image_fraction: float = 0.8
    seed: int = 0
    normalize: bool = True


class SplitResponse(BaseModel):
    gallery: GalleryPayload
    probes: ProbesPayload
    single_image_identities: list[str]
