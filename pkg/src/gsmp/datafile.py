"""Dataset files and the identity/image split.

One file format carries galleries, probe sets, and condensed galleries:
a header plus flat records of (identity id, role, vector). Two encodings
round-trip to the same records at float32 precision:

Binary (little-endian): magic ``GSMP``, version u16 = 1, dim u32, record
count u64; then per record an id length u16, the id in UTF-8, a role u8
(0 = gallery, 1 = mate, 2 = nonmate, 3 = sample), and dim float32
components.

Text: header line ``# gsmp v1 dim=<d>``, then one CSV record per line,
``<id>,<role>,<f1>,...,<fd>`` with the role spelled out. Floats are
written as the shortest string that reads back to the same float32.

Vectors are float32 on disk and float64 in memory: disk size matters at
gallery scale, while the clustering and covering loops want the extra
precision.
"""

from __future__ import annotations

import csv
import enum
import re
import struct
from dataclasses import dataclass

import numpy as np

from .core import CondensedGallery, Gallery, ProbeSet, Provenance, SampleSet
from .errors import (
    BadMagicError,
    BadRecordError,
    EmptyInputError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"GSMP"
VERSION = 1
_HEADER = struct.Struct("<4sHIQ")
_IDLEN = struct.Struct("<H")
_TEXT_HEADER = re.compile(r"^# gsmp v(\d+) dim=(\d+)$")


class Role(enum.IntEnum):
    """What a record's vector is: an enrolled gallery vector, a mate or
    nonmate probe, or a generated sample."""

    GALLERY = 0
    MATE = 1
    NONMATE = 2
    SAMPLE = 3


_ROLE_NAMES = {role: role.name.lower() for role in Role}
_ROLE_BY_NAME = {name: role for role, name in _ROLE_NAMES.items()}


@dataclass(frozen=True)
class Record:
    """One row of a dataset file."""

    identity: str
    role: Role
    vector: np.ndarray  # (d,) float32


@dataclass(frozen=True)
class DatasetFile:
    """In-memory form of one dataset file: a dimension plus flat records."""

    dim: int
    records: tuple[Record, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise BadRecordError(f"dim must be >= 1, got {self.dim}")
        for record in self.records:
            if record.vector.shape != (self.dim,):
                raise BadRecordError(
                    f"record for {record.identity!r} has {record.vector.shape[0]} "
                    f"components, expected {self.dim}"
                )

    def by_role(self, role: Role) -> list[Record]:
        return [r for r in self.records if r.role == role]


def _f32(vector) -> np.ndarray:
    v = np.ascontiguousarray(vector, dtype=np.float32)
    v.flags.writeable = False
    return v


def dataset_from_gallery(gallery: Gallery) -> DatasetFile:
    """Gallery → records in sorted identity order, role ``gallery``."""
    records = [
        Record(identity=identity, role=Role.GALLERY, vector=_f32(row))
        for identity in sorted(gallery.entries)
        for row in gallery.entries[identity]
    ]
    return DatasetFile(dim=gallery.dim, records=tuple(records))


def dataset_from_probes(probes: ProbeSet) -> DatasetFile:
    """Probe set → mate records then nonmate records, in probe order.
    Nonmate probes carry no gallery identity; their id field is empty."""
    records = [
        Record(identity=identity, role=Role.MATE, vector=_f32(row))
        for identity, row in zip(probes.mate_ids, probes.mate_vectors)
    ]
    records += [
        Record(identity="", role=Role.NONMATE, vector=_f32(row))
        for row in probes.nonmate_vectors
    ]
    return DatasetFile(dim=probes.dim, records=tuple(records))


def dataset_from_condensed(condensed: CondensedGallery) -> DatasetFile:
    """Condensed gallery → records in sorted identity order, role
    ``sample``. Provenance and source counts are not persisted."""
    records = [
        Record(identity=identity, role=Role.SAMPLE, vector=_f32(row))
        for identity in condensed.ids
        for row in condensed.entries[identity].samples
    ]
    return DatasetFile(dim=condensed.dim, records=tuple(records))


def build_gallery(dataset: DatasetFile, normalize: bool = True) -> Gallery:
    """Gallery from the ``gallery``-role records of a dataset."""
    entries: dict[str, list[np.ndarray]] = {}
    for record in dataset.by_role(Role.GALLERY):
        if not record.identity:
            raise BadRecordError("gallery records need a non-empty identity")
        entries.setdefault(record.identity, []).append(record.vector)
    if not entries:
        raise EmptyInputError("dataset has no gallery records")
    stacked = {identity: np.asarray(rows) for identity, rows in entries.items()}
    return Gallery.from_vectors(stacked, normalize=normalize)


def build_probes(dataset: DatasetFile, normalize: bool = True) -> ProbeSet:
    """Probe set from the ``mate``/``nonmate`` records of a dataset."""
    mates = dataset.by_role(Role.MATE)
    nonmates = dataset.by_role(Role.NONMATE)
    if not mates and not nonmates:
        raise EmptyInputError("dataset has no probe records")
    for record in mates:
        if not record.identity:
            raise BadRecordError("mate records need a non-empty identity")
    return ProbeSet.from_vectors(
        [r.identity for r in mates],
        np.asarray([r.vector for r in mates])
        if mates
        else np.empty((0, dataset.dim)),
        np.asarray([r.vector for r in nonmates])
        if nonmates
        else np.empty((0, dataset.dim)),
        dim=dataset.dim,
        normalize=normalize,
    )


def build_condensed(
    dataset: DatasetFile, provenance: Provenance = Provenance.GENERATED
) -> CondensedGallery:
    """Condensed gallery from the ``sample``-role records of a dataset.

    Samples are taken verbatim (never renormalized); with source counts
    not persisted, each sample set's source_count is its own size.
    """
    entries: dict[str, list[np.ndarray]] = {}
    for record in dataset.by_role(Role.SAMPLE):
        if not record.identity:
            raise BadRecordError("sample records need a non-empty identity")
        entries.setdefault(record.identity, []).append(record.vector)
    if not entries:
        raise EmptyInputError("dataset has no sample records")
    sets = {
        identity: SampleSet(samples=np.asarray(rows), source_count=len(rows))
        for identity, rows in entries.items()
    }
    return CondensedGallery(entries=sets, dim=dataset.dim, provenance=provenance)


def write_binary(dataset: DatasetFile, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dataset.dim, len(dataset.records)))
        for record in dataset.records:
            id_bytes = record.identity.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise BadRecordError(f"identity too long: {len(id_bytes)} bytes")
            fh.write(_IDLEN.pack(len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("B", int(record.role)))
            fh.write(np.ascontiguousarray(record.vector, dtype="<f4").tobytes())


def read_binary(path) -> DatasetFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"not a dataset file: magic {raw[:4]!r}")
    if len(raw) < _HEADER.size:
        raise TruncatedFileError("header truncated")
    _, version, dim, count = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    if dim < 1:
        raise BadRecordError(f"header dim must be >= 1, got {dim}")
    offset = _HEADER.size
    vec_bytes = dim * 4
    records = []
    for index in range(count):
        if offset + _IDLEN.size > len(raw):
            raise TruncatedFileError(f"record {index}: id length truncated")
        (id_len,) = _IDLEN.unpack_from(raw, offset)
        offset += _IDLEN.size
        if offset + id_len + 1 > len(raw):
            raise TruncatedFileError(f"record {index}: id or role truncated")
        try:
            identity = raw[offset : offset + id_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadRecordError(f"record {index}: id is not UTF-8") from exc
        offset += id_len
        role_value = raw[offset]
        offset += 1
        try:
            role = Role(role_value)
        except ValueError as exc:
            raise BadRecordError(f"record {index}: unknown role {role_value}") from exc
        if offset + vec_bytes > len(raw):
            raise TruncatedFileError(f"record {index}: vector truncated")
        vector = np.frombuffer(raw, dtype="<f4", count=dim, offset=offset)
        offset += vec_bytes
        records.append(Record(identity=identity, role=role, vector=_f32(vector)))
    if offset != len(raw):
        raise BadRecordError(f"{len(raw) - offset} trailing bytes after last record")
    return DatasetFile(dim=dim, records=tuple(records))


def write_text(dataset: DatasetFile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# gsmp v{VERSION} dim={dataset.dim}\n")
        writer = csv.writer(fh, lineterminator="\n")
        for record in dataset.records:
            writer.writerow(
                [record.identity, _ROLE_NAMES[record.role]]
                + [str(c) for c in record.vector]
            )


def read_text(path) -> DatasetFile:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        match = _TEXT_HEADER.match(header)
        if match is None:
            if header.startswith("# gsmp "):
                raise BadRecordError(f"malformed header: {header!r}")
            raise BadMagicError(f"not a dataset file: header {header[:16]!r}")
        version, dim = int(match.group(1)), int(match.group(2))
        if version != VERSION:
            raise UnsupportedVersionError(f"unsupported version {version}")
        if dim < 1:
            raise BadRecordError(f"header dim must be >= 1, got {dim}")
        records = []
        for index, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) != 2 + dim:
                raise TruncatedFileError(
                    f"record {index}: expected {dim} components, got {len(row) - 2}"
                )
            identity, role_name = row[0], row[1]
            if role_name not in _ROLE_BY_NAME:
                raise BadRecordError(f"record {index}: unknown role {role_name!r}")
            try:
                vector = np.asarray([np.float32(c) for c in row[2:]], dtype=np.float32)
            except ValueError as exc:
                raise BadRecordError(f"record {index}: bad float") from exc
            if not np.isfinite(vector).all():
                raise BadRecordError(f"record {index}: non-finite component")
            records.append(
                Record(identity=identity, role=_ROLE_BY_NAME[role_name], vector=_f32(vector))
            )
    return DatasetFile(dim=dim, records=tuple(records))


def write_dataset(dataset: DatasetFile, path, format: str = "binary") -> None:
    """Write a dataset in the requested encoding ("binary" or "text")."""
    if format == "binary":
        write_binary(dataset, path)
    elif format == "text":
        write_text(dataset, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def read_dataset(path) -> DatasetFile:
    """Read a dataset, sniffing the encoding from the leading bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_binary(path)
    if head[:1] == b"#":
        return read_text(path)
    raise BadMagicError(f"not a dataset file: magic {head!r}")


@dataclass(frozen=True)
class SplitResult:
    """An identity/image split: the retained gallery, the probes carved
    out of it, and the identities too small to donate mate probes."""

    gallery: Gallery
    probes: ProbeSet
    single_image_identities: tuple[str, ...]


def split_dataset(
    gallery: Gallery,
    identity_fraction: float = 0.8,
    image_fraction: float = 0.8,
    seed: int = 0,
) -> SplitResult:
    """Split enrolled identities into mate/nonmate sets, then split mate
    identities' images into gallery and mate probes.

    An ``identity_fraction`` share of identities (rounded, both sides kept
    non-empty) stays enrolled; the rest become nonmate probes wholesale.
    Within each enrolled identity an ``image_fraction`` share of images
    (rounded, at least one on each side) stays in the gallery and the rest
    become mate probes. An enrolled identity with a single image keeps it
    in the gallery, donates no probes, and is flagged in the result.

    Deterministic for a given seed: identity order is randomized once,
    then image order per enrolled identity in sorted-id order.
    """
    if not 0.0 < identity_fraction < 1.0:
        raise ValueError(f"identity_fraction must be in (0, 1), got {identity_fraction}")
    if not 0.0 < image_fraction < 1.0:
        raise ValueError(f"image_fraction must be in (0, 1), got {image_fraction}")
    ids = sorted(gallery.entries)
    if len(ids) < 2:
        raise EmptyInputError("need at least 2 identities to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    num_enrolled = int(round(identity_fraction * len(ids)))
    num_enrolled = min(max(num_enrolled, 1), len(ids) - 1)
    enrolled = sorted(ids[i] for i in order[:num_enrolled])
    held_out = sorted(ids[i] for i in order[num_enrolled:])

    entries: dict[str, np.ndarray] = {}
    mate_ids: list[str] = []
    mate_rows: list[np.ndarray] = []
    singles: list[str] = []
    for identity in enrolled:
        block = gallery.entries[identity]
        n = block.shape[0]
        if n == 1:
            entries[identity] = block
            singles.append(identity)
            continue
        perm = rng.permutation(n)
        keep = int(round(image_fraction * n))
        keep = min(max(keep, 1), n - 1)
        gallery_rows = np.sort(perm[:keep])
        probe_rows = np.sort(perm[keep:])
        entries[identity] = block[gallery_rows]
        for row in probe_rows:
            mate_ids.append(identity)
            mate_rows.append(block[row])

    nonmate_rows: list[np.ndarray] = []
    for identity in held_out:
        nonmate_rows.extend(gallery.entries[identity])

    split_gallery = Gallery.from_vectors(entries, normalize=False)
    probes = ProbeSet.from_vectors(
        mate_ids,
        np.asarray(mate_rows) if mate_rows else np.empty((0, gallery.dim)),
        np.asarray(nonmate_rows) if nonmate_rows else np.empty((0, gallery.dim)),
        dim=gallery.dim,
        normalize=False,
    )
    return SplitResult(
        gallery=split_gallery,
        probes=probes,
        single_image_identities=tuple(singles),
    )
