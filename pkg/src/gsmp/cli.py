"""Command-line surface.

Every data-path command is a thin client over the HTTP service: it reads
dataset files, posts typed requests (served in-process unless --server
points at a remote instance), and writes the typed responses back to
files or stdout. All outputs are deterministic: same flags and seeds,
same bytes.
"""

from __future__ import annotations

import functools
import sys

import click

from .client import ServiceClient
from .config import RunConfig, load_config
from .core import CondensedGallery, Provenance
from .datafile import (
    build_condensed,
    build_gallery,
    build_probes,
    dataset_from_condensed,
    dataset_from_gallery,
    dataset_from_probes,
    read_dataset,
    write_dataset,
)
from .errors import GsmpError
from .reporting import (
    render_identify_lines,
    render_prune_lines,
    render_report_text,
    render_sweep_text,
)
from .service import schemas
from .synth import KIND_CLEAN, KIND_MISLABEL

_FORMATS = click.Choice(["binary", "text"])


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GsmpError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _config(path: str | None) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _floats_csv(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise GsmpError(f"expected comma-separated numbers, got {raw!r}")


def _gallery_payload_from_file(path: str) -> schemas.GalleryPayload:
    # vectors travel verbatim; the service applies normalize-on-ingest
    gallery = build_gallery(read_dataset(path), normalize=False)
    return schemas.gallery_payload(gallery)


def _probes_payload_from_file(path: str) -> schemas.ProbesPayload:
    probes = build_probes(read_dataset(path), normalize=False)
    return schemas.probes_payload(probes)


def _condensed_payload_from_file(path: str) -> schemas.CondensedPayload:
    return schemas.condensed_payload(build_condensed(read_dataset(path)))


def _write_gallery_payload(payload: schemas.GalleryPayload, path: str, format: str):
    write_dataset(dataset_from_gallery(schemas.to_gallery(payload, normalize=False)), path, format)


def _write_probes_payload(payload: schemas.ProbesPayload, path: str, format: str):
    write_dataset(dataset_from_probes(schemas.to_probes(payload, normalize=False)), path, format)


def _write_condensed_payload(payload: schemas.CondensedPayload, path: str, format: str):
    write_dataset(dataset_from_condensed(schemas.to_condensed(payload)), path, format)


def _condensed_input(gallery: str | None, condensed: str | None, normalize: bool) -> schemas.CondensedPayload:
    """Either a condensed file verbatim, or a raw gallery file lifted to a
    raw condensed payload (normalized here, since samples travel verbatim)."""
    if (gallery is None) == (condensed is None):
        raise GsmpError("provide exactly one of --gallery or --condensed")
    if condensed is not None:
        return _condensed_payload_from_file(condensed)
    raw = build_gallery(read_dataset(gallery), normalize=normalize)
    return schemas.condensed_payload(
        CondensedGallery.from_gallery(raw, Provenance.RAW)
    )


@click.group()
@click.option("--server", default=None, metavar="URL", help="Remote service URL; default is in-process.")
@click.pass_context
def main(ctx, server):
    """Condense identity galleries and evaluate open-set identification."""
    ctx.obj = ServiceClient(server)


@main.command()
@click.option("--identities", default=100, show_default=True)
@click.option("--dim", default=64, show_default=True)
@click.option("--min-vectors", default=20, show_default=True)
@click.option("--max-vectors", default=60, show_default=True)
@click.option("--spread", default=0.15, show_default=True, help="Cluster spread before renormalization.")
@click.option("--mislabel-rate", default=0.0, show_default=True)
@click.option("--noise-rate", default=0.0, show_default=True)
@click.option("--mates", default=2, show_default=True, help="Mate probes per identity.")
@click.option("--nonmate-identities", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--gallery-out", required=True, type=click.Path())
@click.option("--probes-out", required=True, type=click.Path())
@click.option("--truth-out", default=None, type=click.Path(), help="Also write identity,index,kind lines.")
@click.option("--format", "format_", type=_FORMATS, default="binary", show_default=True)
@click.pass_obj
@_handle_errors
def synth(client, identities, dim, min_vectors, max_vectors, spread, mislabel_rate,
          noise_rate, mates, nonmate_identities, seed, gallery_out, probes_out,
          truth_out, format_):
    """Generate a synthetic dataset with known outliers."""
    response = client.synth(schemas.SynthRequest(
        num_identities=identities,
        dim=dim,
        min_vectors=min_vectors,
        max_vectors=max_vectors,
        cluster_spread=spread,
        mislabel_rate=mislabel_rate,
        noise_rate=noise_rate,
        mates_per_identity=mates,
        num_nonmate_identities=nonmate_identities,
        seed=seed,
    ))
    _write_gallery_payload(response.gallery, gallery_out, format_)
    _write_probes_payload(response.probes, probes_out, format_)
    if truth_out is not None:
        kind_names = {KIND_CLEAN: "clean", KIND_MISLABEL: "mislabel"}
        with open(truth_out, "w", encoding="utf-8") as fh:
            for identity in sorted(response.truth):
                for index, kind in enumerate(response.truth[identity]):
                    fh.write(f"{identity},{index},{kind_names.get(kind, 'noise')}\n")
    click.echo(f"wrote {gallery_out} and {probes_out}")


@main.command()
@click.option("--gallery", "gallery_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--bandwidth", type=float, default=None, help="Mean-shift kernel radius.")
@click.option("--pruning-ratio", type=float, default=None, help="0 keeps all, 1 keeps only the largest cluster.")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--format", "format_", type=_FORMATS, default="binary", show_default=True)
@click.option("--no-normalize", is_flag=True, help="Skip L2 normalization on ingest.")
@click.pass_obj
@_handle_errors
def prune(client, gallery_path, out, bandwidth, pruning_ratio, config_path, format_, no_normalize):
    """Remove small mean-shift clusters from every identity.

    Prints one identity,removed_index line per removed vector."""
    cfg = _config(config_path)
    response = client.prune(schemas.PruneRequest(
        gallery=_gallery_payload_from_file(gallery_path),
        pruning=schemas.PruningOptions(
            bandwidth=bandwidth if bandwidth is not None else cfg.bandwidth,
            pruning_ratio=pruning_ratio if pruning_ratio is not None else cfg.pruning_ratio,
        ),
        normalize=cfg.normalize_on_ingest and not no_normalize,
    ))
    _write_gallery_payload(response.gallery, out, format_)
    click.echo(render_prune_lines(response.removed), nl=False)


@main.command()
@click.option("--gallery", "gallery_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--radius", type=float, default=None, help="Covering hypersphere radius.")
@click.option("--margin", type=float, default=None, help="Pairing margin; default radius/10.")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--format", "format_", type=_FORMATS, default="binary", show_default=True)
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def generate(client, gallery_path, out, radius, margin, config_path, format_, no_normalize):
    """Condense each identity to covering samples (no pruning)."""
    cfg = _config(config_path)
    response = client.generate(schemas.GenerateRequest(
        gallery=_gallery_payload_from_file(gallery_path),
        generation=schemas.GenerationOptions(
            radius=radius if radius is not None else cfg.radius,
            margin=margin if margin is not None else cfg.margin,
        ),
        normalize=cfg.normalize_on_ingest and not no_normalize,
    ))
    _write_condensed_payload(response, out, format_)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--gallery", "gallery_path", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--bandwidth", type=float, default=None)
@click.option("--pruning-ratio", type=float, default=None)
@click.option("--radius", type=float, default=None)
@click.option("--margin", type=float, default=None)
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--format", "format_", type=_FORMATS, default="binary", show_default=True)
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def condense(client, gallery_path, out, bandwidth, pruning_ratio, radius, margin,
             config_path, format_, no_normalize):
    """Prune outliers, then condense to covering samples."""
    cfg = _config(config_path)
    response = client.condense(schemas.CondenseRequest(
        gallery=_gallery_payload_from_file(gallery_path),
        pruning=schemas.PruningOptions(
            bandwidth=bandwidth if bandwidth is not None else cfg.bandwidth,
            pruning_ratio=pruning_ratio if pruning_ratio is not None else cfg.pruning_ratio,
        ),
        generation=schemas.GenerationOptions(
            radius=radius if radius is not None else cfg.radius,
            margin=margin if margin is not None else cfg.margin,
        ),
        normalize=cfg.normalize_on_ingest and not no_normalize,
    ))
    _write_condensed_payload(response, out, format_)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--condensed", "condensed_path", default=None, type=click.Path())
@click.option("--gallery", "gallery_path", default=None, type=click.Path())
@click.option("--probes", "probes_path", required=True, type=click.Path())
@click.option("--threshold", type=float, required=True)
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def identify(client, condensed_path, gallery_path, probes_path, threshold, no_normalize):
    """Top-1 search for every probe.

    Prints probe_index,best_id,distance,accepted lines; probes are
    numbered mates first, then nonmates."""
    response = client.identify(schemas.IdentifyRequest(
        condensed=_condensed_input(gallery_path, condensed_path, not no_normalize),
        probes=_probes_payload_from_file(probes_path),
        threshold=threshold,
        normalize=not no_normalize,
    ))
    click.echo(render_identify_lines(response.results), nl=False)


@main.command()
@click.option("--gallery", "gallery_path", default=None, type=click.Path())
@click.option("--condensed", "condensed_path", default=None, type=click.Path())
@click.option("--probes", "probes_path", required=True, type=click.Path())
@click.option("--method", default=None, type=click.Choice(["raw", "prun_raw", "sgl", "prun_sgl", "gen", "prun_gen"]))
@click.option("--target-fpirs", default=None, metavar="LIST", help="Comma-separated targets, e.g. 0.01,0.1.")
@click.option("--bandwidth", type=float, default=None)
@click.option("--pruning-ratio", type=float, default=None)
@click.option("--radius", type=float, default=None)
@click.option("--margin", type=float, default=None)
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def eval(client, gallery_path, condensed_path, probes_path, method, target_fpirs,
         bandwidth, pruning_ratio, radius, margin, config_path, no_normalize):
    """Evaluate one method: FNIR at each target FPIR, precision/recall."""
    cfg = _config(config_path)
    if (gallery_path is None) == (condensed_path is None):
        raise GsmpError("provide exactly one of --gallery or --condensed")
    normalize = cfg.normalize_on_ingest and not no_normalize
    request = schemas.EvaluateRequest(
        gallery=_gallery_payload_from_file(gallery_path) if gallery_path else None,
        condensed=_condensed_payload_from_file(condensed_path) if condensed_path else None,
        probes=_probes_payload_from_file(probes_path),
        method=method if method is not None else cfg.method,
        pruning=schemas.PruningOptions(
            bandwidth=bandwidth if bandwidth is not None else cfg.bandwidth,
            pruning_ratio=pruning_ratio if pruning_ratio is not None else cfg.pruning_ratio,
        ),
        generation=schemas.GenerationOptions(
            radius=radius if radius is not None else cfg.radius,
            margin=margin if margin is not None else cfg.margin,
        ),
        target_fpirs=list(_floats_csv(target_fpirs) if target_fpirs else cfg.target_fpirs),
        normalize=normalize,
    )
    click.echo(render_report_text(client.evaluate(request)), nl=False)


@main.command()
@click.option("--gallery", "gallery_path", required=True, type=click.Path())
@click.option("--probes", "probes_path", required=True, type=click.Path())
@click.option("--radii", required=True, metavar="LIST")
@click.option("--bandwidths", default="", metavar="LIST")
@click.option("--pruning-ratios", default="", metavar="LIST", help="Empty sweeps the no-pruning variant.")
@click.option("--target-fpirs", default=None, metavar="LIST")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def sweep(client, gallery_path, probes_path, radii, bandwidths, pruning_ratios,
          target_fpirs, config_path, no_normalize):
    """Grid-sweep radius/bandwidth/pruning ratio; report sorted by FNIR."""
    cfg = _config(config_path)
    response = client.sweep(schemas.SweepRequest(
        gallery=_gallery_payload_from_file(gallery_path),
        probes=_probes_payload_from_file(probes_path),
        radii=list(_floats_csv(radii)),
        bandwidths=list(_floats_csv(bandwidths)) if bandwidths else [],
        pruning_ratios=list(_floats_csv(pruning_ratios)) if pruning_ratios else [],
        target_fpirs=list(_floats_csv(target_fpirs) if target_fpirs else cfg.target_fpirs),
        normalize=cfg.normalize_on_ingest and not no_normalize,
    ))
    click.echo(render_sweep_text(response.results), nl=False)


@main.command()
@click.option("--gallery", "gallery_path", required=True, type=click.Path())
@click.option("--gallery-out", required=True, type=click.Path(), help="Use {i} for multi-split runs.")
@click.option("--probes-out", required=True, type=click.Path(), help="Use {i} for multi-split runs.")
@click.option("--identity-fraction", default=0.8, show_default=True)
@click.option("--image-fraction", default=0.8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--splits", default=1, show_default=True, help="Independent splits; split i uses seed+i.")
@click.option("--format", "format_", type=_FORMATS, default="binary", show_default=True)
@click.option("--no-normalize", is_flag=True)
@click.pass_obj
@_handle_errors
def split(client, gallery_path, gallery_out, probes_out, identity_fraction,
          image_fraction, seed, splits, format_, no_normalize):
    """Split identities into enrolled/nonmate sets and images into
    gallery/mate probes."""
    if splits < 1:
        raise GsmpError(f"--splits must be >= 1, got {splits}")
    if splits > 1 and ("{i}" not in gallery_out or "{i}" not in probes_out):
        raise GsmpError("multi-split output paths need an {i} placeholder")
    payload = _gallery_payload_from_file(gallery_path)
    for i in range(splits):
        response = client.split(schemas.SplitRequest(
            gallery=payload,
            identity_fraction=identity_fraction,
            image_fraction=image_fraction,
            seed=seed + i,
            normalize=not no_normalize,
        ))
        gpath = gallery_out.replace("{i}", str(i))
        ppath = probes_out.replace("{i}", str(i))
        _write_gallery_payload(response.gallery, gpath, format_)
        _write_probes_payload(response.probes, ppath, format_)
        for identity in response.single_image_identities:
            click.echo(
                f"warning: split {i}: identity {identity} has one image; kept in gallery, no mate probes",
                err=True,
            )
        click.echo(f"wrote {gpath} and {ppath}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
