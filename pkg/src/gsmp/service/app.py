"""The HTTP service: stateless endpoints over the condensation and
evaluation pipeline.

Every endpoint is a pure function of its request body, so the service
scales horizontally and two identical requests always return identical
bodies. Domain errors surface as HTTP 400 with the error message.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..config import METHODS
from ..datafile import split_dataset
from ..errors import GsmpError
from ..evaluation import EvalReport, SweepGrid, evaluate_method, run_sweep
from ..generation import GenerationParams, condense_gallery
from ..identification import accept, identify_batch
from ..pipeline import condense_with_method
from ..pruning import PruningParams, prune_gallery
from ..synth import SynthConfig, generate
from . import schemas


def _pruning_params(options: schemas.PruningOptions) -> PruningParams:
    return PruningParams(
        bandwidth=options.bandwidth,
        pruning_ratio=options.pruning_ratio,
        convergence_tol=options.convergence_tol,
        max_iterations=options.max_iterations,
    )


def _generation_params(options: schemas.GenerationOptions) -> GenerationParams:
    return GenerationParams(
        radius=options.radius,
        margin=options.margin,
        line_search_steps=options.line_search_steps,
    )


def _report_payload(report: EvalReport) -> schemas.ReportPayload:
    return schemas.ReportPayload(
        method=report.method,
        operating_points=[
            schemas.OperatingPointPayload(
                target_fpir=p.target_fpir,
                threshold=p.threshold,
                fnir=p.fnir,
                realized_fpir=p.realized_fpir,
            )
            for p in report.operating_points
        ],
        precision=report.precision,
        recall=report.recall,
        precision_defined=report.precision_defined,
        avg_gallery_size=report.avg_gallery_size,
        num_mates=report.num_mates,
        num_nonmates=report.num_nonmates,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="gsmp", version="0.1.0")

    @app.exception_handler(GsmpError)
    async def domain_error(request: Request, exc: GsmpError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok"}

    @app.post("/synth")
    async def synth(request: schemas.SynthRequest) -> schemas.SynthResponse:
        config = SynthConfig(
            num_identities=request.num_identities,
            dim=request.dim,
            vectors_per_identity=(request.min_vectors, request.max_vectors),
            cluster_spread=request.cluster_spread,
            mislabel_rate=request.mislabel_rate,
            noise_rate=request.noise_rate,
            mates_per_identity=request.mates_per_identity,
            num_nonmate_identities=request.num_nonmate_identities,
            seed=request.seed,
        )
        data = generate(config)
        return schemas.SynthResponse(
            gallery=schemas.gallery_payload(data.gallery),
            probes=schemas.probes_payload(data.probes),
            truth={
                identity: kinds.tolist()
                for identity, kinds in sorted(data.truth.kinds.items())
            },
        )

    @app.post("/prune")
    async def prune(request: schemas.PruneRequest) -> schemas.PruneResponse:
        gallery = schemas.to_gallery(request.gallery, request.normalize)
        pruned, retained = prune_gallery(gallery, _pruning_params(request.pruning))
        removed = {
            identity: sorted(
                set(range(gallery.entries[identity].shape[0])) - kept
            )
            for identity, kept in retained.items()
        }
        return schemas.PruneResponse(
            gallery=schemas.gallery_payload(pruned),
            retained={identity: sorted(kept) for identity, kept in retained.items()},
            removed=removed,
        )

    @app.post("/generate")
    async def generate_endpoint(
        request: schemas.GenerateRequest,
    ) -> schemas.CondensedPayload:
        gallery = schemas.to_gallery(request.gallery, request.normalize)
        condensed = condense_gallery(
            gallery, None, _generation_params(request.generation)
        )
        return schemas.condensed_payload(condensed)

    @app.post("/condense")
    async def condense(request: schemas.CondenseRequest) -> schemas.CondensedPayload:
        gallery = schemas.to_gallery(request.gallery, request.normalize)
        condensed = condense_gallery(
            gallery,
            _pruning_params(request.pruning),
            _generation_params(request.generation),
        )
        return schemas.condensed_payload(condensed)

    @app.post("/identify")
    async def identify(request: schemas.IdentifyRequest) -> schemas.IdentifyResponse:
        condensed = schemas.to_condensed(request.condensed)
        probes = schemas.to_probes(request.probes, condensed.dim, request.normalize)
        stacked = np.concatenate([probes.mate_vectors, probes.nonmate_vectors])
        results = identify_batch(stacked, condensed)
        return schemas.IdentifyResponse(
            results=[
                schemas.IdentifyLine(
                    probe_index=r.probe_index,
                    best_id=r.best_id,
                    best_distance=r.best_distance,
                    second_distance=r.second_distance,
                    accepted=accept(r, request.threshold),
                )
                for r in results
            ]
        )

    @app.post("/evaluate")
    async def evaluate(request: schemas.EvaluateRequest) -> schemas.ReportPayload:
        if (request.gallery is None) == (request.condensed is None):
            raise GsmpError("provide exactly one of gallery or condensed")
        if request.condensed is not None:
            condensed = schemas.to_condensed(request.condensed)
        else:
            if request.method not in METHODS:
                raise GsmpError(
                    f"unknown method {request.method!r}; expected one of "
                    f"{', '.join(METHODS)}"
                )
            gallery = schemas.to_gallery(request.gallery, request.normalize)
            condensed = condense_with_method(
                gallery,
                request.method,
                pruning=_pruning_params(request.pruning),
                generation=_generation_params(request.generation),
            )
        probes = schemas.to_probes(request.probes, condensed.dim, request.normalize)
        report = evaluate_method(condensed, probes, tuple(request.target_fpirs))
        return _report_payload(report)

    @app.post("/sweep")
    async def sweep(request: schemas.SweepRequest) -> schemas.SweepResponse:
        gallery = schemas.to_gallery(request.gallery, request.normalize)
        probes = schemas.to_probes(request.probes, gallery.dim, request.normalize)
        grid = SweepGrid(
            radii=tuple(request.radii),
            bandwidths=tuple(request.bandwidths),
            pruning_ratios=tuple(request.pruning_ratios),
            target_fpirs=tuple(request.target_fpirs),
        )
        results = run_sweep(gallery, probes, grid)
        return schemas.SweepResponse(
            results=[
                schemas.SweepRow(
                    radius=r.radius,
                    bandwidth=r.bandwidth,
                    pruning_ratio=r.pruning_ratio,
                    report=_report_payload(r.report),
                )
                for r in results
            ]
        )

    @app.post("/split")
    async def split(request: schemas.SplitRequest) -> schemas.SplitResponse:
        gallery = schemas.to_gallery(request.gallery, request.normalize)
        result = split_dataset(
            gallery,
            identity_fraction=request.identity_fraction,
            image_fraction=request.image_fraction,
            seed=request.seed,
        )
        return schemas.SplitResponse(
            gallery=schemas.gallery_payload(result.gallery),
            probes=schemas.probes_payload(result.probes),
            single_image_identities=list(result.single_image_identities),
        )

    return app


app = create_app()
