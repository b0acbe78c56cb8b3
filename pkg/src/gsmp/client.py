"""Client for the HTTP service.

By default calls are served in-process: the request goes through the real
ASGI app without a socket, so the CLI works with no server running and
stays byte-identical to a served deployment. Pass a base URL to talk to a
remote instance instead.
"""

from __future__ import annotations

import asyncio

import httpx
from pydantic import BaseModel

from .errors import GsmpError
from .service import schemas
from .service.app import app


class ServiceError(GsmpError):
    """The service rejected a request."""


class ServiceClient:
    """Typed wrapper over the service endpoints."""

    def __init__(self, server: str | None = None):
        self.server = server

    async def _post_async(self, path: str, payload: BaseModel) -> dict:
        if self.server is None:
            transport = httpx.ASGITransport(app=app)
            base_url = "http://gsmp.local"
        else:
            transport = None
            base_url = self.server
        async with httpx.AsyncClient(
            transport=transport, base_url=base_url, timeout=None
        ) as client:
            response = await client.post(
                path, json=payload.model_dump(mode="json")
            )
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(f"{path}: {detail}")
        return response.json()

    def _post(self, path: str, payload: BaseModel, response_model):
        body = asyncio.run(self._post_async(path, payload))
        return response_model.model_validate(body)

    def synth(self, request: schemas.SynthRequest) -> schemas.SynthResponse:
        return self._post("/synth", request, schemas.SynthResponse)

    def prune(self, request: schemas.PruneRequest) -> schemas.PruneResponse:
        return self._post("/prune", request, schemas.PruneResponse)

    def generate(self, request: schemas.GenerateRequest) -> schemas.CondensedPayload:
        return self._post("/generate", request, schemas.CondensedPayload)

    def condense(self, request: schemas.CondenseRequest) -> schemas.CondensedPayload:
        return self._post("/condense", request, schemas.CondensedPayload)

    def identify(self, request: schemas.IdentifyRequest) -> schemas.IdentifyResponse:
        return self._post("/identify", request, schemas.IdentifyResponse)

    def evaluate(self, request: schemas.EvaluateRequest) -> schemas.ReportPayload:
        return self._post("/evaluate", request, schemas.ReportPayload)

    def sweep(self, request: schemas.SweepRequest) -> schemas.SweepResponse:
        return self._post("/sweep", request, schemas.SweepResponse)

    def split(self, request: schemas.SplitRequest) -> schemas.SplitResponse:
        return self._post("/split", request, schemas.SplitResponse)
