"""HTTP client for the service.

With no server URL the client mounts the ASGI application in process, so the
CLI exercises exactly the HTTP surface a remote deployment would, without
needing a running server. Pass a URL to talk to a real one.
"""

from __future__ import annotations

import httpx

from .service import schemas


class ServiceError(RuntimeError):
    """The service rejected a request."""


class ServiceClient:
    def __init__(self, server: str | None = None):
        if server is None:
            import warnings

            with warnings.catch_warnings():
                # starlette's in-process client warns about a future httpx2
                # switch; the httpx transport is what we want here.
                warnings.filterwarnings("ignore", message=".*httpx2.*")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._http: httpx.Client = TestClient(create_app())
        else:
            self._http = httpx.Client(base_url=server, timeout=None)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, payload) -> dict:
        response = self._http.post(path, json=payload.model_dump(mode="json"))
        return self._check(response)

    def _check(self, response: httpx.Response) -> dict:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(f"{response.status_code}: {detail}")
        return response.json()

    def health(self) -> schemas.HealthResponse:
        return schemas.HealthResponse(**self._check(self._http.get("/health")))

    def presets(self) -> schemas.PresetsResponse:
        return schemas.PresetsResponse(**self._check(self._http.get("/presets")))

    def simulate(self, request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return schemas.SimulateResponse(**self._post("/simulate", request))

    def estimate(self, request: schemas.EstimateRequest) -> schemas.EstimateResponse:
        return schemas.EstimateResponse(**self._post("/estimate", request))

    def append(self, request: schemas.AppendRequest) -> schemas.AppendResponse:
        return schemas.AppendResponse(**self._post("/estimate/append", request))

    def run(self, request: schemas.RunRequest) -> schemas.RunResponse:
        return schemas.RunResponse(**self._post("/run", request))
