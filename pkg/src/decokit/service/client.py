"""Client helpers used by the CLI.

Without a server URL the client runs the FastAPI app in process through
starlette's test transport, so the CLI works with no port or daemon; with
one (flag or DECOKIT_SERVER) it speaks real HTTP. Either way the error
contract is the same: 4xx replies raise InputError, transport failures and
5xx replies raise TransportError.
"""

from __future__ import annotations

import os
import warnings

import httpx

from ..errors import InputError, TransportError

SERVER_ENV_VAR = "DECOKIT_SERVER"


def make_client(server: str | None = None) -> httpx.Client:
    """An httpx client bound to a remote server or the in-process app."""
    target = server or os.environ.get(SERVER_ENV_VAR)
    if target:
        return httpx.Client(base_url=target, timeout=600.0)
    with warnings.catch_warnings():
        # starlette's test client warns about its httpx backend; that is
        # noise for CLI users, not something they can act on.
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from .app import create_app

        return TestClient(create_app(), raise_server_exceptions=False)


def post(client: httpx.Client, path: str, payload: dict) -> dict:
    """POST JSON, map the status class onto the toolkit error hierarchy."""
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as err:
        raise TransportError(f"service request failed: {err}") from err
    if response.status_code >= 500:
        raise TransportError(_detail(response))
    if response.status_code >= 400:
        raise InputError(_detail(response))
    return response.json()


def _detail(response: httpx.Response) -> str:
    try:
        body = response.json()
        detail = body.get("detail", body)
    except ValueError:
        detail = response.text
    return f"service returned {response.status_code}: {detail}"
