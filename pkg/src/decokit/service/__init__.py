"""HTTP service layer: FastAPI app, request/response schemas, client helpers."""

from .app import create_app
from .client import SERVER_ENV_VAR, make_client, post

__all__ = ["SERVER_ENV_VAR", "create_app", "make_client", "post"]
