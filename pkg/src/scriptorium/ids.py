"""Identifier and token generation."""

from __future__ import annotations

import secrets
from uuid import uuid4


def new_id(prefix: str) -> str:
    return f"{prefix}_{uuid4().hex[:12]}"


def new_token() -> str:
    """256 bits of randomness, URL-safe base64."""
    return secrets.token_urlsafe(32)
