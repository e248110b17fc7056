"""Service configuration from the environment."""

from __future__ import annotations

import os
import secrets
from dataclasses import dataclass, field


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8070
    storage_path: str | None = None        # JSON store file; None = memory only
    artifact_dir: str | None = None        # export artifacts; None = memory only
    session_secret: str = field(default_factory=lambda: secrets.token_hex(32))
    session_ttl_seconds: int = 7 * 24 * 3600
    default_claim_ttl_seconds: int = 24 * 3600
    default_context_margin: float = 0.15
    page_size: int = 100
    inline_jobs: bool = False              # run jobs at enqueue time (tests, CLI one-shots)

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        cfg.host = env.get("SCRIPTORIUM_HOST", cfg.host)
        cfg.port = int(env.get("SCRIPTORIUM_PORT", cfg.port))
        cfg.storage_path = env.get("SCRIPTORIUM_STORAGE", cfg.storage_path)
        cfg.artifact_dir = env.get("SCRIPTORIUM_ARTIFACTS", cfg.artifact_dir)
        cfg.session_secret = env.get("SCRIPTORIUM_SESSION_SECRET", cfg.session_secret)
        cfg.session_ttl_seconds = int(
            env.get("SCRIPTORIUM_SESSION_TTL", cfg.session_ttl_seconds))
        cfg.default_claim_ttl_seconds = int(
            env.get("SCRIPTORIUM_CLAIM_TTL", cfg.default_claim_ttl_seconds))
        cfg.default_context_margin = float(
            env.get("SCRIPTORIUM_CONTEXT_MARGIN", cfg.default_context_margin))
        cfg.page_size = int(env.get("SCRIPTORIUM_PAGE_SIZE", cfg.page_size))
        return cfg
