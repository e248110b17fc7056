"""Password hashing and session management.

Sessions are server-side: the client holds a random bearer token, the
store holds only an HMAC of it keyed by the session secret, so a leaked
store file cannot be replayed as a cookie.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Any, Callable

from ..ids import new_token
from ..store import Store, isoformat_utc, parse_utc, utcnow

PBKDF2_ITERATIONS = 120_000
SESSIONS = "sessions"  # ephemeral: intentionally absent from persistence


def hash_password(password: str) -> str:
    salt = secrets.token_hex(16)
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), bytes.fromhex(salt), PBKDF2_ITERATIONS
    )
    return f"pbkdf2_sha256${PBKDF2_ITERATIONS}${salt}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt, expected = stored.split("$")
        if scheme != "pbkdf2_sha256":
            return False
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt), int(iterations)
        )
        return hmac.compare_digest(digest.hex(), expected)
    except (ValueError, TypeError):
        return False


@dataclass
class SessionRecord:
    token_hmac: str
    user_id: str
    expires_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "token_hmac": self.token_hmac,
            "user_id": self.user_id,
            "expires_at": isoformat_utc(self.expires_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "SessionRecord":
        return cls(
            token_hmac=row["token_hmac"],
            user_id=row["user_id"],
            expires_at=parse_utc(row["expires_at"]),
        )


class SessionManager:
    def __init__(self, store: Store, secret: str,
                 ttl_seconds: int = 7 * 24 * 3600,
                 clock: Callable[[], datetime] = utcnow):
        self._store = store
        self._secret = secret.encode("utf-8")
        self._ttl = timedelta(seconds=ttl_seconds)
        self._clock = clock

    def _mac(self, token: str) -> str:
        return hmac.new(self._secret, token.encode("utf-8"), hashlib.sha256).hexdigest()

    def create(self, user_id: str) -> str:
        token = new_token()
        record = SessionRecord(
            token_hmac=self._mac(token),
            user_id=user_id,
            expires_at=self._clock() + self._ttl,
        )
        self._store.put(SESSIONS, record.token_hmac, record)
        return token

    def resolve(self, token: str | None) -> str | None:
        """Token -> user_id, or None when missing, unknown, or expired."""
        if not token:
            return None
        record = self._store.get(SESSIONS, self._mac(token))
        if record is None or record.expires_at <= self._clock():
            return None
        return record.user_id

    def revoke(self, token: str | None) -> None:
        if token:
            self._store.delete(SESSIONS, self._mac(token))
