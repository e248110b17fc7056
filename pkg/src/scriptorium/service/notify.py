"""Outbound notification interface: a pluggable sink, no mail transport."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Protocol

from ..store import utcnow

logger = logging.getLogger("scriptorium.notify")


@dataclass
class Notification:
    kind: str               # e.g. "invitation_rotated", "task_rejected"
    recipient: str | None   # user_id, or None for project-wide digests
    subject: str
    body: str
    at: datetime = field(default_factory=utcnow)


class NotificationSink(Protocol):
    def send(self, notification: Notification) -> None: ...


class MemorySink:
    """Collects notifications; the default sink and the test double."""

    def __init__(self) -> None:
        self.messages: list[Notification] = []

    def send(self, notification: Notification) -> None:
        self.messages.append(notification)


class LogSink:
    def send(self, notification: Notification) -> None:
        logger.info("notify %s -> %s: %s", notification.kind,
                    notification.recipient or "<project>", notification.subject)
