"""Platform facade: one store, all services, optional file persistence."""

from __future__ import annotations

import random
from datetime import datetime
from pathlib import Path
from typing import Callable

from .accounts import (
    INVITATIONS,
    MEMBERSHIPS,
    PROJECTS,
    USERS,
    AccountService,
    InvitationLink,
    Membership,
    Project,
    UserAccount,
)
from .elements import ELEMENTS, ElementRecord, ElementService
from .exports import ExportService
from .stats import StatsService
from .store import Store, utcnow
from .tasks import (
    ANNOTATIONS,
    CAMPAIGNS,
    COMMENTS,
    EVENTS,
    TASKS,
    Annotation,
    Campaign,
    CommentRecord,
    TaskRecord,
    TaskService,
    TransitionEvent,
)

PERSISTED_COLLECTIONS: dict[str, tuple[type, str]] = {
    USERS: (UserAccount, "user_id"),
    PROJECTS: (Project, "project_id"),
    MEMBERSHIPS: (Membership, "key"),
    INVITATIONS: (InvitationLink, "token"),
    ELEMENTS: (ElementRecord, "element_id"),
    CAMPAIGNS: (Campaign, "campaign_id"),
    TASKS: (TaskRecord, "task_id"),
    ANNOTATIONS: (Annotation, "annotation_id"),
    COMMENTS: (CommentRecord, "comment_id"),
    EVENTS: (TransitionEvent, "event_id"),
}


class Platform:
    def __init__(
        self,
        store: Store | None = None,
        clock: Callable[[], datetime] = utcnow,
        rng: random.Random | None = None,
    ):
        self.store = store or Store()
        self.clock = clock
        self.persistence_registry = dict(PERSISTED_COLLECTIONS)
        self.accounts = AccountService(self.store, clock=clock)
        self.elements = ElementService(self.store)
        self.tasks = TaskService(self.store, self.accounts, self.elements,
                                 clock=clock, rng=rng)
        self.stats = StatsService(self.store, self.tasks)
        self.exports = ExportService(self.store)

    def register_collection(self, name: str, cls: type, id_field: str) -> None:
        """Service layers add their own persisted collections (jobs, artifacts)."""
        self.persistence_registry[name] = (cls, id_field)

    def save(self, path: str | Path) -> None:
        self.store.save_json(path, self.persistence_registry)

    def load(self, path: str | Path) -> None:
        self.store.load_json(path, self.persistence_registry)

    @classmethod
    def open(cls, path: str | Path | None = None, **kwargs) -> "Platform":
        platform = cls(**kwargs)
        if path is not None and Path(path).exists():
            platform.load(path)
        return platform
