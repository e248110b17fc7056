"""Campaign and task lifecycle.

Status machine (the only legal transitions):

    draft -> pending        publish_tasks
    pending -> annotated    submit_annotation
    pending -> skipped      skip_task
    annotated -> validated  moderate(validate)
    annotated -> rejected   moderate(reject)
    rejected -> annotated   revise_annotation
    skipped -> pending      publish_tasks (manager re-publish)

Claims and submissions run under the store mutex, so the compare-and-set
on (status, assignee) is linearizable per task.  Every status transition
appends a TransitionEvent consumed by the stats module.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Sequence

from .accounts import AccountService, Role
from .elements import ElementRecord, ElementService
from .errors import (
    CampaignClosed,
    EmptyComment,
    IllegalTransition,
    NotAssignee,
    NotAuthorized,
    PermissionDenied,
    UnknownCampaign,
    UnknownTask,
    ValidationError,
)
from .ids import new_id
from .modes import (
    ElementContext,
    ModeConfig,
    ModeKind,
    config_to_dict,
    validate_config,
    validate_payload,
)
from .store import Store, isoformat_utc, parse_utc, utcnow

DEFAULT_CLAIM_TTL_SECONDS = 24 * 3600
DEFAULT_CONTEXT_MARGIN = 0.15


class CampaignState(str, Enum):
    DRAFT = "draft"
    OPEN = "open"
    CLOSED = "closed"


class TaskStatus(str, Enum):
    DRAFT = "draft"
    PENDING = "pending"
    ANNOTATED = "annotated"
    VALIDATED = "validated"
    REJECTED = "rejected"
    SKIPPED = "skipped"


class Feedback(str, Enum):
    NONE = "none"
    COMMENTED = "commented"
    UNCERTAIN = "uncertain"


LEGAL_TRANSITIONS: dict[TaskStatus, set[TaskStatus]] = {
    TaskStatus.DRAFT: {TaskStatus.PENDING},
    TaskStatus.PENDING: {TaskStatus.ANNOTATED, TaskStatus.SKIPPED},
    TaskStatus.ANNOTATED: {TaskStatus.VALIDATED, TaskStatus.REJECTED},
    TaskStatus.REJECTED: {TaskStatus.ANNOTATED},
    TaskStatus.VALIDATED: set(),
    TaskStatus.SKIPPED: {TaskStatus.PENDING},  # manager re-publish only
}


@dataclass
class Campaign:
    campaign_id: str
    project_id: str
    name: str
    mode: ModeKind
    config: ModeConfig
    guide: str = ""
    state: CampaignState = CampaignState.DRAFT
    batch_size: int = 1
    duplication_factor: int = 1
    duplication_fraction: float = 0.0
    claim_ttl_seconds: int = DEFAULT_CLAIM_TTL_SECONDS
    context_margin: float = DEFAULT_CONTEXT_MARGIN

    def to_dict(self) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "project_id": self.project_id,
            "name": self.name,
            "mode": self.mode.value,
            "config": config_to_dict(self.config),
            "guide": self.guide,
            "state": self.state.value,
            "batch_size": self.batch_size,
            "duplication_factor": self.duplication_factor,
            "duplication_fraction": self.duplication_fraction,
            "claim_ttl_seconds": self.claim_ttl_seconds,
            "context_margin": self.context_margin,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "Campaign":
        mode = ModeKind(row["mode"])
        return cls(
            campaign_id=row["campaign_id"],
            project_id=row["project_id"],
            name=row["name"],
            mode=mode,
            config=validate_config(mode, row["config"]),
            guide=row.get("guide", ""),
            state=CampaignState(row.get("state", "draft")),
            batch_size=int(row.get("batch_size", 1)),
            duplication_factor=int(row.get("duplication_factor", 1)),
            duplication_fraction=float(row.get("duplication_fraction", 0.0)),
            claim_ttl_seconds=int(row.get("claim_ttl_seconds", DEFAULT_CLAIM_TTL_SECONDS)),
            context_margin=float(row.get("context_margin", DEFAULT_CONTEXT_MARGIN)),
        )


@dataclass
class TaskRecord:
    task_id: str
    campaign_id: str
    element_id: str
    status: TaskStatus = TaskStatus.DRAFT
    assignee: str | None = None
    feedback: Feedback = Feedback.NONE
    prefill: dict[str, Any] | None = None
    dup_group: str | None = None
    claimed_at: datetime | None = None
    annotated_at: datetime | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "campaign_id": self.campaign_id,
            "element_id": self.element_id,
            "status": self.status.value,
            "assignee": self.assignee,
            "feedback": self.feedback.value,
            "prefill": self.prefill,
            "dup_group": self.dup_group,
            "claimed_at": isoformat_utc(self.claimed_at) if self.claimed_at else None,
            "annotated_at": isoformat_utc(self.annotated_at) if self.annotated_at else None,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "TaskRecord":
        return cls(
            task_id=row["task_id"],
            campaign_id=row["campaign_id"],
            element_id=row["element_id"],
            status=TaskStatus(row["status"]),
            assignee=row.get("assignee"),
            feedback=Feedback(row.get("feedback", "none")),
            prefill=row.get("prefill"),
            dup_group=row.get("dup_group"),
            claimed_at=parse_utc(row["claimed_at"]) if row.get("claimed_at") else None,
            annotated_at=parse_utc(row["annotated_at"]) if row.get("annotated_at") else None,
        )


@dataclass
class Annotation:
    annotation_id: str
    task_id: str
    author: str
    payload: dict[str, Any]
    created_at: datetime = field(default_factory=utcnow)
    superseded_by: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "annotation_id": self.annotation_id,
            "task_id": self.task_id,
            "author": self.author,
            "payload": self.payload,
            "created_at": isoformat_utc(self.created_at),
            "superseded_by": self.superseded_by,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "Annotation":
        return cls(
            annotation_id=row["annotation_id"],
            task_id=row["task_id"],
            author=row["author"],
            payload=row["payload"],
            created_at=parse_utc(row["created_at"]),
            superseded_by=row.get("superseded_by"),
        )


@dataclass
class CommentRecord:
    comment_id: str
    task_id: str
    author: str
    body: str
    created_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict[str, Any]:
        return {
            "comment_id": self.comment_id,
            "task_id": self.task_id,
            "author": self.author,
            "body": self.body,
            "created_at": isoformat_utc(self.created_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "CommentRecord":
        return cls(
            comment_id=row["comment_id"],
            task_id=row["task_id"],
            author=row["author"],
            body=row["body"],
            created_at=parse_utc(row["created_at"]),
        )


@dataclass
class TransitionEvent:
    event_id: str
    task_id: str
    from_status: TaskStatus
    to_status: TaskStatus
    actor: str | None
    at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "task_id": self.task_id,
            "from": self.from_status.value,
            "to": self.to_status.value,
            "actor": self.actor,
            "at": isoformat_utc(self.at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "TransitionEvent":
        return cls(
            event_id=row["event_id"],
            task_id=row["task_id"],
            from_status=TaskStatus(row["from"]),
            to_status=TaskStatus(row["to"]),
            actor=row.get("actor"),
            at=parse_utc(row["at"]),
        )


CAMPAIGNS = "campaigns"
TASKS = "tasks"
ANNOTATIONS = "annotations"
COMMENTS = "comments"
EVENTS = "events"


def find_reference_text(store: Store, project_id: str, element_id: str) -> str | None:
    """Latest live transcription of an element, searched project-wide.

    Entity-span campaigns index into text produced by an earlier
    transcription campaign; the element may have been the transcription
    target itself, or a line inside a page-level target.
    """
    campaign_ids = {
        c.campaign_id
        for c in store.values(CAMPAIGNS)
        if c.project_id == project_id and c.mode is ModeKind.TRANSCRIPTION
    }
    if not campaign_ids:
        return None
    task_ids = {
        t.task_id for t in store.values(TASKS)
        if t.campaign_id in campaign_ids
    }
    best: tuple[datetime, str] | None = None
    for annotation in store.values(ANNOTATIONS):
        if annotation.task_id not in task_ids or annotation.superseded_by:
            continue
        for entry in annotation.payload.get("texts", []):
            if entry.get("element_id") == element_id:
                if best is None or annotation.created_at > best[0]:
                    best = (annotation.created_at, entry.get("text", ""))
    return best[1] if best else None


def sample_for_duplication(element_ids: Sequence[str], fraction: float) -> list[str]:
    """Deterministic double-annotation sample: ceil(fraction * N) elements.

    Elements are sorted by id and picked systematically (evenly spaced),
    so re-running task creation on the same inputs duplicates the same
    elements.
    """
    if fraction <= 0 or not element_ids:
        return []
    ordered = sorted(element_ids)
    n = len(ordered)
    m = min(n, math.ceil(fraction * n))
    return [ordered[(i * n) // m] for i in range(m)]


class TaskService:
    def __init__(
        self,
        store: Store,
        accounts: AccountService,
        elements: ElementService,
        clock: Callable[[], datetime] = utcnow,
        rng: random.Random | None = None,
    ):
        self._store = store
        self._accounts = accounts
        self._elements = elements
        self._clock = clock
        self._rng = rng or random.Random()

    # -- campaigns -------------------------------------------------------------

    def create_campaign(
        self,
        actor: str,
        project_id: str,
        name: str,
        mode: ModeKind | str,
        config: Mapping[str, Any] | ModeConfig,
        guide: str = "",
        batch_size: int = 1,
        duplication_factor: int = 1,
        duplication_fraction: float = 0.0,
        claim_ttl_seconds: int = DEFAULT_CLAIM_TTL_SECONDS,
        context_margin: float = DEFAULT_CONTEXT_MARGIN,
    ) -> Campaign:
        self._accounts.get_project(project_id)
        self._accounts.require_role(project_id, actor, Role.MANAGER)
        if not name.strip():
            raise ValidationError("campaign name must be non-empty")
        if batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if duplication_factor < 1:
            raise ValidationError("duplication_factor must be >= 1")
        if not (0.0 <= duplication_fraction <= 1.0):
            raise ValidationError("duplication_fraction must be in [0, 1]")
        if duplication_factor > 1 and duplication_fraction <= 0:
            raise ValidationError(
                "duplication_factor > 1 requires duplication_fraction > 0"
            )
        mode = ModeKind(mode)
        campaign = Campaign(
            campaign_id=new_id("cmp"),
            project_id=project_id,
            name=name.strip(),
            mode=mode,
            config=validate_config(mode, config),
            guide=guide,
            batch_size=batch_size,
            duplication_factor=duplication_factor,
            duplication_fraction=duplication_fraction,
            claim_ttl_seconds=claim_ttl_seconds,
            context_margin=context_margin,
        )
        return self._store.put(CAMPAIGNS, campaign.campaign_id, campaign)

    def get_campaign(self, campaign_id: str) -> Campaign:
        campaign = self._store.get(CAMPAIGNS, campaign_id)
        if campaign is None:
            raise UnknownCampaign(campaign_id)
        return campaign

    def update_campaign(self, actor: str, campaign_id: str, *,
                        state: CampaignState | str | None = None,
                        guide: str | None = None,
                        batch_size: int | None = None) -> Campaign:
        campaign = self.get_campaign(campaign_id)
        self._accounts.require_role(campaign.project_id, actor, Role.MANAGER)
        with self._store.lock:
            if state is not None:
                campaign.state = CampaignState(state)
            if guide is not None:
                campaign.guide = guide
            if batch_size is not None:
                if batch_size < 1:
                    raise ValidationError("batch_size must be >= 1")
                campaign.batch_size = batch_size
        return campaign

    def campaigns_of(self, project_id: str) -> list[Campaign]:
        found = self._store.find(CAMPAIGNS, lambda c: c.project_id == project_id)
        return sorted(found, key=lambda c: c.campaign_id)

    # -- element context ---------------------------------------------------------

    def element_context_for(self, campaign: Campaign, element: ElementRecord) -> ElementContext:
        children = tuple(
            (c.element_id, c.element_type)
            for c in self._elements.children_of(element.element_id)
        )
        reference_text = None
        if campaign.mode is ModeKind.ENTITIES:
            reference_text = self.reference_text_for(campaign.project_id, element.element_id)
        return ElementContext(
            element_id=element.element_id,
            image_width=element.image.width,
            image_height=element.image.height,
            element_type=element.element_type,
            children=children,
            reference_text=reference_text,
        )

    def reference_text_for(self, project_id: str, element_id: str) -> str | None:
        return find_reference_text(self._store, project_id, element_id)

    # -- task creation and publication ---------------------------------------------

    def create_tasks(
        self,
        campaign_id: str,
        element_ids: Sequence[str],
        prefills: Mapping[str, Mapping[str, Any]] | None = None,
    ) -> list[TaskRecord]:
        campaign = self.get_campaign(campaign_id)
        if campaign.state is CampaignState.CLOSED:
            raise CampaignClosed(campaign_id)
        prefills = dict(prefills or {})

        elements = [self._elements.get(eid) for eid in element_ids]
        normalized_prefills: dict[str, dict[str, Any]] = {}
        for element in elements:
            raw = prefills.get(element.element_id)
            if raw is not None:
                context = self.element_context_for(campaign, element)
                normalized_prefills[element.element_id] = validate_payload(
                    campaign.config, context, raw
                )

        duplicated = set()
        if campaign.duplication_factor > 1:
            duplicated = set(sample_for_duplication(
                [e.element_id for e in elements], campaign.duplication_fraction
            ))

        created: list[TaskRecord] = []
        with self._store.lock:
            for element in elements:
                dup_group = new_id("grp") if element.element_id in duplicated else None
                copies = campaign.duplication_factor if dup_group else 1
                for _ in range(copies):
                    task = TaskRecord(
                        task_id=new_id("tsk"),
                        campaign_id=campaign.campaign_id,
                        element_id=element.element_id,
                        status=TaskStatus.DRAFT,
                        prefill=normalized_prefills.get(element.element_id),
                        dup_group=dup_group,
                    )
                    self._store.put(TASKS, task.task_id, task)
                    created.append(task)
        return created

    def publish_tasks(self, actor: str, campaign_id: str, task_ids: Sequence[str]) -> int:
        campaign = self.get_campaign(campaign_id)
        self._accounts.require_role(campaign.project_id, actor, Role.MANAGER)
        with self._store.lock:
            tasks = [self._get_task(tid) for tid in task_ids]
            for task in tasks:
                if task.status not in (TaskStatus.DRAFT, TaskStatus.SKIPPED):
                    raise IllegalTransition(
                        f"task {task.task_id} is {task.status.value}, not publishable"
                    )
            now = self._clock()
            for task in tasks:
                previous = task.status
                task.status = TaskStatus.PENDING
                task.assignee = None
                task.claimed_at = None
                self._log_transition(task, previous, TaskStatus.PENDING, actor, at=now)
        return len(tasks)

    # -- claiming --------------------------------------------------------------

    def claim_batch(self, campaign_id: str, user: str,
                    strategy: str = "sequential") -> list[TaskRecord]:
        campaign = self.get_campaign(campaign_id)
        self._accounts.require_role(campaign.project_id, user, Role.CONTRIBUTOR)
        if campaign.state is not CampaignState.OPEN:
            raise CampaignClosed(f"campaign {campaign_id} is {campaign.state.value}")
        if strategy not in ("sequential", "random"):
            raise ValidationError(f"unknown claim strategy {strategy!r}")

        with self._store.lock:
            tasks = self._store.find(TASKS, lambda t: t.campaign_id == campaign_id)
            taken_groups = self._groups_touched_by(user, tasks)
            candidates = [
                t for t in tasks
                if t.status is TaskStatus.PENDING and t.assignee is None
            ]
            if strategy == "sequential":
                order_of = {
                    t.element_id: self._elements.get(t.element_id).order_index
                    for t in candidates
                }
                candidates.sort(key=lambda t: (order_of[t.element_id], t.task_id))
            else:
                candidates.sort(key=lambda t: t.task_id)
                self._rng.shuffle(candidates)

            now = self._clock()
            claimed: list[TaskRecord] = []
            for task in candidates:
                if len(claimed) >= campaign.batch_size:
                    break
                if task.dup_group and task.dup_group in taken_groups:
                    continue
                task.assignee = user
                task.claimed_at = now
                if task.dup_group:
                    taken_groups.add(task.dup_group)
                claimed.append(task)
            return claimed

    def _groups_touched_by(self, user: str, tasks: Iterable[TaskRecord]) -> set[str]:
        """Dup groups where the user already claimed or authored a sibling."""
        tasks = list(tasks)
        authored = {
            a.task_id
            for a in self._store.values(ANNOTATIONS)
            if a.author == user
        }
        return {
            t.dup_group for t in tasks
            if t.dup_group and (t.assignee == user or t.task_id in authored)
        }

    # -- annotation ------------------------------------------------------------

    def submit_annotation(self, task_id: str, user: str,
                          payload: Mapping[str, Any]) -> TaskRecord:
        with self._store.lock:
            task = self._get_task(task_id)
            if task.status is not TaskStatus.PENDING:
                raise IllegalTransition(
                    f"task {task_id} is {task.status.value}; only pending tasks accept "
                    "a first annotation"
                )
            if task.assignee != user:
                raise NotAssignee(f"task {task_id} is not assigned to {user}")
            campaign = self.get_campaign(task.campaign_id)
            element = self._elements.get(task.element_id)
            context = self.element_context_for(campaign, element)
            normalized = validate_payload(campaign.config, context, payload)
            now = self._clock()
            annotation = Annotation(
                annotation_id=new_id("ann"),
                task_id=task_id,
                author=user,
                payload=normalized,
                created_at=now,
            )
            # mutation section: pure assignments only, so a crash anywhere
            # above leaves the task untouched (never a half-state)
            self._store.put(ANNOTATIONS, annotation.annotation_id, annotation)
            task.status = TaskStatus.ANNOTATED
            task.annotated_at = now
            self._log_transition(task, TaskStatus.PENDING, TaskStatus.ANNOTATED, user,
                                 at=now)
            return task

    def revise_annotation(self, task_id: str, user: str,
                          payload: Mapping[str, Any]) -> Annotation:
        with self._store.lock:
            task = self._get_task(task_id)
            if task.status not in (TaskStatus.ANNOTATED, TaskStatus.REJECTED):
                raise IllegalTransition(
                    f"task {task_id} is {task.status.value}; revisions need an "
                    "annotated or rejected task"
                )
            campaign = self.get_campaign(task.campaign_id)
            live = self.live_annotation(task_id)
            is_author = live is not None and live.author == user
            if not is_author and not self._accounts.has_role(
                campaign.project_id, user, Role.MODERATOR
            ):
                raise NotAuthorized(
                    f"{user} is neither the author nor a moderator on this project"
                )
            element = self._elements.get(task.element_id)
            context = self.element_context_for(campaign, element)
            normalized = validate_payload(campaign.config, context, payload)
            now = self._clock()
            revision = Annotation(
                annotation_id=new_id("ann"),
                task_id=task_id,
                author=user,
                payload=normalized,
                created_at=now,
            )
            self._store.put(ANNOTATIONS, revision.annotation_id, revision)
            if live is not None:
                live.superseded_by = revision.annotation_id
            if task.status is TaskStatus.REJECTED:
                task.status = TaskStatus.ANNOTATED
                self._log_transition(task, TaskStatus.REJECTED, TaskStatus.ANNOTATED,
                                     user, at=now)
            return revision

    def skip_task(self, task_id: str, user: str) -> TaskRecord:
        with self._store.lock:
            task = self._get_task(task_id)
            if task.status is not TaskStatus.PENDING:
                raise IllegalTransition(
                    f"task {task_id} is {task.status.value}; only pending tasks skip"
                )
            if task.assignee != user:
                raise NotAssignee(f"task {task_id} is not assigned to {user}")
            now = self._clock()
            task.status = TaskStatus.SKIPPED  # assignee retained for audit
            self._log_transition(task, TaskStatus.PENDING, TaskStatus.SKIPPED, user,
                                 at=now)
            return task

    def moderate(self, task_id: str, moderator: str, decision: str,
                 note: str | None = None) -> TaskRecord:
        if decision not in ("validate", "reject"):
            raise ValidationError(f"unknown moderation decision {decision!r}")
        with self._store.lock:
            task = self._get_task(task_id)
            campaign = self.get_campaign(task.campaign_id)
            self._accounts.require_role(campaign.project_id, moderator, Role.MODERATOR)
            if task.status is not TaskStatus.ANNOTATED:
                raise IllegalTransition(
                    f"task {task_id} is {task.status.value}; moderation needs annotated"
                )
            target = TaskStatus.VALIDATED if decision == "validate" else TaskStatus.REJECTED
            now = self._clock()
            task.status = target
            self._log_transition(task, TaskStatus.ANNOTATED, target, moderator, at=now)
            if decision == "reject" and note:
                self.add_comment(task_id, moderator, note)
            return task

    def release_stale(self, campaign_id: str, ttl: timedelta | int | None = None,
                      now: datetime | None = None) -> int:
        campaign = self.get_campaign(campaign_id)
        if ttl is None:
            ttl = timedelta(seconds=campaign.claim_ttl_seconds)
        elif isinstance(ttl, (int, float)):
            ttl = timedelta(seconds=ttl)
        if ttl <= timedelta(0):
            raise ValidationError("ttl must be positive")
        now = now or self._clock()
        released = 0
        with self._store.lock:
            for task in self._store.values(TASKS):
                if (task.campaign_id == campaign_id
                        and task.status is TaskStatus.PENDING
                        and task.assignee is not None
                        and task.claimed_at is not None
                        and now - task.claimed_at > ttl):
                    task.assignee = None
                    task.claimed_at = None
                    released += 1
        return released

    # -- feedback and comments -----------------------------------------------------

    def set_feedback(self, task_id: str, user: str, feedback: Feedback | str) -> TaskRecord:
        feedback = Feedback(feedback)
        with self._store.lock:
            task = self._get_task(task_id)
            campaign = self.get_campaign(task.campaign_id)
            self._accounts.require_role(campaign.project_id, user, Role.CONTRIBUTOR)
            if feedback is Feedback.UNCERTAIN and task.assignee != user:
                raise PermissionDenied("only the assignee may flag a task uncertain")
            task.feedback = feedback
            return task

    def add_comment(self, task_id: str, user: str, body: str) -> CommentRecord:
        if not body or not body.strip():
            raise EmptyComment("comment body must be non-empty")
        with self._store.lock:
            task = self._get_task(task_id)
            campaign = self.get_campaign(task.campaign_id)
            self._accounts.require_role(campaign.project_id, user, Role.CONTRIBUTOR)
            comment = CommentRecord(
                comment_id=new_id("com"),
                task_id=task_id,
                author=user,
                body=body,
                created_at=self._clock(),
            )
            self._store.put(COMMENTS, comment.comment_id, comment)
            if task.feedback is Feedback.NONE:
                task.feedback = Feedback.COMMENTED
            return comment

    def comments_of(self, task_id: str) -> list[CommentRecord]:
        self._get_task(task_id)
        comments = self._store.find(COMMENTS, lambda c: c.task_id == task_id)
        return sorted(comments, key=lambda c: (c.created_at, c.comment_id))

    # -- queries -----------------------------------------------------------------

    def filter_tasks(self, campaign_id: str,
                     status: TaskStatus | str | None = None,
                     feedback: Feedback | str | None = None,
                     user: str | None = None) -> list[TaskRecord]:
        self.get_campaign(campaign_id)
        status = TaskStatus(status) if status is not None else None
        feedback = Feedback(feedback) if feedback is not None else None
        tasks = self._store.find(TASKS, lambda t: t.campaign_id == campaign_id)
        out = [
            t for t in tasks
            if (status is None or t.status is status)
            and (feedback is None or t.feedback is feedback)
            and (user is None or t.assignee == user)
        ]
        return sorted(out, key=lambda t: t.task_id)

    def get_task(self, task_id: str) -> TaskRecord:
        return self._get_task(task_id)

    def _get_task(self, task_id: str) -> TaskRecord:
        task = self._store.get(TASKS, task_id)
        if task is None:
            raise UnknownTask(task_id)
        return task

    def annotations_of(self, task_id: str) -> list[Annotation]:
        annotations = self._store.find(ANNOTATIONS, lambda a: a.task_id == task_id)
        return sorted(annotations, key=lambda a: (a.created_at, a.annotation_id))

    def live_annotation(self, task_id: str) -> Annotation | None:
        live = [a for a in self.annotations_of(task_id) if a.superseded_by is None]
        return live[-1] if live else None

    def events_of(self, task_id: str | None = None) -> list[TransitionEvent]:
        events = self._store.values(EVENTS)
        if task_id is not None:
            events = [e for e in events if e.task_id == task_id]
        return sorted(events, key=lambda e: (e.at, e.event_id))

    def _log_transition(self, task: TaskRecord, from_status: TaskStatus,
                        to_status: TaskStatus, actor: str | None,
                        at: datetime | None = None) -> None:
        event = TransitionEvent(
            event_id=new_id("evt"),
            task_id=task.task_id,
            from_status=from_status,
            to_status=to_status,
            actor=actor,
            at=at if at is not None else self._clock(),
        )
        self._store.put(EVENTS, event.event_id, event)
