"""HTTP API binding every module, paths under /api/v1.

Handlers are synchronous and thin: parse the body, resolve the session,
delegate to the domain services, serialize.  Domain errors map to HTTP
statuses through one table (ERROR_STATUS); role checks stay in the
domain layer.
"""

from __future__ import annotations

import logging
from typing import Any

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import errors as err
from ..accounts import Role, Visibility
from ..core import Platform
from ..elements import ElementRecord
from ..iiif import FULL, context_crop, element_crop_url, image_url
from ..modes import ModeKind, config_to_dict
from ..stats import DEFAULT_TIME_CAP
from ..tasks import Campaign, TaskRecord
from .auth import SessionManager, hash_password, verify_password
from .config import ServiceConfig
from .jobs import ArtifactStore, JobKind, JobRunner
from .notify import MemorySink, Notification, NotificationSink

logger = logging.getLogger("scriptorium.http")

SESSION_COOKIE = "scriptorium_session"

ERROR_STATUS: dict[type, int] = {
    err.PermissionDenied: 403,
    err.NotAssignee: 403,
    err.NotAuthorized: 403,
    err.UnknownUser: 404,
    err.UnknownProject: 404,
    err.UnknownElement: 404,
    err.UnknownCampaign: 404,
    err.UnknownTask: 404,
    err.UnknownJob: 404,
    err.InvalidToken: 404,
    err.IllegalTransition: 409,
    err.CampaignClosed: 409,
    err.ValidationError: 422,
    err.ConfigError: 422,
    err.PayloadError: 422,
    err.GeometryError: 422,
    err.CycleError: 422,
    err.UnknownParent: 422,
    err.UnknownMember: 422,
    err.EmptyComment: 422,
    err.RegionError: 422,
    err.ManifestError: 422,
    err.LengthMismatch: 422,
    err.StorageUnavailable: 503,
}


# -- request bodies -------------------------------------------------------------

class RegisterBody(BaseModel):
    email: str
    display_name: str = ""
    password: str = Field(min_length=1)


class LoginBody(BaseModel):
    email: str
    password: str


class ProjectBody(BaseModel):
    name: str
    visibility: str = "private"
    description: str = ""


class MemberRoleBody(BaseModel):
    role: str


class CampaignBody(BaseModel):
    name: str
    mode: str
    config: dict[str, Any]
    guide: str = ""
    batch_size: int = 1
    duplication_factor: int = 1
    duplication_fraction: float = 0.0
    claim_ttl_seconds: int | None = None
    context_margin: float | None = None


class CampaignPatchBody(BaseModel):
    state: str | None = None
    guide: str | None = None
    batch_size: int | None = None


class CreateTasksBody(BaseModel):
    element_ids: list[str]
    prefills: dict[str, dict[str, Any]] | None = None


class PublishBody(BaseModel):
    task_ids: list[str] | None = None


class ClaimBody(BaseModel):
    strategy: str = "sequential"


class AnnotationBody(BaseModel):
    payload: dict[str, Any]


class ModerateBody(BaseModel):
    decision: str
    note: str | None = None


class CommentBody(BaseModel):
    body: str


class FeedbackBody(BaseModel):
    feedback: str


class ManifestBody(BaseModel):
    manifest: dict[str, Any] | None = None
    url: str | None = None
    page_type: str = "page"


class ExportBody(BaseModel):
    format: str = "csv"
    statuses: list[str] | None = None
    include_superseded: bool = False


# -- app factory -------------------------------------------------------------------


def create_app(
    platform: Platform | None = None,
    config: ServiceConfig | None = None,
    sink: NotificationSink | None = None,
) -> FastAPI:
    platform = platform or Platform()
    config = config or ServiceConfig()
    sink = sink or MemorySink()
    sessions = SessionManager(platform.store, config.session_secret,
                              config.session_ttl_seconds, clock=platform.clock)
    artifacts = ArtifactStore(platform, config.artifact_dir)
    runner = JobRunner(platform, artifacts, inline=config.inline_jobs)

    app = FastAPI(title="scriptorium", version="0.1.0")
    app.state.platform = platform
    app.state.config = config
    app.state.sessions = sessions
    app.state.jobs = runner
    app.state.artifacts = artifacts
    app.state.sink = sink

    accounts = platform.accounts
    elements = platform.elements
    tasks = platform.tasks

    @app.exception_handler(err.ScriptoriumError)
    def domain_error_handler(request: Request, exc: err.ScriptoriumError):
        status = ERROR_STATUS.get(type(exc), 500)
        body: dict[str, Any] = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, err.PayloadError):
            body["violations"] = exc.violations
        headers = {"Retry-After": "5"} if status == 503 else None
        return JSONResponse(status_code=status, content=body, headers=headers)

    def bearer_token(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            return header[7:].strip()
        return request.cookies.get(SESSION_COOKIE)

    # 401 is not a domain error; raise through FastAPI's normal response path
    class _Unauthenticated(Exception):
        pass

    @app.exception_handler(_Unauthenticated)
    def unauthenticated_handler(request: Request, exc: _Unauthenticated):
        return JSONResponse(status_code=401,
                            content={"error": "Unauthenticated",
                                     "detail": "a valid session is required"})

    def require_user(request: Request) -> str:
        user_id = sessions.resolve(bearer_token(request))
        if user_id is None:
            raise _Unauthenticated()
        return user_id

    def member_project(user: str, project_id: str) -> None:
        accounts.get_project(project_id)
        accounts.require_role(project_id, user, Role.CONTRIBUTOR)

    def paginate(items: list, cursor: str | None, limit: int, key) -> dict[str, Any]:
        items = sorted(items, key=key)
        if cursor:
            items = [it for it in items if key(it) > cursor]
        page = items[:limit]
        next_cursor = key(page[-1]) if len(items) > limit else None
        return {"items": page, "next_cursor": next_cursor}

    # -- health ------------------------------------------------------------------

    @app.get("/api/v1/healthz")
    def healthz():
        return {"status": "ok"}

    # -- auth --------------------------------------------------------------------

    @app.post("/api/v1/auth/register", status_code=201)
    def register(body: RegisterBody):
        # bootstrap: the very first account becomes staff
        first = not platform.store.values("users")
        user = accounts.register_user(
            body.email, body.display_name, hash_password(body.password),
            is_staff=first,
        )
        return user.public_dict()

    @app.post("/api/v1/auth/login")
    def login(body: LoginBody, response: Response):
        user = accounts.find_user_by_email(body.email)
        if user is None or not verify_password(body.password, user.credential_hash):
            raise _Unauthenticated()
        token = sessions.create(user.user_id)
        response.set_cookie(SESSION_COOKIE, token, httponly=True,
                            max_age=config.session_ttl_seconds, samesite="lax")
        return {"token": token, "user": user.public_dict()}

    @app.post("/api/v1/auth/logout")
    def logout(request: Request, response: Response):
        sessions.revoke(bearer_token(request))
        response.delete_cookie(SESSION_COOKIE)
        return {"status": "logged_out"}

    @app.get("/api/v1/auth/me")
    def me(user: str = Depends(require_user)):
        return accounts.get_user(user).public_dict()

    # -- projects -------------------------------------------------------------------

    @app.get("/api/v1/projects")
    def list_projects(user: str = Depends(require_user),
                      cursor: str | None = None,
                      limit: int = Query(default=0, ge=0)):
        visible = accounts.projects_visible_to(user)
        page = paginate(visible, cursor, limit or config.page_size,
                        key=lambda p: p.project_id)
        return {
            "items": [dict(p.to_dict(), role=_role_value(accounts.role_of(p.project_id, user)))
                      for p in page["items"]],
            "next_cursor": page["next_cursor"],
        }

    @app.post("/api/v1/projects", status_code=201)
    def create_project(body: ProjectBody, user: str = Depends(require_user)):
        project = accounts.create_project(user, body.name,
                                          Visibility(body.visibility),
                                          body.description)
        return project.to_dict()

    @app.get("/api/v1/projects/{project_id}")
    def get_project(project_id: str, user: str = Depends(require_user)):
        project = accounts.get_project(project_id)
        role = accounts.role_of(project_id, user)
        if role is None and project.visibility is not Visibility.PUBLIC:
            raise err.PermissionDenied("membership required on a private project")
        return dict(project.to_dict(), role=_role_value(role))

    @app.get("/api/v1/projects/{project_id}/members")
    def list_members(project_id: str, user: str = Depends(require_user)):
        member_project(user, project_id)
        out = []
        for membership in accounts.members_of(project_id):
            account = accounts.get_user(membership.user_id)
            out.append(dict(membership.to_dict(),
                            display_name=account.display_name))
        return {"items": out}

    @app.put("/api/v1/projects/{project_id}/members/{target_id}")
    def set_member_role(project_id: str, target_id: str, body: MemberRoleBody,
                        user: str = Depends(require_user)):
        membership = accounts.set_member_role(user, project_id, target_id,
                                              Role(body.role))
        return membership.to_dict()

    @app.post("/api/v1/projects/{project_id}/invitation", status_code=201)
    def rotate_invitation(project_id: str, user: str = Depends(require_user)):
        link = accounts.rotate_invitation(user, project_id)
        sink.send(Notification(
            kind="invitation_rotated", recipient=None,
            subject=f"Invitation link rotated for {project_id}",
            body="Previous links are no longer valid.",
        ))
        return link.to_dict()

    @app.post("/api/v1/invitations/{token}/join")
    def join_invitation(token: str, user: str = Depends(require_user)):
        membership = accounts.join_via_invitation(token, user)
        return membership.to_dict()

    @app.post("/api/v1/projects/{project_id}/join")
    def join_public(project_id: str, user: str = Depends(require_user)):
        membership = accounts.join_public_project(project_id, user)
        return membership.to_dict()

    # -- elements ----------------------------------------------------------------------

    @app.post("/api/v1/projects/{project_id}/elements:import", status_code=201)
    async def import_elements(project_id: str, request: Request):
        user = require_user(request)
        accounts.require_role(project_id, user, Role.MANAGER)
        text = (await request.body()).decode("utf-8")
        created = elements.import_jsonl(project_id, text)
        return {"created": len(created),
                "element_ids": [e.element_id for e in created]}

    @app.get("/api/v1/projects/{project_id}/elements")
    def list_elements(project_id: str,
                      user: str = Depends(require_user),
                      type: str | None = None,
                      cursor: str | None = None,
                      limit: int = Query(default=0, ge=0)):
        member_project(user, project_id)
        found = elements.by_project(project_id, element_type=type)
        page = paginate(found, cursor, limit or config.page_size,
                        key=lambda e: e.element_id)
        return {"items": [e.to_dict() for e in page["items"]],
                "next_cursor": page["next_cursor"]}

    @app.get("/api/v1/elements/{element_id}")
    def get_element(element_id: str, user: str = Depends(require_user)):
        element = elements.get(element_id)
        member_project(user, element.project_id)
        return _element_payload(element)

    @app.get("/api/v1/elements/{element_id}/children")
    def element_children(element_id: str, user: str = Depends(require_user),
                         type: str | None = None):
        element = elements.get(element_id)
        member_project(user, element.project_id)
        return {"items": [_element_payload(c)
                          for c in elements.children_of(element_id, type)]}

    @app.post("/api/v1/projects/{project_id}/manifests", status_code=202)
    def ingest_manifest_route(project_id: str, body: ManifestBody,
                              user: str = Depends(require_user)):
        accounts.get_project(project_id)
        accounts.require_role(project_id, user, Role.MANAGER)
        if body.manifest is None and not body.url:
            raise err.ValidationError("provide a manifest document or a url")
        payload: dict[str, Any] = {"page_type": body.page_type}
        if body.manifest is not None:
            payload["manifest"] = body.manifest
        else:
            payload["url"] = body.url
        job = runner.enqueue(JobKind.INGEST_MANIFEST, payload, project_id)
        return job.to_dict()

    # -- campaigns -------------------------------------------------------------------

    @app.post("/api/v1/projects/{project_id}/campaigns", status_code=201)
    def create_campaign(project_id: str, body: CampaignBody,
                        user: str = Depends(require_user)):
        campaign = tasks.create_campaign(
            user, project_id, body.name, ModeKind(body.mode), body.config,
            guide=body.guide, batch_size=body.batch_size,
            duplication_factor=body.duplication_factor,
            duplication_fraction=body.duplication_fraction,
            claim_ttl_seconds=body.claim_ttl_seconds or config.default_claim_ttl_seconds,
            context_margin=(body.context_margin
                            if body.context_margin is not None
                            else config.default_context_margin),
        )
        return campaign.to_dict()

    @app.get("/api/v1/projects/{project_id}/campaigns")
    def list_campaigns(project_id: str, user: str = Depends(require_user)):
        member_project(user, project_id)
        return {"items": [c.to_dict() for c in tasks.campaigns_of(project_id)]}

    @app.get("/api/v1/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str, user: str = Depends(require_user)):
        campaign = tasks.get_campaign(campaign_id)
        member_project(user, campaign.project_id)
        return campaign.to_dict()

    @app.patch("/api/v1/campaigns/{campaign_id}")
    def patch_campaign(campaign_id: str, body: CampaignPatchBody,
                       user: str = Depends(require_user)):
        campaign = tasks.update_campaign(user, campaign_id, state=body.state,
                                         guide=body.guide, batch_size=body.batch_size)
        return campaign.to_dict()

    @app.get("/api/v1/campaigns/{campaign_id}/progress")
    def campaign_progress(campaign_id: str, user: str = Depends(require_user)):
        campaign = tasks.get_campaign(campaign_id)
        member_project(user, campaign.project_id)
        report = platform.stats.progress(campaign_id)
        median = platform.stats.median_annotation_time(campaign_id, DEFAULT_TIME_CAP)
        out = report.to_dict()
        out["median_annotation_seconds"] = (
            median.total_seconds() if median is not None else None
        )
        return out

    @app.get("/api/v1/campaigns/{campaign_id}/agreement")
    def campaign_agreement(campaign_id: str, user: str = Depends(require_user)):
        campaign = tasks.get_campaign(campaign_id)
        accounts.require_role(campaign.project_id, user, Role.MODERATOR)
        return platform.stats.pairwise_agreement(campaign_id).to_dict()

    # -- tasks --------------------------------------------------------------------------

    @app.post("/api/v1/campaigns/{campaign_id}/tasks", status_code=201)
    def create_tasks_route(campaign_id: str, body: CreateTasksBody,
                           user: str = Depends(require_user)):
        campaign = tasks.get_campaign(campaign_id)
        accounts.require_role(campaign.project_id, user, Role.MANAGER)
        created = tasks.create_tasks(campaign_id, body.element_ids, body.prefills)
        return {"created": len(created),
                "tasks": [t.to_dict() for t in created]}

    @app.post("/api/v1/campaigns/{campaign_id}/tasks:publish")
    def publish_tasks_route(campaign_id: str, body: PublishBody,
                            user: str = Depends(require_user)):
        task_ids = body.task_ids
        if task_ids is None:
            task_ids = [t.task_id for t in tasks.filter_tasks(campaign_id, status="draft")]
        count = tasks.publish_tasks(user, campaign_id, task_ids)
        return {"published": count}

    @app.post("/api/v1/campaigns/{campaign_id}/claim")
    def claim(campaign_id: str, body: ClaimBody,
              user: str = Depends(require_user)):
        claimed = tasks.claim_batch(campaign_id, user, body.strategy)
        return {"tasks": [t.to_dict() for t in claimed]}

    @app.get("/api/v1/campaigns/{campaign_id}/tasks")
    def list_tasks(campaign_id: str,
                   user: str = Depends(require_user),
                   status: str | None = None,
                   feedback: str | None = None,
                   assignee: str | None = Query(default=None, alias="user"),
                   cursor: str | None = None,
                   limit: int = Query(default=0, ge=0)):
        campaign = tasks.get_campaign(campaign_id)
        member_project(user, campaign.project_id)
        found = tasks.filter_tasks(campaign_id, status=status,
                                   feedback=feedback, user=assignee)
        page = paginate(found, cursor, limit or config.page_size,
                        key=lambda t: t.task_id)
        return {"items": [t.to_dict() for t in page["items"]],
                "next_cursor": page["next_cursor"]}

    @app.get("/api/v1/tasks/{task_id}")
    def get_task(task_id: str, user: str = Depends(require_user)):
        task = tasks.get_task(task_id)
        campaign = tasks.get_campaign(task.campaign_id)
        member_project(user, campaign.project_id)
        return _task_detail(platform, campaign, task)

    @app.post("/api/v1/tasks/{task_id}/annotation")
    def submit_annotation(task_id: str, body: AnnotationBody,
                          user: str = Depends(require_user)):
        task = tasks.submit_annotation(task_id, user, body.payload)
        return task.to_dict()

    @app.post("/api/v1/tasks/{task_id}/revision")
    def revise_annotation(task_id: str, body: AnnotationBody,
                          user: str = Depends(require_user)):
        revision = tasks.revise_annotation(task_id, user, body.payload)
        return revision.to_dict()

    @app.post("/api/v1/tasks/{task_id}/skip")
    def skip_task(task_id: str, user: str = Depends(require_user)):
        return tasks.skip_task(task_id, user).to_dict()

    @app.post("/api/v1/tasks/{task_id}/moderate")
    def moderate(task_id: str, body: ModerateBody,
                 user: str = Depends(require_user)):
        task = tasks.moderate(task_id, user, body.decision, body.note)
        if body.decision == "reject" and task.assignee:
            sink.send(Notification(
                kind="task_rejected", recipient=task.assignee,
                subject=f"Task {task_id} was rejected",
                body=body.note or "",
            ))
        return task.to_dict()

    @app.post("/api/v1/tasks/{task_id}/comments", status_code=201)
    def add_comment(task_id: str, body: CommentBody,
                    user: str = Depends(require_user)):
        return tasks.add_comment(task_id, user, body.body).to_dict()

    @app.get("/api/v1/tasks/{task_id}/comments")
    def list_comments(task_id: str, user: str = Depends(require_user)):
        task = tasks.get_task(task_id)
        campaign = tasks.get_campaign(task.campaign_id)
        member_project(user, campaign.project_id)
        return {"items": [c.to_dict() for c in tasks.comments_of(task_id)]}

    @app.post("/api/v1/tasks/{task_id}/feedback")
    def set_feedback(task_id: str, body: FeedbackBody,
                     user: str = Depends(require_user)):
        return tasks.set_feedback(task_id, user, body.feedback).to_dict()

    # -- export & jobs --------------------------------------------------------------------

    @app.post("/api/v1/campaigns/{campaign_id}/export", status_code=202)
    def export_campaign(campaign_id: str, body: ExportBody,
                        user: str = Depends(require_user)):
        campaign = tasks.get_campaign(campaign_id)
        accounts.require_role(campaign.project_id, user, Role.MANAGER)
        if body.format not in ("csv", "json"):
            raise err.ValidationError(f"unknown export format {body.format!r}")
        payload: dict[str, Any] = {"campaign_id": campaign_id, "format": body.format,
                                   "include_superseded": body.include_superseded}
        if body.statuses is not None:
            payload["statuses"] = body.statuses
        job = runner.enqueue(JobKind.EXPORT, payload, campaign.project_id)
        return job.to_dict()

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str, user: str = Depends(require_user)):
        job = runner.get_job(job_id)
        accounts.require_role(job.project_id, user, Role.MANAGER)
        return job.to_dict()

    @app.get("/api/v1/jobs/{job_id}/download")
    def download_job(job_id: str, user: str = Depends(require_user)):
        job = runner.get_job(job_id)
        accounts.require_role(job.project_id, user, Role.MANAGER)
        if job.result_ref is None:
            raise err.UnknownJob(f"job {job_id} has no downloadable result")
        artifact = app.state.artifacts.get(job.result_ref)
        return Response(
            content=artifact.data,
            media_type=artifact.content_type,
            headers={"Content-Disposition":
                     f'attachment; filename="{artifact.filename}"'},
        )

    return app


def _role_value(role: Role | None) -> str | None:
    return role.value if role else None


def _element_payload(element: ElementRecord) -> dict[str, Any]:
    out = element.to_dict()
    out["image_url"] = element_crop_url(element)
    out["full_image_url"] = image_url(element.image, FULL)
    return out


def _task_detail(platform: Platform, campaign: Campaign, task: TaskRecord) -> dict[str, Any]:
    """Everything a workbench needs to render one task."""
    element = platform.elements.get(task.element_id)
    region = context_crop(element, campaign.context_margin)
    children = platform.elements.children_of(element.element_id)
    reference_text = None
    if campaign.mode is ModeKind.ENTITIES:
        reference_text = platform.tasks.reference_text_for(
            campaign.project_id, element.element_id)
    live = platform.tasks.live_annotation(task.task_id)
    return {
        "task": task.to_dict(),
        "element": _element_payload(element),
        "campaign": {
            "campaign_id": campaign.campaign_id,
            "name": campaign.name,
            "mode": campaign.mode.value,
            "config": config_to_dict(campaign.config),
            "guide": campaign.guide,
            "context_margin": campaign.context_margin,
        },
        "context_image_url": image_url(element.image, region),
        "context_region": {"x": region.x, "y": region.y, "w": region.w, "h": region.h},
        "children": [_element_payload(c) for c in children],
        "reference_text": reference_text,
        "prefill": task.prefill,
        "live_annotation": live.to_dict() if live else None,
        "comments": [c.to_dict() for c in platform.tasks.comments_of(task.task_id)],
    }
