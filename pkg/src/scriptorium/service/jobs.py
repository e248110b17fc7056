"""Background jobs: manifest ingestion, export generation, stale release.

Jobs live in the same store as domain data.  A single worker consumes
the queue; terminal job states are immutable, so replaying the queue
after a restart runs each job exactly once.  Jobs found in state
``running`` at startup are crash leftovers and are re-queued.
"""

from __future__ import annotations

import base64
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any

from ..core import Platform
from ..errors import ScriptoriumError, UnknownJob, ValidationError
from ..ids import new_id
from ..store import isoformat_utc, parse_utc, utcnow
from ..tasks import CampaignState

logger = logging.getLogger("scriptorium.jobs")

JOBS = "jobs"
ARTIFACTS = "artifacts"


class JobKind(str, Enum):
    INGEST_MANIFEST = "ingest_manifest"
    EXPORT = "export"
    RELEASE_STALE = "release_stale"


class JobState(str, Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass
class JobRecord:
    job_id: str
    kind: JobKind
    state: JobState
    payload: dict[str, Any]
    project_id: str
    result_ref: str | None = None
    result: dict[str, Any] | None = None
    error: str | None = None
    created_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict[str, Any]:
        return {
            "job_id": self.job_id,
            "kind": self.kind.value,
            "state": self.state.value,
            "payload": self.payload,
            "project_id": self.project_id,
            "result_ref": self.result_ref,
            "result": self.result,
            "error": self.error,
            "created_at": isoformat_utc(self.created_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "JobRecord":
        return cls(
            job_id=row["job_id"],
            kind=JobKind(row["kind"]),
            state=JobState(row["state"]),
            payload=row.get("payload", {}),
            project_id=row["project_id"],
            result_ref=row.get("result_ref"),
            result=row.get("result"),
            error=row.get("error"),
            created_at=parse_utc(row["created_at"]),
        )


@dataclass
class Artifact:
    ref: str
    content_type: str
    filename: str
    data_b64: str

    @property
    def data(self) -> bytes:
        return base64.b64decode(self.data_b64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ref": self.ref,
            "content_type": self.content_type,
            "filename": self.filename,
            "data_b64": self.data_b64,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "Artifact":
        return cls(
            ref=row["ref"],
            content_type=row["content_type"],
            filename=row["filename"],
            data_b64=row["data_b64"],
        )


class ArtifactStore:
    """Export payload storage: store-backed, optionally mirrored to disk."""

    def __init__(self, platform: Platform, directory: str | None = None):
        self._store = platform.store
        self._dir = Path(directory) if directory else None
        if self._dir:
            self._dir.mkdir(parents=True, exist_ok=True)
        platform.register_collection(ARTIFACTS, Artifact, "ref")

    def put(self, data: bytes, content_type: str, filename: str) -> str:
        ref = new_id("art")
        artifact = Artifact(
            ref=ref,
            content_type=content_type,
            filename=filename,
            data_b64=base64.b64encode(data).decode("ascii"),
        )
        self._store.put(ARTIFACTS, ref, artifact)
        if self._dir:
            (self._dir / filename).write_bytes(data)
        return ref

    def get(self, ref: str) -> Artifact:
        artifact = self._store.get(ARTIFACTS, ref)
        if artifact is None:
            raise UnknownJob(f"artifact {ref} not found")
        return artifact


class JobRunner:
    def __init__(self, platform: Platform, artifacts: ArtifactStore,
                 inline: bool = False, poll_seconds: float = 0.2):
        self._platform = platform
        self._store = platform.store
        self._artifacts = artifacts
        self._inline = inline
        self._poll = poll_seconds
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        platform.register_collection(JOBS, JobRecord, "job_id")
        self.requeue_crashed()

    # -- queue management -------------------------------------------------------

    def enqueue(self, kind: JobKind | str, payload: dict[str, Any],
                project_id: str) -> JobRecord:
        job = JobRecord(
            job_id=new_id("job"),
            kind=JobKind(kind),
            state=JobState.QUEUED,
            payload=payload,
            project_id=project_id,
        )
        self._store.put(JOBS, job.job_id, job)
        if self._inline:
            self.run_pending()
        return self._get(job.job_id)

    def get_job(self, job_id: str) -> JobRecord:
        return self._get(job_id)

    def _get(self, job_id: str) -> JobRecord:
        job = self._store.get(JOBS, job_id)
        if job is None:
            raise UnknownJob(job_id)
        return job

    def requeue_crashed(self) -> int:
        """Jobs stuck in running state from a previous process go back to queued."""
        count = 0
        with self._store.lock:
            for job in self._store.values(JOBS):
                if job.state is JobState.RUNNING:
                    job.state = JobState.QUEUED
                    count += 1
        return count

    def run_pending(self) -> int:
        """Process every queued job; returns how many ran."""
        ran = 0
        while True:
            job = self._claim_next()
            if job is None:
                return ran
            self._execute(job)
            ran += 1

    def _claim_next(self) -> JobRecord | None:
        with self._store.lock:
            queued = sorted(
                (j for j in self._store.values(JOBS) if j.state is JobState.QUEUED),
                key=lambda j: (j.created_at, j.job_id),
            )
            if not queued:
                return None
            job = queued[0]
            job.state = JobState.RUNNING
            return job

    def _execute(self, job: JobRecord) -> None:
        try:
            result = _HANDLERS[job.kind](self, job)
            with self._store.lock:
                job.result = result
                job.result_ref = result.get("result_ref")
                job.state = JobState.DONE
        except ScriptoriumError as exc:
            with self._store.lock:
                job.error = str(exc)
                job.state = JobState.FAILED
        except Exception:
            logger.exception("job %s crashed", job.job_id)
            with self._store.lock:
                job.error = "internal error"
                job.state = JobState.FAILED

    # -- worker loop -------------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="scriptorium-jobs")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def _loop(self) -> None:
        while not self._stop.is_set():
            if self.run_pending() == 0:
                self._stop.wait(self._poll)

    def sweep_stale_claims(self) -> int:
        """Enqueue a release job per open campaign; returns jobs queued."""
        queued = 0
        for campaign in self._platform.store.values("campaigns"):
            if campaign.state is CampaignState.OPEN:
                self.enqueue(JobKind.RELEASE_STALE,
                             {"campaign_id": campaign.campaign_id},
                             campaign.project_id)
                queued += 1
        return queued


# -- job handlers ----------------------------------------------------------------

def _run_ingest(runner: JobRunner, job: JobRecord) -> dict[str, Any]:
    from ..iiif import fetch_manifest, ingest_manifest

    payload = job.payload
    document = payload.get("manifest")
    if document is None:
        document = fetch_manifest(payload["url"])
    created = ingest_manifest(
        runner._platform.elements,
        document,
        project_id=job.project_id,
        page_type=payload.get("page_type", "page"),
    )
    return {"elements_created": len(created),
            "element_ids": [e.element_id for e in created]}


def _run_export(runner: JobRunner, job: JobRecord) -> dict[str, Any]:
    payload = job.payload
    campaign_id = payload["campaign_id"]
    fmt = payload.get("format", "csv")
    exports = runner._platform.exports
    if fmt == "csv":
        data = exports.export_csv(
            campaign_id,
            statuses=payload.get("statuses"),
            include_superseded=bool(payload.get("include_superseded", False)),
        )
        content_type, suffix = "text/csv; charset=utf-8", "csv"
    elif fmt == "json":
        data = exports.export_json_bytes(campaign_id)
        content_type, suffix = "application/json", "json"
    else:
        raise ValidationError(f"unknown export format {fmt!r}")
    ref = runner._artifacts.put(data, content_type, f"{campaign_id}.{suffix}")
    return {"result_ref": ref, "bytes": len(data), "format": fmt}


def _run_release(runner: JobRunner, job: JobRecord) -> dict[str, Any]:
    campaign_id = job.payload["campaign_id"]
    ttl = job.payload.get("ttl_seconds")
    released = runner._platform.tasks.release_stale(campaign_id, ttl)
    return {"released": released}


_HANDLERS = {
    JobKind.INGEST_MANIFEST: _run_ingest,
    JobKind.EXPORT: _run_export,
    JobKind.RELEASE_STALE: _run_release,
}
