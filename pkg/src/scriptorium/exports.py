"""Flatten campaign annotations into CSV and structured JSON.

CSV follows RFC 4180 (UTF-8, LF line endings, no BOM, minimal quoting
with doubled quotes).  Classification, transcription, and key-value
campaigns export one row per annotation; structure, entities, and
grouping export one row per zone/span/group-member.  JSON exports use
the canonical payload encodings and include superseded annotations with
their supersession links.

Both formats are built from a store snapshot, so concurrent annotation
traffic cannot tear an export.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Iterable, Iterator

from .elements import ELEMENTS, ElementRecord
from .errors import UnknownCampaign
from .iiif import element_crop_url
from .modes import KeyValueConfig, ModeKind, config_to_dict
from .stats import _live_annotation  # shared snapshot helper
from .store import Store, isoformat_utc
from .tasks import (
    ANNOTATIONS,
    TASKS,
    Annotation,
    Campaign,
    TaskRecord,
    TaskStatus,
    find_reference_text,
)

BASE_COLUMNS = ["task_id", "element_id", "element_name", "image_url",
                "status", "author", "created_at"]

DEFAULT_EXPORT_STATUSES = frozenset({TaskStatus.ANNOTATED, TaskStatus.VALIDATED})


@dataclass
class ExportTable:
    header: list[str]
    rows: Iterable[list[str]]


class ExportService:
    def __init__(self, store: Store):
        self._store = store

    def table(self, campaign_id: str,
              statuses: Iterable[TaskStatus | str] | None = None,
              include_superseded: bool = False) -> ExportTable:
        snap = self._store.snapshot()
        campaign = _campaign(snap, campaign_id)
        wanted = frozenset(TaskStatus(s) for s in statuses) if statuses \
            else DEFAULT_EXPORT_STATUSES
        header = BASE_COLUMNS + _mode_columns(campaign)
        rows = _iter_rows(snap, campaign, wanted, include_superseded)
        return ExportTable(header=header, rows=rows)

    def stream_csv(self, campaign_id: str,
                   statuses: Iterable[TaskStatus | str] | None = None,
                   include_superseded: bool = False) -> Iterator[bytes]:
        table = self.table(campaign_id, statuses, include_superseded)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(table.header)
        yield buffer.getvalue().encode("utf-8")
        for row in table.rows:
            buffer.seek(0)
            buffer.truncate(0)
            writer.writerow(row)
            yield buffer.getvalue().encode("utf-8")

    def export_csv(self, campaign_id: str,
                   statuses: Iterable[TaskStatus | str] | None = None,
                   include_superseded: bool = False) -> bytes:
        return b"".join(self.stream_csv(campaign_id, statuses, include_superseded))

    def export_json(self, campaign_id: str) -> dict[str, Any]:
        snap = self._store.snapshot()
        campaign = _campaign(snap, campaign_id)
        tasks = _campaign_tasks(snap, campaign)
        entries = []
        for task, element in tasks:
            annotations = sorted(
                (a for a in snap.values(ANNOTATIONS) if a.task_id == task.task_id),
                key=lambda a: (a.created_at, a.annotation_id),
            )
            entries.append({
                "task": task.to_dict(),
                "element": element.to_dict(),
                "status": task.status.value,
                "annotations": [a.to_dict() for a in annotations],
            })
        return {
            "campaign": {
                "id": campaign.campaign_id,
                "name": campaign.name,
                "mode": campaign.mode.value,
                "config": config_to_dict(campaign.config),
            },
            "tasks": entries,
        }

    def export_json_bytes(self, campaign_id: str) -> bytes:
        document = self.export_json(campaign_id)
        return json.dumps(document, sort_keys=True, ensure_ascii=False,
                          separators=(",", ":")).encode("utf-8")


def _campaign(snap: Store, campaign_id: str) -> Campaign:
    campaign = snap.get("campaigns", campaign_id)
    if campaign is None:
        raise UnknownCampaign(campaign_id)
    return campaign


def _campaign_tasks(snap: Store, campaign: Campaign) -> list[tuple[TaskRecord, ElementRecord]]:
    pairs = []
    for task in snap.values(TASKS):
        if task.campaign_id != campaign.campaign_id:
            continue
        element = snap.get(ELEMENTS, task.element_id)
        if element is not None:
            pairs.append((task, element))
    pairs.sort(key=lambda te: (te[1].order_index, te[0].task_id))
    return pairs


def _mode_columns(campaign: Campaign) -> list[str]:
    mode = campaign.mode
    if mode is ModeKind.CLASSIFICATION:
        return ["class"]
    if mode is ModeKind.TRANSCRIPTION:
        return ["text"]
    if mode is ModeKind.KEY_VALUE:
        assert isinstance(campaign.config, KeyValueConfig)
        # field ids may collide with the fixed leading columns ("status" is
        # a popular form field); header names must stay unique
        taken = set(BASE_COLUMNS)
        return [f.field_id if f.field_id not in taken else f"field_{f.field_id}"
                for f in campaign.config.fields]
    if mode is ModeKind.ENTITIES:
        return ["offset", "length", "type", "surface_text"]
    if mode is ModeKind.STRUCTURE:
        return ["zone_type", "polygon"]
    if mode is ModeKind.GROUPING:
        return ["group_index", "member_element_id"]
    raise UnknownCampaign(f"unsupported mode {mode}")


def _iter_rows(snap: Store, campaign: Campaign, wanted: frozenset[TaskStatus],
               include_superseded: bool) -> Iterator[list[str]]:
    for task, element in _campaign_tasks(snap, campaign):
        if task.status not in wanted:
            continue
        annotations: list[Annotation] = []
        if include_superseded:
            annotations = sorted(
                (a for a in snap.values(ANNOTATIONS) if a.task_id == task.task_id),
                key=lambda a: (a.created_at, a.annotation_id),
            )
        else:
            live = _live_annotation(snap, task.task_id)
            if live is not None:
                annotations = [live]
        for annotation in annotations:
            base = [
                task.task_id,
                element.element_id,
                element.name,
                element_crop_url(element),
                task.status.value,
                annotation.author,
                isoformat_utc(annotation.created_at),
            ]
            for suffix in _payload_cells(snap, campaign, element, annotation.payload):
                yield base + suffix


def _payload_cells(snap: Store, campaign: Campaign, element: ElementRecord,
                   payload: dict[str, Any]) -> Iterator[list[str]]:
    mode = campaign.mode
    if mode is ModeKind.CLASSIFICATION:
        yield [payload.get("class_id", "")]
    elif mode is ModeKind.TRANSCRIPTION:
        texts = [entry.get("text", "") for entry in payload.get("texts", [])]
        yield ["\n".join(texts)]
    elif mode is ModeKind.KEY_VALUE:
        assert isinstance(campaign.config, KeyValueConfig)
        values = payload.get("values", {})
        yield [values.get(f.field_id, "") for f in campaign.config.fields]
    elif mode is ModeKind.ENTITIES:
        text = find_reference_text(snap, campaign.project_id, element.element_id) or ""
        for span in payload.get("spans", []):
            offset, length = span.get("offset", 0), span.get("length", 0)
            yield [str(offset), str(length), span.get("type_id", ""),
                   text[offset:offset + length]]
    elif mode is ModeKind.STRUCTURE:
        for zone in payload.get("zones", []):
            yield [zone.get("type_id", ""), encode_polygon(zone.get("polygon", []))]
    elif mode is ModeKind.GROUPING:
        for group in payload.get("groups", []):
            for member in group.get("member_element_ids", []):
                yield [str(group.get("group_index", "")), member]


def encode_polygon(points: Iterable[Iterable[float]]) -> str:
    """Single-cell polygon encoding: "x1,y1;x2,y2;..." with integral ints."""
    parts = []
    for point in points:
        x, y = point
        parts.append(f"{_num(x)},{_num(y)}")
    return ";".join(parts)


def _num(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))
