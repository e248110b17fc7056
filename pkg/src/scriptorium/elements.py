"""Typed document elements: pages, lines, rows, zones.

Elements reference images by IIIF URI only; no pixel data is stored.
Coordinates are integer pixels in the full-resolution image frame,
matching the IIIF region syntax.  Polygons are simple closed rings;
self-intersection is tolerated but zero-area (collinear) rings are not.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .errors import (
    CycleError,
    GeometryError,
    UnknownElement,
    UnknownParent,
    ValidationError,
)
from .ids import new_id
from .store import Store

Point = tuple[float, float]

# Parents normally share the child's image (zones on a page).  A line may
# instead carry its own pre-cropped image URI while hanging under its page,
# so page-typed parents are exempt from the same-image rule.
PAGE_TYPE = "page"


@dataclass(frozen=True)
class ImageRef:
    iiif_base_uri: str
    width: int
    height: int

    def __post_init__(self) -> None:
        if not self.iiif_base_uri:
            raise ValidationError("image reference requires a IIIF base URI")
        if self.width <= 0 or self.height <= 0:
            raise ValidationError("image dimensions must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {"uri": self.iiif_base_uri, "width": self.width, "height": self.height}

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "ImageRef":
        return cls(
            iiif_base_uri=row.get("uri") or row.get("iiif_base_uri"),
            width=int(row["width"]),
            height=int(row["height"]),
        )


def validate_polygon(points: Sequence[Point], width: int, height: int) -> list[Point]:
    """Check ring validity against the owning image; returns the points as tuples.

    Rejects rings with fewer than 3 points, out-of-bounds points, and
    degenerate (all-collinear, hence zero-area) rings.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise GeometryError(f"polygon needs at least 3 points, got {len(pts)}")
    for x, y in pts:
        if not (0 <= x <= width and 0 <= y <= height):
            raise GeometryError(
                f"point ({x:g},{y:g}) outside image bounds {width}x{height}"
            )
    if _all_collinear(pts):
        raise GeometryError("degenerate polygon: all points collinear")
    return pts


def _all_collinear(pts: list[Point]) -> bool:
    x0, y0 = pts[0]
    base = next(((x - x0, y - y0) for x, y in pts[1:] if (x, y) != (x0, y0)), None)
    if base is None:
        return True  # every point identical
    bx, by = base
    return all(abs(bx * (y - y0) - by * (x - x0)) < 1e-9 for x, y in pts[1:])


def bounding_box(points: Sequence[Point]) -> tuple[int, int, int, int]:
    """Smallest axis-aligned integer rectangle containing every point.

    Returned as (x, y, w, h) with w, h >= 1.
    """
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x = math.floor(min(xs))
    y = math.floor(min(ys))
    w = max(1, math.ceil(max(xs)) - x)
    h = max(1, math.ceil(max(ys)) - y)
    return (x, y, w, h)


@dataclass
class ElementRecord:
    element_id: str
    project_id: str
    element_type: str
    image: ImageRef
    polygon: list[Point]
    parent: str | None = None
    order_index: int = 0
    name: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "element_id": self.element_id,
            "project_id": self.project_id,
            "element_type": self.element_type,
            "image": self.image.to_dict(),
            "polygon": [[x, y] for x, y in self.polygon],
            "parent": self.parent,
            "order_index": self.order_index,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "ElementRecord":
        return cls(
            element_id=row["element_id"],
            project_id=row["project_id"],
            element_type=row["element_type"],
            image=ImageRef.from_dict(row["image"]),
            polygon=[(float(x), float(y)) for x, y in row["polygon"]],
            parent=row.get("parent"),
            order_index=int(row.get("order_index", 0)),
            name=row.get("name", ""),
        )


ELEMENTS = "elements"


class ElementService:
    def __init__(self, store: Store):
        self._store = store

    def get(self, element_id: str) -> ElementRecord:
        element = self._store.get(ELEMENTS, element_id)
        if element is None:
            raise UnknownElement(element_id)
        return element

    def create_element(
        self,
        project_id: str,
        element_type: str,
        image: ImageRef,
        polygon: Sequence[Point],
        parent: str | None = None,
        order_index: int = 0,
        name: str = "",
        element_id: str | None = None,
    ) -> ElementRecord:
        if not element_type:
            raise ValidationError("element_type must be non-empty")
        if order_index < 0:
            raise ValidationError("order_index must be >= 0")
        points = validate_polygon(polygon, image.width, image.height)
        with self._store.lock:
            element_id = element_id or new_id("el")
            if self._store.get(ELEMENTS, element_id) is not None:
                raise ValidationError(f"element id already exists: {element_id}")
            if parent is not None:
                self._check_parent(project_id, element_id, parent, image, order_index)
            record = ElementRecord(
                element_id=element_id,
                project_id=project_id,
                element_type=element_type,
                image=image,
                polygon=points,
                parent=parent,
                order_index=order_index,
                name=name,
            )
            return self._store.put(ELEMENTS, element_id, record)

    def _check_parent(self, project_id: str, element_id: str, parent: str,
                      image: ImageRef, order_index: int) -> None:
        if parent == element_id:
            raise CycleError("element cannot be its own parent")
        parent_rec = self._store.get(ELEMENTS, parent)
        if parent_rec is None:
            raise UnknownParent(parent)
        if parent_rec.project_id != project_id:
            raise UnknownParent(f"parent {parent} belongs to another project")
        if (parent_rec.image.iiif_base_uri != image.iiif_base_uri
                and parent_rec.element_type != PAGE_TYPE):
            raise GeometryError(
                "parent must share the element's image or be its page"
            )
        # walk up: a fresh id cannot occur in the existing ancestor chain,
        # but the walk also guards re-parenting paths and corrupt data
        seen = {element_id}
        cursor: str | None = parent
        while cursor is not None:
            if cursor in seen:
                raise CycleError(f"parent chain loops at {cursor}")
            seen.add(cursor)
            rec = self._store.get(ELEMENTS, cursor)
            cursor = rec.parent if rec else None
        for sibling in self._store.values(ELEMENTS):
            if sibling.parent == parent and sibling.order_index == order_index:
                raise ValidationError(
                    f"order_index {order_index} already used under parent {parent}"
                )

    def children_of(self, element_id: str, type_filter: str | None = None) -> list[ElementRecord]:
        self.get(element_id)
        children = self._store.find(ELEMENTS, lambda e: e.parent == element_id)
        if type_filter is not None:
            children = [c for c in children if c.element_type == type_filter]
        return sorted(children, key=lambda e: e.order_index)

    def by_project(self, project_id: str, element_type: str | None = None) -> list[ElementRecord]:
        records = self._store.find(ELEMENTS, lambda e: e.project_id == project_id)
        if element_type is not None:
            records = [e for e in records if e.element_type == element_type]
        return sorted(records, key=lambda e: (e.order_index, e.element_id))

    def import_jsonl(self, project_id: str, stream: Iterable[str] | str) -> list[ElementRecord]:
        """Ingest the line-delimited JSON element format.

        One element per line: {"id"?, "type", "image": {"uri", "width",
        "height"}, "polygon": [[x, y], ...], "parent"?, "order"}.
        Lines are processed in order so parents can precede children.
        """
        if isinstance(stream, str):
            stream = stream.splitlines()
        created: list[ElementRecord] = []
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {lineno}: invalid JSON ({exc})") from exc
            try:
                image = ImageRef.from_dict(row["image"])
                created.append(self.create_element(
                    project_id=project_id,
                    element_type=row["type"],
                    image=image,
                    polygon=[(p[0], p[1]) for p in row["polygon"]],
                    parent=row.get("parent"),
                    order_index=int(row.get("order", 0)),
                    name=row.get("name", ""),
                    element_id=row.get("id"),
                ))
            except KeyError as exc:
                raise ValidationError(f"line {lineno}: missing key {exc}") from exc
        return created
