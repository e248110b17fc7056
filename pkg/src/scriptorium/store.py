"""Process-local record store backing every service.

One reentrant mutex guards all mutations, which makes multi-step writes
(claim, submit) linearizable per record at desk scale.  Reports and
exports read from :meth:`Store.snapshot`, a deep copy taken under the
lock, so they see a consistent state while annotation traffic continues.

Records are dataclass instances keyed by id.  Persistence serializes
each record through its own ``to_dict``/``from_dict`` pair, so the store
itself stays schema-agnostic.
"""

from __future__ import annotations

import copy
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def isoformat_utc(dt: datetime) -> str:
    """ISO-8601 UTC with a Z suffix."""
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_utc(value: str) -> datetime:
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


class Store:
    """Thread-safe map of collections, each a dict of id -> record."""

    def __init__(self) -> None:
        self._collections: dict[str, dict[str, Any]] = {}
        self.lock = threading.RLock()

    def collection(self, name: str) -> dict[str, Any]:
        with self.lock:
            return self._collections.setdefault(name, {})

    def put(self, name: str, record_id: str, record: Any) -> Any:
        with self.lock:
            self.collection(name)[record_id] = record
            return record

    def get(self, name: str, record_id: str) -> Any | None:
        with self.lock:
            return self.collection(name).get(record_id)

    def delete(self, name: str, record_id: str) -> None:
        with self.lock:
            self.collection(name).pop(record_id, None)

    def values(self, name: str) -> list[Any]:
        with self.lock:
            return list(self.collection(name).values())

    def find(self, name: str, predicate: Callable[[Any], bool]) -> list[Any]:
        with self.lock:
            return [r for r in self.collection(name).values() if predicate(r)]

    def snapshot(self) -> "Store":
        """Deep copy of the whole store for consistent read-only aggregation."""
        with self.lock:
            snap = Store()
            snap._collections = copy.deepcopy(self._collections)
            return snap

    # -- persistence ---------------------------------------------------------

    def save_json(self, path: str | Path, registry: dict[str, tuple[type, str]]) -> None:
        """Write registered collections to one JSON document.

        ``registry`` maps collection name to ``(record_class, id_field)``;
        unregistered collections (ephemeral data such as sessions) are
        skipped.  The write is atomic via a temp-file rename.
        """
        with self.lock:
            doc: dict[str, Any] = {"format": "scriptorium-store", "version": 1, "collections": {}}
            for name in sorted(self._collections):
                if name not in registry:
                    continue
                records = self._collections[name]
                doc["collections"][name] = [records[k].to_dict() for k in sorted(records)]
        tmp = Path(str(path) + ".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, ensure_ascii=False), encoding="utf-8")
        tmp.replace(Path(path))

    def load_json(self, path: str | Path, registry: dict[str, tuple[type, str]]) -> None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != "scriptorium-store":
            raise ValueError(f"{path}: not a scriptorium store file")
        with self.lock:
            for name, rows in doc.get("collections", {}).items():
                if name not in registry:
                    continue
                cls, id_field = registry[name]
                coll = self.collection(name)
                for row in rows:
                    record = cls.from_dict(row)
                    coll[getattr(record, id_field)] = record
