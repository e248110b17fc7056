"""Campaign progress, inter-annotator agreement, and timing statistics.

Metric choices by mode: Cohen's kappa and exact match for classification,
symmetrized character error rate for transcription, per-field exact match
for key-value forms, span-level F1 for entities, and Jaccard set
agreement for structure zones and group memberships.

All aggregation runs over a store snapshot, so reports stay internally
consistent while annotation traffic continues.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import timedelta
from typing import Any, Iterable, Mapping, Sequence

from .errors import DegenerateAgreement, LengthMismatch
from .modes import ModeKind
from .store import Store
from .tasks import ANNOTATIONS, TASKS, Annotation, TaskRecord, TaskService, TaskStatus

COMPLETED_STATUSES = (TaskStatus.ANNOTATED, TaskStatus.VALIDATED, TaskStatus.REJECTED)
DEFAULT_TIME_CAP = timedelta(hours=1)


# ---------------------------------------------------------------------------
# Pure metric functions
# ---------------------------------------------------------------------------

def cohen_kappa(labels_a: Sequence[str], labels_b: Sequence[str]) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    Raises LengthMismatch for unpaired vectors and DegenerateAgreement
    (carrying the observed agreement) when chance agreement is exactly 1.
    """
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"{len(labels_a)} labels vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise LengthMismatch("label vectors must be non-empty")
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    marginals_a: dict[str, int] = {}
    marginals_b: dict[str, int] = {}
    for a, b in zip(labels_a, labels_b):
        marginals_a[a] = marginals_a.get(a, 0) + 1
        marginals_b[b] = marginals_b.get(b, 0) + 1
    expected = sum(
        (marginals_a.get(label, 0) / n) * (marginals_b.get(label, 0) / n)
        for label in set(marginals_a) | set(marginals_b)
    )
    if expected >= 1.0:
        raise DegenerateAgreement(observed)
    return (observed - expected) / (1.0 - expected)


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs, two-row dynamic programming."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,            # deletion
                current[j - 1] + 1,         # insertion
                previous[j - 1] + (ca != cb),  # substitution
            ))
        previous = current
    return previous[-1]


def char_error_rate(reference: str, hypothesis: str) -> float:
    """Levenshtein(ref, hyp) / len(ref); empty reference counts as length 1."""
    return levenshtein(reference, hypothesis) / max(1, len(reference))


def entity_span_f1(spans_a: Iterable[Mapping[str, Any]],
                   spans_b: Iterable[Mapping[str, Any]]) -> float:
    """F1 over exact (offset, length, type) matches; 1.0 iff the sets are equal."""
    set_a = {(s["offset"], s["length"], s["type_id"]) for s in spans_a}
    set_b = {(s["offset"], s["length"], s["type_id"]) for s in spans_b}
    if not set_a and not set_b:
        return 1.0
    common = len(set_a & set_b)
    return 2 * common / (len(set_a) + len(set_b))


def set_jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def co_member_pairs(groups: Iterable[Iterable[str]]) -> set[frozenset[str]]:
    """Unordered pairs of elements placed in the same group."""
    pairs: set[frozenset[str]] = set()
    for group in groups:
        members = list(group)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if members[i] != members[j]:
                    pairs.add(frozenset((members[i], members[j])))
    return pairs


def normalize_cell(value: str) -> str:
    """Whitespace-collapsed, case-folded comparison form for field values."""
    return " ".join(str(value).split()).casefold()


def median_duration(durations: Sequence[timedelta],
                    cap: timedelta = DEFAULT_TIME_CAP) -> timedelta | None:
    """Median after dropping outliers above the cap; None when nothing remains.

    Even counts take the mean of the two central values.
    """
    kept = sorted(d for d in durations if d <= cap)
    if not kept:
        return None
    seconds = statistics.median(d.total_seconds() for d in kept)
    return timedelta(seconds=seconds)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ProgressReport:
    campaign_id: str
    counts: dict[str, int]
    total: int
    completion_ratio: float
    per_user: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "counts": dict(self.counts),
            "total": self.total,
            "completion_ratio": self.completion_ratio,
            "per_user": dict(self.per_user),
        }


@dataclass
class AgreementReport:
    campaign_id: str
    mode: ModeKind
    n_pairs: int
    metrics: dict[str, float | None]
    pairs: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "mode": self.mode.value,
            "n_pairs": self.n_pairs,
            "metrics": dict(self.metrics),
            "pairs": list(self.pairs),
        }


class StatsService:
    def __init__(self, store: Store, tasks: TaskService):
        self._store = store
        self._tasks = tasks

    def progress(self, campaign_id: str) -> ProgressReport:
        self._tasks.get_campaign(campaign_id)
        snap = self._store.snapshot()
        tasks = [t for t in snap.values(TASKS) if t.campaign_id == campaign_id]
        counts = {status.value: 0 for status in TaskStatus}
        for task in tasks:
            counts[task.status.value] += 1
        total = len(tasks)
        done = counts["annotated"] + counts["validated"]
        per_user: dict[str, int] = {}
        for task in tasks:
            live = _live_annotation(snap, task.task_id)
            if live is not None:
                per_user[live.author] = per_user.get(live.author, 0) + 1
        return ProgressReport(
            campaign_id=campaign_id,
            counts=counts,
            total=total,
            completion_ratio=(done / total) if total else 0.0,
            per_user=dict(sorted(per_user.items())),
        )

    def median_annotation_time(self, campaign_id: str,
                               cap: timedelta = DEFAULT_TIME_CAP) -> timedelta | None:
        self._tasks.get_campaign(campaign_id)
        snap = self._store.snapshot()
        durations = [
            t.annotated_at - t.claimed_at
            for t in snap.values(TASKS)
            if (t.campaign_id == campaign_id
                and t.status in COMPLETED_STATUSES
                and t.claimed_at is not None
                and t.annotated_at is not None)
        ]
        return median_duration(durations, cap)

    def pairwise_agreement(self, campaign_id: str) -> AgreementReport:
        campaign = self._tasks.get_campaign(campaign_id)
        snap = self._store.snapshot()
        groups: dict[str, list[tuple[TaskRecord, Annotation]]] = {}
        for task in snap.values(TASKS):
            if (task.campaign_id != campaign_id or not task.dup_group
                    or task.status not in COMPLETED_STATUSES):
                continue
            live = _live_annotation(snap, task.task_id)
            if live is not None:
                groups.setdefault(task.dup_group, []).append((task, live))

        pair_rows: list[dict[str, Any]] = []
        label_pairs: list[tuple[str, str]] = []
        for dup_group in sorted(groups):
            siblings = sorted(groups[dup_group], key=lambda ta: ta[0].task_id)
            if len(siblings) < 2:
                continue
            for i in range(len(siblings)):
                for j in range(i + 1, len(siblings)):
                    task_a, ann_a = siblings[i]
                    task_b, ann_b = siblings[j]
                    row: dict[str, Any] = {
                        "dup_group": dup_group,
                        "element_id": task_a.element_id,
                        "task_ids": [task_a.task_id, task_b.task_id],
                        "authors": [ann_a.author, ann_b.author],
                    }
                    row.update(_pair_score(campaign.mode, campaign.config,
                                           ann_a.payload, ann_b.payload))
                    pair_rows.append(row)
                    if campaign.mode is ModeKind.CLASSIFICATION:
                        label_pairs.append((ann_a.payload.get("class_id", ""),
                                            ann_b.payload.get("class_id", "")))

        n_pairs = sum(1 for g in groups.values() if len(g) >= 2)
        metrics = _campaign_metrics(campaign.mode, pair_rows, label_pairs)
        return AgreementReport(
            campaign_id=campaign_id,
            mode=campaign.mode,
            n_pairs=n_pairs,
            metrics=metrics,
            pairs=pair_rows,
        )


def _live_annotation(snap: Store, task_id: str) -> Annotation | None:
    live = [
        a for a in snap.values(ANNOTATIONS)
        if a.task_id == task_id and a.superseded_by is None
    ]
    live.sort(key=lambda a: (a.created_at, a.annotation_id))
    return live[-1] if live else None


def _pair_score(mode: ModeKind, config: Any, payload_a: Mapping[str, Any],
                payload_b: Mapping[str, Any]) -> dict[str, Any]:
    if mode is ModeKind.CLASSIFICATION:
        a, b = payload_a.get("class_id"), payload_b.get("class_id")
        return {"labels": [a, b], "match": a == b}
    if mode is ModeKind.TRANSCRIPTION:
        text_a = _joined_text(payload_a)
        text_b = _joined_text(payload_b)
        cer_ab = char_error_rate(text_a, text_b)
        cer_ba = char_error_rate(text_b, text_a)
        return {"cer_ab": cer_ab, "cer_ba": cer_ba, "mean_cer": (cer_ab + cer_ba) / 2}
    if mode is ModeKind.KEY_VALUE:
        values_a = payload_a.get("values", {})
        values_b = payload_b.get("values", {})
        # the configured field list is the denominator, so fields left
        # blank by both annotators still count as agreements
        fields = [f.field_id for f in config.fields]
        equal = sum(
            1 for f in fields
            if normalize_cell(values_a.get(f, "")) == normalize_cell(values_b.get(f, ""))
        )
        total = len(fields)
        return {
            "fields_total": total,
            "fields_equal": equal,
            "match_rate": (equal / total) if total else 1.0,
        }
    if mode is ModeKind.ENTITIES:
        spans_a = payload_a.get("spans", [])
        spans_b = payload_b.get("spans", [])
        return {
            "f1": entity_span_f1(spans_a, spans_b),
            "n_spans": [len(spans_a), len(spans_b)],
        }
    if mode is ModeKind.STRUCTURE:
        zones_a = _zone_set(payload_a)
        zones_b = _zone_set(payload_b)
        return {"jaccard": set_jaccard(zones_a, zones_b)}
    if mode is ModeKind.GROUPING:
        pairs_a = co_member_pairs(g.get("member_element_ids", [])
                                  for g in payload_a.get("groups", []))
        pairs_b = co_member_pairs(g.get("member_element_ids", [])
                                  for g in payload_b.get("groups", []))
        return {"jaccard": set_jaccard(pairs_a, pairs_b)}
    raise ValueError(f"unsupported mode: {mode}")


def _joined_text(payload: Mapping[str, Any]) -> str:
    texts = {entry["element_id"]: entry.get("text", "")
             for entry in payload.get("texts", [])}
    return "\n".join(texts.get(eid, "") for eid in sorted(texts))


def _zone_set(payload: Mapping[str, Any]) -> set:
    return {
        (z.get("type_id"), tuple(tuple(p) for p in z.get("polygon", [])))
        for z in payload.get("zones", [])
    }


def _campaign_metrics(mode: ModeKind, pair_rows: list[dict[str, Any]],
                      label_pairs: list[tuple[str, str]]) -> dict[str, float | None]:
    if mode is ModeKind.CLASSIFICATION:
        if not pair_rows:
            return {"exact_match_rate": None, "kappa": None, "observed_agreement": None}
        match_rate = sum(1 for r in pair_rows if r["match"]) / len(pair_rows)
        vec_a = [a for a, _ in label_pairs]
        vec_b = [b for _, b in label_pairs]
        try:
            kappa: float | None = cohen_kappa(vec_a, vec_b)
            observed = match_rate
        except DegenerateAgreement as exc:
            kappa, observed = None, exc.observed
        return {"exact_match_rate": match_rate, "kappa": kappa,
                "observed_agreement": observed}
    if mode is ModeKind.TRANSCRIPTION:
        return {"mean_cer": _mean(r["mean_cer"] for r in pair_rows)}
    if mode is ModeKind.KEY_VALUE:
        total = sum(r["fields_total"] for r in pair_rows)
        equal = sum(r["fields_equal"] for r in pair_rows)
        return {"field_match_rate": (equal / total) if total else None}
    if mode is ModeKind.ENTITIES:
        return {"mean_f1": _mean(r["f1"] for r in pair_rows)}
    return {"mean_jaccard": _mean(r["jaccard"] for r in pair_rows)}


def _mean(values: Iterable[float]) -> float | None:
    values = list(values)
    return (sum(values) / len(values)) if values else None
