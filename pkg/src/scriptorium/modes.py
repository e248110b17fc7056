"""The six campaign modes: config schemas, payload validation, helpers.

One task, one interface: each mode defines exactly one payload shape.
Configs are typed dataclasses normalized by :func:`validate_config`;
payloads stay in their canonical JSON encoding (plain dicts with
lower_snake_case keys) and are checked by :func:`validate_payload`.
Those encodings are also the wire and export representation.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

from .elements import validate_polygon
from .errors import ConfigError, GeometryError, PayloadError, UnknownMember


class ModeKind(str, Enum):
    CLASSIFICATION = "classification"
    STRUCTURE = "structure"
    TRANSCRIPTION = "transcription"
    ENTITIES = "entities"
    KEY_VALUE = "key_value"
    GROUPING = "grouping"


class Granularity(str, Enum):
    LINE_BY_LINE = "line_by_line"
    PAGE_BY_PAGE = "page_by_page"


class FieldType(str, Enum):
    TEXT = "text"
    INTEGER = "integer"
    DATE = "date"
    CHOICE = "choice"


@dataclass(frozen=True)
class ClassDef:
    class_id: str
    label: str


@dataclass(frozen=True)
class ZoneTypeDef:
    type_id: str
    label: str


@dataclass(frozen=True)
class EntityTypeDef:
    type_id: str
    label: str
    color: str


@dataclass(frozen=True)
class FieldDef:
    field_id: str
    label: str
    datatype: FieldType
    required: bool = False
    choices: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ClassificationConfig:
    classes: tuple[ClassDef, ...]


@dataclass(frozen=True)
class StructureConfig:
    zone_types: tuple[ZoneTypeDef, ...]


@dataclass(frozen=True)
class TranscriptionConfig:
    granularity: Granularity
    target_element_type: str


@dataclass(frozen=True)
class EntitiesConfig:
    entity_types: tuple[EntityTypeDef, ...]


@dataclass(frozen=True)
class KeyValueConfig:
    fields: tuple[FieldDef, ...]


@dataclass(frozen=True)
class GroupingConfig:
    group_label: str
    child_element_type: str


ModeConfig = (
    ClassificationConfig
    | StructureConfig
    | TranscriptionConfig
    | EntitiesConfig
    | KeyValueConfig
    | GroupingConfig
)

_CONFIG_KIND: dict[type, ModeKind] = {
    ClassificationConfig: ModeKind.CLASSIFICATION,
    StructureConfig: ModeKind.STRUCTURE,
    TranscriptionConfig: ModeKind.TRANSCRIPTION,
    EntitiesConfig: ModeKind.ENTITIES,
    KeyValueConfig: ModeKind.KEY_VALUE,
    GroupingConfig: ModeKind.GROUPING,
}

_HEX_COLOR = re.compile(r"^#[0-9a-fA-F]{6}$")
# ASCII digits only: \d would admit unicode digits that client-side
# validators reject
_DATE_SHAPE = re.compile(r"^[0-9]{4}(-[0-9]{2})?(-[0-9]{2})?$")
_INTEGER_SHAPE = re.compile(r"^[+-]?[0-9]+$")


def kind_of(config: ModeConfig) -> ModeKind:
    return _CONFIG_KIND[type(config)]


# ---------------------------------------------------------------------------
# Config validation
# ---------------------------------------------------------------------------

def validate_config(mode: ModeKind | str, raw: Mapping[str, Any] | ModeConfig) -> ModeConfig:
    """Normalize and check a mode configuration.

    Accepts either the canonical dict encoding or an already-built config
    (which is re-encoded and re-checked).  Raises :class:`ConfigError`
    carrying the first violated rule.
    """
    mode = ModeKind(mode)
    if not isinstance(raw, Mapping):
        raw = config_to_dict(raw)
    if mode is ModeKind.CLASSIFICATION:
        classes = _id_label_list(raw, "classes", "class_id", ClassDef)
        return ClassificationConfig(classes=classes)
    if mode is ModeKind.STRUCTURE:
        zone_types = _id_label_list(raw, "zone_types", "type_id", ZoneTypeDef)
        return StructureConfig(zone_types=zone_types)
    if mode is ModeKind.TRANSCRIPTION:
        try:
            granularity = Granularity(raw["granularity"])
        except (KeyError, ValueError):
            raise ConfigError("transcription requires granularity "
                              "line_by_line or page_by_page") from None
        target = str(raw.get("target_element_type", "")).strip()
        if not target:
            raise ConfigError("transcription requires target_element_type")
        return TranscriptionConfig(granularity=granularity, target_element_type=target)
    if mode is ModeKind.ENTITIES:
        entity_types = _entity_type_list(raw)
        return EntitiesConfig(entity_types=entity_types)
    if mode is ModeKind.KEY_VALUE:
        return KeyValueConfig(fields=_field_list(raw))
    if mode is ModeKind.GROUPING:
        child_type = str(raw.get("child_element_type", "")).strip()
        if not child_type:
            raise ConfigError("grouping requires child_element_type")
        return GroupingConfig(
            group_label=str(raw.get("group_label", "")).strip(),
            child_element_type=child_type,
        )
    raise ConfigError(f"unsupported mode: {mode}")


def _id_label_list(raw: Mapping[str, Any], key: str, id_key: str, cls: type) -> tuple:
    rows = raw.get(key)
    if not isinstance(rows, Sequence) or isinstance(rows, str) or not rows:
        raise ConfigError(f"{key} must be a non-empty list")
    out = []
    seen: set[str] = set()
    for row in rows:
        item_id = str(row.get(id_key, "")).strip()
        if not item_id:
            raise ConfigError(f"{key}: every entry needs a {id_key}")
        if item_id in seen:
            raise ConfigError(f"{key}: duplicate {id_key} {item_id!r}")
        seen.add(item_id)
        out.append(cls(item_id, str(row.get("label", item_id)).strip()))
    return tuple(out)


def _entity_type_list(raw: Mapping[str, Any]) -> tuple[EntityTypeDef, ...]:
    rows = raw.get("entity_types")
    if not isinstance(rows, Sequence) or isinstance(rows, str) or not rows:
        raise ConfigError("entity_types must be a non-empty list")
    out = []
    seen: set[str] = set()
    for row in rows:
        type_id = str(row.get("type_id", "")).strip()
        if not type_id:
            raise ConfigError("entity_types: every entry needs a type_id")
        if type_id in seen:
            raise ConfigError(f"entity_types: duplicate type_id {type_id!r}")
        seen.add(type_id)
        color = str(row.get("color", "")).strip()
        if not _HEX_COLOR.match(color):
            raise ConfigError(f"entity_types: {type_id!r} needs a #rrggbb color")
        out.append(EntityTypeDef(type_id, str(row.get("label", type_id)).strip(),
                                 color.lower()))
    return tuple(out)


def _field_list(raw: Mapping[str, Any]) -> tuple[FieldDef, ...]:
    rows = raw.get("fields")
    if not isinstance(rows, Sequence) or isinstance(rows, str) or not rows:
        raise ConfigError("fields must be a non-empty list")
    out = []
    seen: set[str] = set()
    for row in rows:
        field_id = str(row.get("field_id", "")).strip()
        if not field_id:
            raise ConfigError("fields: every entry needs a field_id")
        if field_id in seen:
            raise ConfigError(f"fields: duplicate field_id {field_id!r}")
        seen.add(field_id)
        try:
            datatype = FieldType(row.get("datatype", "text"))
        except ValueError:
            raise ConfigError(f"fields: {field_id!r} has unknown datatype "
                              f"{row.get('datatype')!r}") from None
        choices: tuple[str, ...] | None = None
        if datatype is FieldType.CHOICE:
            raw_choices = row.get("choices") or []
            trimmed = [str(c).strip() for c in raw_choices if str(c).strip()]
            if len(trimmed) < 2:
                raise ConfigError(f"fields: choice field {field_id!r} needs >= 2 choices")
            if len(set(trimmed)) != len(trimmed):
                raise ConfigError(f"fields: choice field {field_id!r} has duplicate choices")
            choices = tuple(trimmed)
        elif row.get("choices"):
            raise ConfigError(f"fields: {field_id!r} carries choices but is not a choice field")
        out.append(FieldDef(
            field_id=field_id,
            label=str(row.get("label", field_id)).strip(),
            datatype=datatype,
            required=bool(row.get("required", False)),
            choices=choices,
        ))
    return tuple(out)


def config_to_dict(config: ModeConfig) -> dict[str, Any]:
    """Canonical JSON encoding of a config."""
    if isinstance(config, ClassificationConfig):
        return {"classes": [{"class_id": c.class_id, "label": c.label}
                            for c in config.classes]}
    if isinstance(config, StructureConfig):
        return {"zone_types": [{"type_id": z.type_id, "label": z.label}
                               for z in config.zone_types]}
    if isinstance(config, TranscriptionConfig):
        return {"granularity": config.granularity.value,
                "target_element_type": config.target_element_type}
    if isinstance(config, EntitiesConfig):
        return {"entity_types": [{"type_id": e.type_id, "label": e.label, "color": e.color}
                                 for e in config.entity_types]}
    if isinstance(config, KeyValueConfig):
        out = []
        for f in config.fields:
            row: dict[str, Any] = {"field_id": f.field_id, "label": f.label,
                                   "datatype": f.datatype.value, "required": f.required}
            if f.choices is not None:
                row["choices"] = list(f.choices)
            out.append(row)
        return {"fields": out}
    if isinstance(config, GroupingConfig):
        return {"group_label": config.group_label,
                "child_element_type": config.child_element_type}
    raise ConfigError(f"not a mode config: {type(config).__name__}")


# ---------------------------------------------------------------------------
# Payload validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementContext:
    """What a payload validator needs to know about the task's element."""

    element_id: str
    image_width: int
    image_height: int
    element_type: str = ""
    children: tuple[tuple[str, str], ...] = ()  # (element_id, element_type)
    reference_text: str | None = None

    def child_ids(self, element_type: str | None = None) -> frozenset[str]:
        return frozenset(
            cid for cid, ctype in self.children
            if element_type is None or ctype == element_type
        )


def validate_payload(config: ModeConfig, context: ElementContext,
                     payload: Mapping[str, Any]) -> dict[str, Any]:
    """Check a payload against its campaign config and element context.

    Returns the normalized payload (canonical encoding, values as strings
    for key_value mode).  Raises :class:`PayloadError` with a
    machine-readable violation list otherwise.
    """
    if not isinstance(payload, Mapping):
        raise PayloadError([_v("malformed", "payload must be an object")])
    checker = _CHECKERS[type(config)]
    violations: list[dict[str, str]] = []
    normalized = checker(config, context, payload, violations)
    if violations:
        raise PayloadError(violations)
    return normalized


def _v(code: str, detail: str) -> dict[str, str]:
    return {"code": code, "detail": detail}


def _check_classification(config: ClassificationConfig, context: ElementContext,
                          payload: Mapping[str, Any],
                          violations: list) -> dict[str, Any]:
    class_id = payload.get("class_id")
    if not isinstance(class_id, str) or not class_id:
        violations.append(_v("malformed", "classification payload needs class_id"))
        return {}
    if class_id not in {c.class_id for c in config.classes}:
        violations.append(_v("unknown_id", f"unknown class_id {class_id!r}"))
    return {"class_id": class_id}


def _check_structure(config: StructureConfig, context: ElementContext,
                     payload: Mapping[str, Any], violations: list) -> dict[str, Any]:
    zones = payload.get("zones")
    if not isinstance(zones, Sequence) or isinstance(zones, str):
        violations.append(_v("malformed", "structure payload needs a zones list"))
        return {}
    known = {z.type_id for z in config.zone_types}
    out = []
    for i, zone in enumerate(zones):
        if not isinstance(zone, Mapping):
            violations.append(_v("malformed", f"zones[{i}] must be an object"))
            continue
        type_id = zone.get("type_id")
        if type_id not in known:
            violations.append(_v("unknown_id", f"zones[{i}]: unknown type_id {type_id!r}"))
        polygon = zone.get("polygon")
        if not isinstance(polygon, Sequence) or isinstance(polygon, str):
            violations.append(_v("malformed", f"zones[{i}]: polygon must be a point list"))
            continue
        try:
            points = validate_polygon([(p[0], p[1]) for p in polygon],
                                      context.image_width, context.image_height)
        except (GeometryError, TypeError, IndexError) as exc:
            violations.append(_v("zone_polygon_invalid", f"zones[{i}]: {exc}"))
            continue
        out.append({"polygon": [[x, y] for x, y in points], "type_id": type_id})
    return {"zones": out}


def _check_transcription(config: TranscriptionConfig, context: ElementContext,
                         payload: Mapping[str, Any], violations: list) -> dict[str, Any]:
    texts = payload.get("texts")
    if not isinstance(texts, Sequence) or isinstance(texts, str):
        violations.append(_v("malformed", "transcription payload needs a texts list"))
        return {}
    if config.granularity is Granularity.PAGE_BY_PAGE:
        targets = frozenset({context.element_id})
    elif context.element_type == config.target_element_type:
        # the campaign targets line-level elements directly
        targets = frozenset({context.element_id})
    else:
        targets = context.child_ids(config.target_element_type)
    seen: set[str] = set()
    out = []
    for i, entry in enumerate(texts):
        if not isinstance(entry, Mapping):
            violations.append(_v("malformed", f"texts[{i}] must be an object"))
            continue
        element_id = entry.get("element_id")
        text = entry.get("text")
        if not isinstance(element_id, str) or not isinstance(text, str):
            violations.append(_v("malformed", f"texts[{i}] needs element_id and text"))
            continue
        if element_id not in targets:
            violations.append(_v("unknown_id",
                                 f"texts[{i}]: {element_id!r} is not a transcription target"))
            continue
        if element_id in seen:
            violations.append(_v("duplicate_target",
                                 f"texts[{i}]: second text for {element_id!r}"))
            continue
        seen.add(element_id)
        out.append({"element_id": element_id, "text": text})  # empty text = blank line
    return {"texts": out}


def _check_entities(config: EntitiesConfig, context: ElementContext,
                    payload: Mapping[str, Any], violations: list) -> dict[str, Any]:
    spans = payload.get("spans")
    if not isinstance(spans, Sequence) or isinstance(spans, str):
        violations.append(_v("malformed", "entities payload needs a spans list"))
        return {}
    text = context.reference_text
    if text is None:
        violations.append(_v("no_reference_text",
                             "element has no transcription for spans to index into"))
        return {}
    known = {e.type_id for e in config.entity_types}
    out = []
    for i, span in enumerate(spans):
        if not isinstance(span, Mapping):
            violations.append(_v("malformed", f"spans[{i}] must be an object"))
            continue
        offset, length, type_id = span.get("offset"), span.get("length"), span.get("type_id")
        if not isinstance(offset, int) or not isinstance(length, int) or isinstance(offset, bool) or isinstance(length, bool):
            violations.append(_v("malformed", f"spans[{i}]: offset and length must be integers"))
            continue
        if offset < 0 or length < 1:
            violations.append(_v("malformed", f"spans[{i}]: offset >= 0 and length >= 1 required"))
            continue
        if offset + length > len(text):
            violations.append(_v("span_out_of_bounds",
                                 f"spans[{i}]: [{offset},{offset + length}) exceeds "
                                 f"text length {len(text)}"))
            continue
        if type_id not in known:
            violations.append(_v("unknown_id", f"spans[{i}]: unknown type_id {type_id!r}"))
            continue
        out.append({"offset": offset, "length": length, "type_id": type_id})
    for i, j in _overlapping_pairs(out):
        violations.append(_v("span_overlap", f"spans at index {i} and {j} overlap"))
    return {"spans": out}


def _check_key_value(config: KeyValueConfig, context: ElementContext,
                     payload: Mapping[str, Any], violations: list) -> dict[str, Any]:
    values = payload.get("values")
    if not isinstance(values, Mapping):
        violations.append(_v("malformed", "key_value payload needs a values map"))
        return {}
    by_id = {f.field_id: f for f in config.fields}
    out: dict[str, str] = {}
    for field_id, value in values.items():
        spec = by_id.get(field_id)
        if spec is None:
            violations.append(_v("unknown_field", f"unknown field {field_id!r}"))
            continue
        normalized = _check_field_value(spec, value, violations)
        if normalized is not None:
            out[field_id] = normalized
    for spec in config.fields:
        if spec.required and not out.get(spec.field_id, "").strip():
            violations.append(_v("missing_required_field",
                                 f"required field {spec.field_id!r} missing"))
    return {"values": out}


def _check_field_value(spec: FieldDef, value: Any, violations: list) -> str | None:
    if value is None:
        return ""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        violations.append(_v("bad_value_type", f"field {spec.field_id!r}: "
                             f"expected a scalar, got {type(value).__name__}"))
        return None
    text = str(value).strip()
    if not text:
        return ""
    if spec.datatype is FieldType.INTEGER:
        # strict ASCII digits: int() would also take "1_0" and unicode digits,
        # which client-side validators cannot be expected to mirror
        if not _INTEGER_SHAPE.match(text):
            violations.append(_v("bad_value_type",
                                 f"field {spec.field_id!r}: {text!r} is not an integer"))
            return None
        return str(int(text))
    if spec.datatype is FieldType.DATE:
        if not _valid_partial_date(text):
            violations.append(_v("bad_value_type",
                                 f"field {spec.field_id!r}: {text!r} is not a valid "
                                 "YYYY[-MM[-DD]] date"))
            return None
        return text
    if spec.datatype is FieldType.CHOICE:
        if text not in (spec.choices or ()):
            violations.append(_v("bad_value_type",
                                 f"field {spec.field_id!r}: {text!r} not in choices"))
            return None
        return text
    return text


def _valid_partial_date(text: str) -> bool:
    """ISO-8601 calendar dates, partial forms YYYY and YYYY-MM accepted."""
    if not _DATE_SHAPE.match(text):
        return False
    parts = [int(p) for p in text.split("-")]
    if len(parts) == 1:
        return True
    if len(parts) == 2:
        return 1 <= parts[1] <= 12
    try:
        date(parts[0], parts[1], parts[2])
        return True
    except ValueError:
        return False


def _check_grouping(config: GroupingConfig, context: ElementContext,
                    payload: Mapping[str, Any], violations: list) -> dict[str, Any]:
    groups = payload.get("groups")
    if not isinstance(groups, Sequence) or isinstance(groups, str):
        violations.append(_v("malformed", "grouping payload needs a groups list"))
        return {}
    eligible = context.child_ids(config.child_element_type)
    seen_indices: set[int] = set()
    member_counts: dict[str, int] = {}
    out = []
    for i, group in enumerate(groups):
        if not isinstance(group, Mapping):
            violations.append(_v("malformed", f"groups[{i}] must be an object"))
            continue
        index = group.get("group_index")
        members = group.get("member_element_ids")
        if not isinstance(index, int) or isinstance(index, bool):
            violations.append(_v("malformed", f"groups[{i}]: group_index must be an integer"))
            continue
        if index in seen_indices:
            violations.append(_v("duplicate_group_index",
                                 f"groups[{i}]: group_index {index} reused"))
            continue
        seen_indices.add(index)
        if not isinstance(members, Sequence) or isinstance(members, str) or not members:
            violations.append(_v("malformed",
                                 f"groups[{i}]: member_element_ids must be non-empty"))
            continue
        clean: list[str] = []
        for member in members:
            if member not in eligible:
                violations.append(_v("member_not_child",
                                     f"groups[{i}]: {member!r} is not an eligible child"))
                continue
            member_counts[member] = member_counts.get(member, 0) + 1
            clean.append(member)
        out.append({"group_index": index, "member_element_ids": clean})
    for member, count in sorted(member_counts.items()):
        if count > 1:
            violations.append(_v("member_duplicated",
                                 f"{member!r} appears in {count} groups"))
    return {"groups": out}


_CHECKERS = {
    ClassificationConfig: _check_classification,
    StructureConfig: _check_structure,
    TranscriptionConfig: _check_transcription,
    EntitiesConfig: _check_entities,
    KeyValueConfig: _check_key_value,
    GroupingConfig: _check_grouping,
}


# ---------------------------------------------------------------------------
# Standalone helpers (also used by validators above)
# ---------------------------------------------------------------------------

def entity_spans_overlap(spans: Iterable[Mapping[str, int] | tuple[int, int]]) -> bool:
    """True iff any two spans intersect as half-open [offset, offset+length)."""
    intervals = sorted(_as_interval(s) for s in spans)
    for (a_start, a_end), (b_start, _) in zip(intervals, intervals[1:]):
        if b_start < a_end:
            return True
    return False


def _overlapping_pairs(spans: list[Mapping[str, int]]) -> list[tuple[int, int]]:
    pairs = []
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            if entity_spans_overlap([spans[i], spans[j]]):
                pairs.append((i, j))
    return pairs


def _as_interval(span: Mapping[str, int] | tuple[int, int]) -> tuple[int, int]:
    if isinstance(span, Mapping):
        offset, length = span["offset"], span["length"]
    else:
        offset, length = span
    return (offset, offset + length)


def grouping_partition_check(
    groups: Sequence[Mapping[str, Any] | Sequence[str]],
    eligible_children: Iterable[str],
) -> dict[str, set[str]]:
    """Coverage diagnostics for a grouping payload.

    Returns {"covered", "uncovered", "duplicated"} over the eligible child
    set.  Raises :class:`UnknownMember` for ids outside it; the validation
    policy (overlap disallowed, full coverage not required) is applied by
    the payload validator, not here.
    """
    eligible = set(eligible_children)
    counts: dict[str, int] = {}
    for group in groups:
        members = group.get("member_element_ids") if isinstance(group, Mapping) else group
        for member in members or []:
            if member not in eligible:
                raise UnknownMember(member)
            counts[member] = counts.get(member, 0) + 1
    covered = set(counts)
    return {
        "covered": covered,
        "uncovered": eligible - covered,
        "duplicated": {m for m, n in counts.items() if n > 1},
    }
