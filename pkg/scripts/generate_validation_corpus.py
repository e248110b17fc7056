#!/usr/bin/env python3
"""Generate the shared client/server validation test vectors.

Each case carries a mode config, an element context, a payload, and the
verdict known BY CONSTRUCTION (a valid payload, or a valid payload broken
by one specific, labelled mutation).  Neither validator is consulted, so
the corpus is an independent oracle for both.

    python3 scripts/generate_validation_corpus.py [out.json]
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

TARGET_CASES = 200
DEFAULT_OUT = Path(__file__).resolve().parent.parent / "shared" / "validation_corpus.json"


def context(children=(), reference_text=None, element_type="page",
            width=1000, height=800):
    return {
        "element_id": "el_target",
        "image_width": width,
        "image_height": height,
        "element_type": element_type,
        "children": [list(c) for c in children],
        "reference_text": reference_text,
    }


ROWS = [("el_r0", "row"), ("el_r1", "row"), ("el_r2", "row"), ("el_z0", "zone")]
LINES = [("el_l0", "text_line"), ("el_l1", "text_line"), ("el_z0", "zone")]
TEXT = "Jean Dupont, rue des Archives 14, Paris"  # 39 chars

CONFIGS = {
    "classification": {"classes": [{"class_id": "minutes", "label": "Minutes"},
                                   {"class_id": "index", "label": "Index"},
                                   {"class_id": "blank", "label": "Blank"}]},
    "structure": {"zone_types": [{"type_id": "header", "label": "Header"},
                                 {"type_id": "body", "label": "Body"},
                                 {"type_id": "margin", "label": "Margin"}]},
    "transcription": {"granularity": "line_by_line",
                      "target_element_type": "text_line"},
    "entities": {"entity_types": [
        {"type_id": "person", "label": "Person", "color": "#1f77b4"},
        {"type_id": "place", "label": "Place", "color": "#2ca02c"},
        {"type_id": "date", "label": "Date", "color": "#d62728"}]},
    "key_value": {"fields": [
        {"field_id": "surname", "label": "Surname", "datatype": "text",
         "required": True},
        {"field_id": "birth_year", "label": "Birth year", "datatype": "integer",
         "required": False},
        {"field_id": "birth_date", "label": "Birth date", "datatype": "date",
         "required": False},
        {"field_id": "status", "label": "Status", "datatype": "choice",
         "required": False, "choices": ["present", "absent", "unknown"]}]},
    "grouping": {"group_label": "household", "child_element_type": "row"},
}

CONTEXTS = {
    "classification": context(),
    "structure": context(),
    "transcription": context(children=LINES),
    "entities": context(reference_text=TEXT),
    "key_value": context(),
    "grouping": context(children=ROWS),
}


def classification_cases(rng):
    yield {"class_id": "minutes"}, "valid", None
    yield {"class_id": "index"}, "valid", None
    yield {"class_id": "blank"}, "valid", None
    yield {"class_id": "sermon"}, "invalid", "unknown_id"
    yield {"class_id": ""}, "invalid", "malformed"
    yield {"class_id": 3}, "invalid", "malformed"
    yield {}, "invalid", "malformed"
    yield {"class_id": "MINUTES"}, "invalid", "unknown_id"  # ids are case-exact
    for _ in range(12):
        yield {"class_id": rng.choice(["minutes", "index", "blank"])}, "valid", None
    for _ in range(8):
        yield {"class_id": f"ghost_{rng.randint(0, 99)}"}, "invalid", "unknown_id"


def structure_cases(rng):
    def zone(points, type_id="header"):
        return {"polygon": [list(p) for p in points], "type_id": type_id}

    yield {"zones": []}, "valid", None  # an empty page is a legal statement
    yield {"zones": [zone([(0, 0), (400, 0), (400, 120), (0, 120)])]}, "valid", None
    yield {"zones": [zone([(0, 0), (999, 0), (500, 799)], "body")]}, "valid", None
    yield {"zones": [zone([(0, 0), (1200, 0), (500, 700)])]}, \
        "invalid", "zone_polygon_invalid"  # x beyond width
    yield {"zones": [zone([(0, 0), (100, 100)])]}, "invalid", "zone_polygon_invalid"
    yield {"zones": [zone([(0, 0), (50, 50), (100, 100)])]}, \
        "invalid", "zone_polygon_invalid"  # collinear
    yield {"zones": [zone([(0, 0), (100, 0), (50, 60)], "footer")]}, \
        "invalid", "unknown_id"
    yield {"zones": "header"}, "invalid", "malformed"
    for _ in range(6):
        x = rng.randint(0, 500)
        y = rng.randint(0, 400)
        w = rng.randint(10, 400)
        h = rng.randint(10, 300)
        yield {"zones": [zone([(x, y), (x + w, y), (x + w, y + h), (x, y + h)],
                              rng.choice(["header", "body", "margin"]))]}, \
            "valid", None
    for _ in range(6):
        # one vertex pushed below 0 or past an image edge
        x = rng.randint(0, 500)
        y = rng.randint(0, 400)
        bad = rng.choice([(x, 900), (1100, y), (x, -5), (-3, y)])
        yield {"zones": [zone([(x, y), (x + 50, y), bad])]}, \
            "invalid", "zone_polygon_invalid"


def transcription_cases(rng):
    yield {"texts": [{"element_id": "el_l0", "text": "premier alinéa"}]}, "valid", None
    yield {"texts": [{"element_id": "el_l0", "text": ""}]}, "valid", None  # blank line
    yield {"texts": [{"element_id": "el_l0", "text": "a"},
                     {"element_id": "el_l1", "text": "b"}]}, "valid", None
    yield {"texts": []}, "valid", None
    yield {"texts": [{"element_id": "el_z0", "text": "zone text"}]}, \
        "invalid", "unknown_id"  # child exists but is not a text_line
    yield {"texts": [{"element_id": "el_nope", "text": "x"}]}, "invalid", "unknown_id"
    yield {"texts": [{"element_id": "el_l0", "text": "a"},
                     {"element_id": "el_l0", "text": "b"}]}, \
        "invalid", "duplicate_target"
    yield {"texts": [{"element_id": "el_l0", "text": 7}]}, "invalid", "malformed"
    yield {"texts": [{"element_id": "el_l0"}]}, "invalid", "malformed"
    for _ in range(10):
        yield {"texts": [{"element_id": rng.choice(["el_l0", "el_l1"]),
                          "text": f"ligne {rng.randint(1, 99)}"}]}, "valid", None
    for _ in range(5):
        yield {"texts": [{"element_id": f"el_l{rng.randint(5, 99)}",
                          "text": "perdu"}]}, "invalid", "unknown_id"


def entities_cases(rng):
    yield {"spans": [{"offset": 0, "length": 11, "type_id": "person"}]}, "valid", None
    yield {"spans": []}, "valid", None
    yield {"spans": [{"offset": 0, "length": 11, "type_id": "person"},
                     {"offset": 34, "length": 5, "type_id": "place"}]}, "valid", None
    yield {"spans": [{"offset": 0, "length": len(TEXT), "type_id": "person"}]}, \
        "valid", None
    yield {"spans": [{"offset": 35, "length": 10, "type_id": "place"}]}, \
        "invalid", "span_out_of_bounds"
    yield {"spans": [{"offset": -1, "length": 3, "type_id": "person"}]}, \
        "invalid", "malformed"
    yield {"spans": [{"offset": 0, "length": 0, "type_id": "person"}]}, \
        "invalid", "malformed"
    yield {"spans": [{"offset": 2.5, "length": 3, "type_id": "person"}]}, \
        "invalid", "malformed"
    yield {"spans": [{"offset": 0, "length": 4, "type_id": "rank"}]}, \
        "invalid", "unknown_id"
    yield {"spans": [{"offset": 0, "length": 5, "type_id": "person"},
                     {"offset": 4, "length": 3, "type_id": "place"}]}, \
        "invalid", "span_overlap"
    yield {"spans": [{"offset": 0, "length": 5, "type_id": "person"},
                     {"offset": 5, "length": 3, "type_id": "place"}]}, \
        "valid", None  # half-open: touching spans do not overlap
    for _ in range(10):
        offset = rng.randint(0, len(TEXT) - 4)
        length = rng.randint(1, len(TEXT) - offset)
        yield {"spans": [{"offset": offset, "length": length,
                          "type_id": rng.choice(["person", "place", "date"])}]}, \
            "valid", None
    for _ in range(6):
        offset = rng.randint(0, len(TEXT) - 1)
        length = len(TEXT) - offset + rng.randint(1, 10)
        yield {"spans": [{"offset": offset, "length": length,
                          "type_id": "person"}]}, "invalid", "span_out_of_bounds"


def key_value_cases(rng):
    yield {"values": {"surname": "Dupont"}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_year": "1898",
                      "birth_date": "1898-03-04", "status": "present"}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_year": 1898}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_year": "-12"}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_date": "1898"}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_date": "1898-03"}}, "valid", None
    yield {"values": {"surname": "Dupont", "birth_date": "1896-02-29"}}, \
        "valid", None  # leap year
    yield {"values": {}}, "invalid", "missing_required_field"
    yield {"values": {"surname": "   "}}, "invalid", "missing_required_field"
    yield {"values": {"surname": "X", "rank": "sergeant"}}, "invalid", "unknown_field"
    yield {"values": {"surname": "X", "birth_year": "18g8"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "birth_year": "1 898"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "birth_date": "1898-13"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "birth_date": "1898-02-30"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "birth_date": "1897-02-29"}}, \
        "invalid", "bad_value_type"  # not a leap year
    yield {"values": {"surname": "X", "birth_date": "04/03/1898"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "status": "deceased"}}, \
        "invalid", "bad_value_type"
    yield {"values": {"surname": "X", "status": True}}, "invalid", "bad_value_type"
    yield {"values": {"surname": ["Dupont"]}}, "invalid", "bad_value_type"
    for _ in range(12):
        yield {"values": {"surname": f"Name {rng.randint(1, 99)}",
                          "birth_year": str(rng.randint(1800, 1950)),
                          "status": rng.choice(["present", "absent", "unknown"])}}, \
            "valid", None
    for _ in range(4):
        yield {"values": {"surname": "X",
                          "birth_date": f"1898-{rng.randint(13, 40):02d}"}}, \
            "invalid", "bad_value_type"


def grouping_cases(rng):
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_r0", "el_r1"]},
                      {"group_index": 1, "member_element_ids": ["el_r2"]}]}, \
        "valid", None
    yield {"groups": []}, "valid", None
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_r1"]}]}, \
        "valid", None  # partial coverage allowed
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_z0"]}]}, \
        "invalid", "member_not_child"  # child exists but wrong type
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_r0"]},
                      {"group_index": 1, "member_element_ids": ["el_r0"]}]}, \
        "invalid", "member_duplicated"
    yield {"groups": [{"group_index": 0,
                       "member_element_ids": ["el_r0", "el_r0"]}]}, \
        "invalid", "member_duplicated"
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_r0"]},
                      {"group_index": 0, "member_element_ids": ["el_r1"]}]}, \
        "invalid", "duplicate_group_index"
    yield {"groups": [{"group_index": 0, "member_element_ids": []}]}, \
        "invalid", "malformed"
    yield {"groups": [{"group_index": "0", "member_element_ids": ["el_r0"]}]}, \
        "invalid", "malformed"
    yield {"groups": [{"group_index": 0, "member_element_ids": ["el_r9"]}]}, \
        "invalid", "member_not_child"
    for _ in range(10):
        members = rng.sample(["el_r0", "el_r1", "el_r2"], rng.randint(1, 3))
        yield {"groups": [{"group_index": 0, "member_element_ids": members}]}, \
            "valid", None
    for _ in range(5):
        yield {"groups": [{"group_index": 0,
                           "member_element_ids": [f"el_r{rng.randint(5, 99)}"]}]}, \
            "invalid", "member_not_child"


GENERATORS = {
    "classification": classification_cases,
    "structure": structure_cases,
    "transcription": transcription_cases,
    "entities": entities_cases,
    "key_value": key_value_cases,
    "grouping": grouping_cases,
}


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_OUT
    rng = random.Random(20260810)
    cases = []
    for mode, generator in GENERATORS.items():
        for payload, verdict, code in generator(rng):
            cases.append({
                "id": f"{mode}-{len(cases):03d}",
                "mode": mode,
                "config": CONFIGS[mode],
                "context": CONTEXTS[mode],
                "payload": payload,
                "verdict": verdict,
                **({"violation_code": code} if code else {}),
            })
    # pad with extra valid classification draws up to the target size
    rng2 = random.Random(616)
    while len(cases) < TARGET_CASES:
        cases.append({
            "id": f"classification-{len(cases):03d}",
            "mode": "classification",
            "config": CONFIGS["classification"],
            "context": CONTEXTS["classification"],
            "payload": {"class_id": rng2.choice(["minutes", "index", "blank"])},
            "verdict": "valid",
        })
    cases = cases[:TARGET_CASES]
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"cases": cases}, indent=1, ensure_ascii=False,
                              sort_keys=True) + "\n", encoding="utf-8")
    valid = sum(1 for c in cases if c["verdict"] == "valid")
    print(f"wrote {len(cases)} cases ({valid} valid, {len(cases) - valid} invalid) "
          f"to {out}")


if __name__ == "__main__":
    main()
