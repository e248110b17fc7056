"""Server side of the shared validation corpus.

The corpus verdicts are known by construction; the client validator is
tested against the same file in frontend/test/validation.spec.ts, so
agreement here plus agreement there gives client/server parity.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from scriptorium.errors import PayloadError
from scriptorium.modes import ElementContext, validate_config, validate_payload

CORPUS_PATH = Path(__file__).resolve().parent.parent / "shared" / "validation_corpus.json"
CASES = json.loads(CORPUS_PATH.read_text(encoding="utf-8"))["cases"]


def context_from(raw: dict) -> ElementContext:
    return ElementContext(
        element_id=raw["element_id"],
        image_width=raw["image_width"],
        image_height=raw["image_height"],
        element_type=raw.get("element_type", ""),
        children=tuple((c[0], c[1]) for c in raw.get("children", [])),
        reference_text=raw.get("reference_text"),
    )


def test_corpus_has_two_hundred_cases_across_all_modes():
    assert len(CASES) == 200
    assert {c["mode"] for c in CASES} == {
        "classification", "structure", "transcription", "entities",
        "key_value", "grouping"}


@pytest.mark.parametrize("case", CASES, ids=lambda c: c["id"])
def test_server_verdict_matches_corpus(case):
    config = validate_config(case["mode"], case["config"])
    context = context_from(case["context"])
    if case["verdict"] == "valid":
        validate_payload(config, context, case["payload"])
    else:
        with pytest.raises(PayloadError) as exc:
            validate_payload(config, context, case["payload"])
        expected = case.get("violation_code")
        if expected:
            codes = {v["code"] for v in exc.value.violations}
            assert expected in codes, f"{case['id']}: {codes}"
