from __future__ import annotations

import json

import pytest

from conftest import make_pages
from scriptorium.errors import UnknownCampaign

# ---------------------------------------------------------------------------
# Independent RFC 4180 parser: a hand-written state machine that shares no
# code with the csv module the exporter uses.
# ---------------------------------------------------------------------------


def rfc4180_parse(data: bytes) -> list[list[str]]:
    text = data.decode("utf-8")
    rows: list[list[str]] = []
    row: list[str] = []
    cell: list[str] = []
    in_quotes = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < len(text) and text[i + 1] == '"':
                    cell.append('"')
                    i += 2
                    continue
                in_quotes = False
            else:
                cell.append(ch)
        else:
            if ch == '"':
                in_quotes = True
            elif ch == ",":
                row.append("".join(cell))
                cell = []
            elif ch == "\n":
                row.append("".join(cell))
                rows.append(row)
                row, cell = [], []
            elif ch == "\r":
                pass  # tolerate CRLF even though the exporter emits LF
            else:
                cell.append(ch)
        i += 1
    if cell or row:
        row.append("".join(cell))
        rows.append(row)
    return rows


CLASSES = {"classes": [{"class_id": "minutes", "label": "Minutes"},
                       {"class_id": "index", "label": "Index"}]}


def annotate_all(platform, manager, contributor, campaign, payload_for):
    created = platform.tasks.filter_tasks(campaign.campaign_id, status="draft")
    platform.tasks.publish_tasks(manager.user_id, campaign.campaign_id,
                                 [t.task_id for t in created])
    platform.tasks.update_campaign(manager.user_id, campaign.campaign_id, state="open")
    while True:
        batch = platform.tasks.claim_batch(campaign.campaign_id, contributor.user_id)
        if not batch:
            break
        for task in batch:
            platform.tasks.submit_annotation(task.task_id, contributor.user_id,
                                             payload_for(task))
    return created


@pytest.fixture
def classification_campaign(platform, project, manager, contributor):
    campaign = platform.tasks.create_campaign(
        manager.user_id, project.project_id, "Classify", "classification", CLASSES,
        batch_size=10)
    make_pages(platform, project, 3)
    pages = platform.elements.by_project(project.project_id, "page")
    platform.tasks.create_tasks(campaign.campaign_id, [p.element_id for p in pages])
    annotate_all(platform, manager, contributor, campaign,
                 lambda task: {"class_id": "minutes"})
    return campaign


class TestCsvShape:
    def test_header_and_row_layout(self, platform, classification_campaign):
        rows = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id))
        assert rows[0] == ["task_id", "element_id", "element_name", "image_url",
                           "status", "author", "created_at", "class"]
        assert len(rows) == 1 + 3
        assert all(row[7] == "minutes" for row in rows[1:])
        assert all(len(row) == len(rows[0]) for row in rows)

    def test_empty_campaign_is_header_only(self, platform, project, manager):
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Empty", "classification", CLASSES)
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        assert len(rows) == 1

    def test_unknown_campaign(self, platform):
        with pytest.raises(UnknownCampaign):
            platform.exports.export_csv("cmp_missing")

    def test_rows_sorted_by_element_order_then_task(self, platform,
                                                    classification_campaign):
        rows = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id))
        names = [row[2] for row in rows[1:]]
        assert names == sorted(names)

    def test_statuses_filter(self, platform, project, manager, contributor,
                             moderator, classification_campaign):
        tasks = platform.tasks.filter_tasks(classification_campaign.campaign_id,
                                            status="annotated")
        platform.tasks.moderate(tasks[0].task_id, moderator.user_id, "reject")
        default_rows = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id))
        assert len(default_rows) == 1 + 2  # rejected excluded by default
        with_rejected = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id,
            statuses=["annotated", "validated", "rejected"]))
        assert len(with_rejected) == 1 + 3

    def test_lf_line_endings_no_bom(self, platform, classification_campaign):
        data = platform.exports.export_csv(classification_campaign.campaign_id)
        assert not data.startswith(b"\xef\xbb\xbf")
        assert b"\r\n" not in data
        assert data.endswith(b"\n")


class TestCsvRoundTrip:
    def test_awkward_transcriptions_round_trip(self, platform, project, manager,
                                               contributor):
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Transcribe", "transcription",
            {"granularity": "page_by_page", "target_element_type": "page"},
            batch_size=10)
        make_pages(platform, project, 4)
        pages = platform.elements.by_project(project.project_id, "page")
        platform.tasks.create_tasks(campaign.campaign_id,
                                    [p.element_id for p in pages])
        awkward = {
            pages[0].element_id: 'comma, inside',
            pages[1].element_id: 'quote " inside',
            pages[2].element_id: 'line\nbreak "and, more"',
            pages[3].element_id: '  leading and trailing  ',
        }
        annotate_all(
            platform, manager, contributor, campaign,
            lambda task: {"texts": [{"element_id": task.element_id,
                                     "text": awkward[task.element_id]}]})
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        exported_texts = {row[1]: row[7] for row in rows[1:]}
        assert exported_texts == awkward

    def test_every_cell_reproduced_exactly(self, platform, project, manager,
                                           contributor):
        fields = [
            {"field_id": "surname", "label": "Surname", "datatype": "text",
             "required": True},
            {"field_id": "birth_year", "label": "Birth year", "datatype": "integer"},
        ]
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Index", "key_value",
            {"fields": fields}, batch_size=10)
        make_pages(platform, project, 1)
        pages = platform.elements.by_project(project.project_id, "page")
        platform.tasks.create_tasks(campaign.campaign_id, [pages[0].element_id])
        annotate_all(platform, manager, contributor, campaign,
                     lambda task: {"values": {"surname": 'Du"pont, André',
                                              "birth_year": "1898"}})
        data = platform.exports.export_csv(campaign.campaign_id)
        rows = rfc4180_parse(data)
        assert rows[0][-2:] == ["surname", "birth_year"]
        assert rows[1][-2:] == ['Du"pont, André', "1898"]


class TestMultiRowModes:
    def test_entities_one_row_per_span_with_surface_text(
            self, platform, project, manager, contributor):
        # transcription first: provides the reference text for spans
        make_pages(platform, project, 1)
        page = platform.elements.by_project(project.project_id, "page")[0]
        transcription = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "T", "transcription",
            {"granularity": "page_by_page", "target_element_type": "page"},
            batch_size=5)
        platform.tasks.create_tasks(transcription.campaign_id, [page.element_id])
        annotate_all(platform, manager, contributor, transcription,
                     lambda task: {"texts": [{"element_id": page.element_id,
                                              "text": "Jean Dupont, Paris"}]})

        entities = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "E", "entities",
            {"entity_types": [
                {"type_id": "person", "label": "Person", "color": "#1f77b4"},
                {"type_id": "place", "label": "Place", "color": "#2ca02c"}]},
            batch_size=5)
        platform.tasks.create_tasks(entities.campaign_id, [page.element_id])
        annotate_all(
            platform, manager, contributor, entities,
            lambda task: {"spans": [
                {"offset": 0, "length": 11, "type_id": "person"},
                {"offset": 13, "length": 5, "type_id": "place"}]})

        rows = rfc4180_parse(platform.exports.export_csv(entities.campaign_id))
        assert rows[0][-4:] == ["offset", "length", "type", "surface_text"]
        assert len(rows) == 1 + 2
        assert rows[1][-4:] == ["0", "11", "person", "Jean Dupont"]
        assert rows[2][-4:] == ["13", "5", "place", "Paris"]

    def test_structure_one_row_per_zone_with_encoded_polygon(
            self, platform, project, manager, contributor):
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "S", "structure",
            {"zone_types": [{"type_id": "header", "label": "H"},
                            {"type_id": "body", "label": "B"}]},
            batch_size=5)
        make_pages(platform, project, 1)
        page = platform.elements.by_project(project.project_id, "page")[0]
        platform.tasks.create_tasks(campaign.campaign_id, [page.element_id])
        annotate_all(
            platform, manager, contributor, campaign,
            lambda task: {"zones": [
                {"polygon": [[0, 0], [100, 0], [100, 40], [0, 40]],
                 "type_id": "header"},
                {"polygon": [[0, 50], [100, 50], [50, 90]], "type_id": "body"}]})
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        assert len(rows) == 1 + 2
        assert rows[1][-2:] == ["header", "0,0;100,0;100,40;0,40"]
        assert rows[2][-2:] == ["body", "0,50;100,50;50,90"]

    def test_grouping_one_row_per_member(self, platform, project, manager,
                                         contributor):
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "G", "grouping",
            {"group_label": "household", "child_element_type": "row"},
            batch_size=5)
        make_pages(platform, project, 1, rows_per_page=3)
        page = platform.elements.by_project(project.project_id, "page")[0]
        children = platform.elements.children_of(page.element_id, "row")
        platform.tasks.create_tasks(campaign.campaign_id, [page.element_id])
        annotate_all(
            platform, manager, contributor, campaign,
            lambda task: {"groups": [
                {"group_index": 0,
                 "member_element_ids": [children[0].element_id,
                                        children[1].element_id]},
                {"group_index": 1,
                 "member_element_ids": [children[2].element_id]}]})
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        assert len(rows) == 1 + 3
        assert [row[-2] for row in rows[1:]] == ["0", "0", "1"]

    def test_row_count_law(self, platform, project, manager, contributor):
        # multi-row mode: data rows == sum of payload items over live annotations
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "S", "structure",
            {"zone_types": [{"type_id": "z", "label": "Z"}]},
            batch_size=10)
        make_pages(platform, project, 3)
        pages = platform.elements.by_project(project.project_id, "page")
        platform.tasks.create_tasks(campaign.campaign_id,
                                    [p.element_id for p in pages])
        zone_counts = {pages[0].element_id: 0, pages[1].element_id: 2,
                       pages[2].element_id: 3}
        annotate_all(
            platform, manager, contributor, campaign,
            lambda task: {"zones": [
                {"polygon": [[0, 10 * i], [50, 10 * i], [25, 10 * i + 8]],
                 "type_id": "z"}
                for i in range(zone_counts[task.element_id])]})
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        assert len(rows) - 1 == sum(zone_counts.values())


class TestIncludeSuperseded:
    def test_superseded_rows_on_request(self, platform, project, manager,
                                        contributor, classification_campaign):
        task = platform.tasks.filter_tasks(classification_campaign.campaign_id,
                                           status="annotated")[0]
        platform.tasks.revise_annotation(task.task_id, contributor.user_id,
                                         {"class_id": "index"})
        live_only = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id))
        assert len(live_only) == 1 + 3
        everything = rfc4180_parse(platform.exports.export_csv(
            classification_campaign.campaign_id, include_superseded=True))
        assert len(everything) == 1 + 4


class TestJsonExport:
    def test_shape_and_revalidation(self, platform, classification_campaign):
        from scriptorium.modes import ElementContext, validate_config, validate_payload

        document = platform.exports.export_json(classification_campaign.campaign_id)
        assert document["campaign"]["mode"] == "classification"
        assert len(document["tasks"]) == 3
        config = validate_config(document["campaign"]["mode"],
                                 document["campaign"]["config"])
        for entry in document["tasks"]:
            element = entry["element"]
            context = ElementContext(
                element_id=element["element_id"],
                image_width=element["image"]["width"],
                image_height=element["image"]["height"],
                element_type=element["element_type"],
            )
            for annotation in entry["annotations"]:
                validate_payload(config, context, annotation["payload"])

    def test_dup_group_siblings_share_element(self, platform, project, manager,
                                              contributor, second_contributor):
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Dup", "classification", CLASSES,
            batch_size=5, duplication_factor=2, duplication_fraction=1.0)
        make_pages(platform, project, 1)
        page = platform.elements.by_project(project.project_id, "page")[0]
        created = platform.tasks.create_tasks(campaign.campaign_id, [page.element_id])
        platform.tasks.publish_tasks(manager.user_id, campaign.campaign_id,
                                     [t.task_id for t in created])
        platform.tasks.update_campaign(manager.user_id, campaign.campaign_id,
                                       state="open")
        for user in (contributor, second_contributor):
            for task in platform.tasks.claim_batch(campaign.campaign_id, user.user_id):
                platform.tasks.submit_annotation(task.task_id, user.user_id,
                                                 {"class_id": "minutes"})
        document = platform.exports.export_json(campaign.campaign_id)
        assert len(document["tasks"]) == 2
        assert len({t["task"]["element_id"] for t in document["tasks"]}) == 1

    def test_supersession_links_present(self, platform, contributor,
                                        classification_campaign):
        task = platform.tasks.filter_tasks(classification_campaign.campaign_id,
                                           status="annotated")[0]
        revision = platform.tasks.revise_annotation(task.task_id, contributor.user_id,
                                                    {"class_id": "index"})
        document = platform.exports.export_json(classification_campaign.campaign_id)
        entry = next(t for t in document["tasks"]
                     if t["task"]["task_id"] == task.task_id)
        assert len(entry["annotations"]) == 2
        first, second = entry["annotations"]
        assert first["superseded_by"] == revision.annotation_id
        assert second["superseded_by"] is None

    def test_export_is_a_fixpoint(self, platform, classification_campaign):
        first = platform.exports.export_json_bytes(classification_campaign.campaign_id)
        second = platform.exports.export_json_bytes(classification_campaign.campaign_id)
        assert first == second
        json.loads(first)  # well-formed

    def test_field_id_colliding_with_base_column_is_renamed(self, platform, project,
                                                            manager, contributor):
        fields = {"fields": [
            {"field_id": "status", "label": "Status", "datatype": "text"},
            {"field_id": "surname", "label": "Surname", "datatype": "text"},
        ]}
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Collide", "key_value", fields,
            batch_size=5)
        make_pages(platform, project, 1)
        page = platform.elements.by_project(project.project_id, "page")[0]
        platform.tasks.create_tasks(campaign.campaign_id, [page.element_id])
        annotate_all(platform, manager, contributor, campaign,
                     lambda task: {"values": {"status": "present",
                                              "surname": "Dupont"}})
        rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        header = rows[0]
        assert len(set(header)) == len(header)
        assert header[-2:] == ["field_status", "surname"]
        assert rows[1][-2:] == ["present", "Dupont"]

    def test_scale_export_one_task_entry_per_row(self, platform, project, manager,
                                                 contributor):
        # record-index scale check at 1/100 of the production corpus: 338
        # annotated rows export as exactly 338 task entries
        fields = {"fields": [{"field_id": "name", "label": "Name",
                              "datatype": "text"}]}
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, "Scale", "key_value", fields,
            batch_size=50)
        make_pages(platform, project, 43, rows_per_page=8)  # 344 rows
        rows = platform.elements.by_project(project.project_id, "row")[:338]
        platform.tasks.create_tasks(campaign.campaign_id,
                                    [r.element_id for r in rows])
        annotate_all(platform, manager, contributor, campaign,
                     lambda task: {"values": {"name": task.element_id}})
        document = platform.exports.export_json(campaign.campaign_id)
        assert len(document["tasks"]) == 338
        csv_rows = rfc4180_parse(platform.exports.export_csv(campaign.campaign_id))
        assert len(csv_rows) - 1 == 338
