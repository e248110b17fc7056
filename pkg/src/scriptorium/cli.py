"""Command-line entry points: serve, seed demo data, create users, export."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .core import Platform
from .elements import ImageRef
from .service.auth import hash_password
from .service.config import ServiceConfig
from .service.http import create_app
from .tasks import CampaignState


@click.group()
def main() -> None:
    """Collaborative document-image annotation platform."""


def _platform(storage: str | None) -> Platform:
    return Platform.open(storage)


@main.command()
@click.option("--host", default=None, help="Listen address (default from env or 127.0.0.1).")
@click.option("--port", default=None, type=int, help="Listen port (default 8070).")
@click.option("--storage", default=None, help="JSON store file; loaded on start, saved on exit.")
@click.option("--seed-demo", is_flag=True, help="Seed demo users and a demo project first.")
def serve(host: str | None, port: int | None, storage: str | None, seed_demo: bool) -> None:
    """Run the HTTP API with the background job worker."""
    import uvicorn

    config = ServiceConfig.from_env()
    if host:
        config.host = host
    if port:
        config.port = port
    if storage:
        config.storage_path = storage

    platform = _platform(config.storage_path)
    if seed_demo:
        seed_demo_data(platform)
    app = create_app(platform, config)
    app.state.jobs.start()
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    finally:
        app.state.jobs.stop()
        if config.storage_path:
            platform.save(config.storage_path)


@main.command("create-user")
@click.option("--storage", required=True)
@click.option("--email", required=True)
@click.option("--name", "display_name", default="")
@click.option("--password", required=True)
@click.option("--staff", is_flag=True)
def create_user(storage: str, email: str, display_name: str,
                password: str, staff: bool) -> None:
    """Create an account directly in a storage file."""
    platform = _platform(storage)
    user = platform.accounts.register_user(
        email, display_name, hash_password(password), is_staff=staff)
    platform.save(storage)
    click.echo(f"created {user.user_id} ({user.email})")


@main.command()
@click.option("--storage", required=True)
@click.option("--campaign", "campaign_id", required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output file; stdout when omitted.")
def export(storage: str, campaign_id: str, fmt: str, out: str | None) -> None:
    """Export a campaign to CSV or JSON."""
    platform = _platform(storage)
    if fmt == "csv":
        data = platform.exports.export_csv(campaign_id)
    else:
        data = platform.exports.export_json_bytes(campaign_id)
    if out:
        Path(out).write_bytes(data)
        click.echo(f"wrote {len(data)} bytes to {out}")
    else:
        sys.stdout.buffer.write(data)


@main.command("ingest-manifest")
@click.option("--storage", required=True)
@click.option("--project", "project_id", required=True)
@click.option("--page-type", default="page")
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False))
def ingest_manifest_cmd(storage: str, project_id: str, page_type: str,
                        manifest_file: str) -> None:
    """Ingest a IIIF Presentation manifest file into page elements."""
    from .iiif import ingest_manifest

    platform = _platform(storage)
    document = json.loads(Path(manifest_file).read_text(encoding="utf-8"))
    created = ingest_manifest(platform.elements, document, project_id, page_type)
    platform.save(storage)
    click.echo(f"created {len(created)} page elements")


def seed_demo_data(platform: Platform, page_count: int = 12) -> dict[str, str]:
    """A small public project with one campaign per mode, ready to claim.

    Returns ids of the seeded records; idempotent per fresh store only.
    """
    accounts = platform.accounts
    manager = accounts.register_user("manager@example.org", "Morgan Manager",
                                     hash_password("manager"), is_staff=True)
    moderator = accounts.register_user("moderator@example.org", "Mo Moderator",
                                       hash_password("moderator"))
    contributor = accounts.register_user("contributor@example.org", "Charlie Contributor",
                                         hash_password("contributor"))
    project = accounts.create_project(manager.user_id, "Demo registers", "public",
                                      "Seeded demo project")
    accounts.set_member_role(manager.user_id, project.project_id,
                             moderator.user_id, "moderator")
    accounts.set_member_role(manager.user_id, project.project_id,
                             contributor.user_id, "contributor")

    pages = []
    rows_by_page: dict[str, list[str]] = {}
    for i in range(page_count):
        image = ImageRef(f"https://iiif.example.org/demo/p{i}", 2000, 2800)
        page = platform.elements.create_element(
            project.project_id, "page", image,
            [(0, 0), (2000, 0), (2000, 2800), (0, 2800)],
            order_index=i, name=f"page {i + 1}",
        )
        pages.append(page)
        rows = []
        for j in range(4):
            row = platform.elements.create_element(
                project.project_id, "row", image,
                [(100, 200 + 600 * j), (1900, 200 + 600 * j),
                 (1900, 700 + 600 * j), (100, 700 + 600 * j)],
                parent=page.element_id, order_index=j,
                name=f"page {i + 1} row {j + 1}",
            )
            rows.append(row.element_id)
        rows_by_page[page.element_id] = rows

    page_ids = [p.element_id for p in pages]
    mode_setups = [
        ("Classify pages", "classification",
         {"classes": [{"class_id": "minutes", "label": "Minutes"},
                      {"class_id": "index", "label": "Index"},
                      {"class_id": "blank", "label": "Blank"}]}, page_ids),
        ("Mark zones", "structure",
         {"zone_types": [{"type_id": "header", "label": "Header"},
                         {"type_id": "body", "label": "Body"},
                         {"type_id": "margin", "label": "Margin"}]}, page_ids),
        ("Transcribe rows", "transcription",
         {"granularity": "line_by_line", "target_element_type": "row"}, page_ids),
        ("Tag entities", "entities",
         {"entity_types": [{"type_id": "person", "label": "Person", "color": "#1f77b4"},
                           {"type_id": "place", "label": "Place", "color": "#2ca02c"}]},
         page_ids),
        ("Index records", "key_value",
         {"fields": [{"field_id": "surname", "label": "Surname",
                      "datatype": "text", "required": True},
                     {"field_id": "birth_year", "label": "Birth year",
                      "datatype": "integer", "required": False},
                     {"field_id": "status", "label": "Status", "datatype": "choice",
                      "required": False, "choices": ["present", "absent"]}]},
         [r for rows in rows_by_page.values() for r in rows]),
        ("Group households", "grouping",
         {"group_label": "household", "child_element_type": "row"}, page_ids),
    ]

    # a completed page-level transcription supplies the reference text that
    # entity-span tasks index into (transcribe first, then tag)
    seed_transcription = platform.tasks.create_campaign(
        manager.user_id, project.project_id, "Seed page transcriptions",
        "transcription",
        {"granularity": "page_by_page", "target_element_type": "page"},
        guide="Bootstrap campaign providing page texts.", batch_size=10,
    )
    seed_tasks = platform.tasks.create_tasks(seed_transcription.campaign_id, page_ids)
    platform.tasks.publish_tasks(manager.user_id, seed_transcription.campaign_id,
                                 [t.task_id for t in seed_tasks])
    platform.tasks.update_campaign(manager.user_id, seed_transcription.campaign_id,
                                   state=CampaignState.OPEN)
    page_texts = {
        page.element_id: (
            f"Jean Dupont, né en {1880 + i}, rue des Archives {i + 1}, Paris. "
            f"Marie Martin, née en {1885 + i}, Lyon."
        )
        for i, page in enumerate(pages)
    }
    while True:
        batch = platform.tasks.claim_batch(seed_transcription.campaign_id,
                                           manager.user_id)
        if not batch:
            break
        for task in batch:
            platform.tasks.submit_annotation(
                task.task_id, manager.user_id,
                {"texts": [{"element_id": task.element_id,
                            "text": page_texts[task.element_id]}]})
    platform.tasks.update_campaign(manager.user_id, seed_transcription.campaign_id,
                                   state=CampaignState.CLOSED)

    campaign_ids = {}
    for name, mode, config, element_ids in mode_setups:
        campaign = platform.tasks.create_campaign(
            manager.user_id, project.project_id, name, mode, config,
            guide=f"How to work through the '{name}' campaign.", batch_size=2,
        )
        prefills = None
        if mode == "key_value":
            # model predictions for the form, served as initial field values
            prefills = {
                element_id: {"values": {"surname": f"Prediction {i + 1}",
                                        "birth_year": str(1880 + i),
                                        "status": "present"}}
                for i, element_id in enumerate(element_ids)
            }
        created = platform.tasks.create_tasks(campaign.campaign_id, element_ids,
                                              prefills)
        platform.tasks.publish_tasks(manager.user_id, campaign.campaign_id,
                                     [t.task_id for t in created])
        platform.tasks.update_campaign(manager.user_id, campaign.campaign_id,
                                       state=CampaignState.OPEN)
        campaign_ids[mode] = campaign.campaign_id

    return {
        "project_id": project.project_id,
        "manager_id": manager.user_id,
        "moderator_id": moderator.user_id,
        "contributor_id": contributor.user_id,
        **campaign_ids,
    }


if __name__ == "__main__":
    main()
