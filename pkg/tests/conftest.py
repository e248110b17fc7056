from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from scriptorium import Platform
from scriptorium.elements import ImageRef
from scriptorium.store import Store


class FakeClock:
    """Deterministic clock that advances one second per call."""

    def __init__(self, start: datetime | None = None, step_seconds: float = 1.0):
        self.now = start or datetime(2026, 3, 1, 12, 0, 0, tzinfo=timezone.utc)
        self.step = timedelta(seconds=step_seconds)

    def __call__(self) -> datetime:
        current = self.now
        self.now = self.now + self.step
        return current

    def advance(self, seconds: float) -> None:
        self.now = self.now + timedelta(seconds=seconds)


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def platform(clock) -> Platform:
    return Platform(store=Store(), clock=clock, rng=random.Random(20260301))


@pytest.fixture
def staff(platform):
    return platform.accounts.register_user(
        "staff@example.org", "Staff", "hash-staff", is_staff=True)


@pytest.fixture
def project(platform, staff):
    return platform.accounts.create_project(staff.user_id, "Council registers", "private")


@pytest.fixture
def manager(platform, staff, project):
    user = platform.accounts.register_user("manager@example.org", "Manager", "hash-m")
    platform.accounts.set_member_role(staff.user_id, project.project_id,
                                      user.user_id, "manager")
    return user


@pytest.fixture
def moderator(platform, staff, project):
    user = platform.accounts.register_user("moderator@example.org", "Moderator", "hash-mod")
    platform.accounts.set_member_role(staff.user_id, project.project_id,
                                      user.user_id, "moderator")
    return user


@pytest.fixture
def contributor(platform, staff, project):
    user = platform.accounts.register_user("contrib@example.org", "Contributor", "hash-c")
    platform.accounts.set_member_role(staff.user_id, project.project_id,
                                      user.user_id, "contributor")
    return user


@pytest.fixture
def second_contributor(platform, staff, project):
    user = platform.accounts.register_user("contrib2@example.org", "Contributor 2", "hash-c2")
    platform.accounts.set_member_role(staff.user_id, project.project_id,
                                      user.user_id, "contributor")
    return user


@pytest.fixture
def page_image() -> ImageRef:
    return ImageRef("https://iiif.example.org/reg/p1", 1000, 800)


@pytest.fixture
def page(platform, project, page_image):
    return platform.elements.create_element(
        project.project_id, "page", page_image,
        [(0, 0), (1000, 0), (1000, 800), (0, 800)],
        order_index=0, name="page 1",
    )


def make_pages(platform, project, count: int, rows_per_page: int = 0,
               width: int = 1000, height: int = 800):
    """Seed `count` pages (optionally with row children); returns (pages, rows)."""
    pages, rows = [], []
    for i in range(count):
        image = ImageRef(f"https://iiif.example.org/reg/p{i:04d}", width, height)
        page = platform.elements.create_element(
            platform_project_id(project), "page", image,
            [(0, 0), (width, 0), (width, height), (0, height)],
            order_index=i, name=f"page {i}", element_id=f"el_page_{i:04d}",
        )
        pages.append(page)
        row_height = max(1, height // max(1, rows_per_page + 1))
        for j in range(rows_per_page):
            top = min(height - 1, j * row_height)
            bottom = min(height, top + row_height)
            row = platform.elements.create_element(
                platform_project_id(project), "row", image,
                [(0, top), (width, top), (width, bottom), (0, bottom)],
                parent=page.element_id, order_index=j,
                name=f"page {i} row {j}", element_id=f"el_row_{i:04d}_{j:02d}",
            )
            rows.append(row)
    return pages, rows


def platform_project_id(project) -> str:
    return project if isinstance(project, str) else project.project_id
