"""Users, projects, role-based memberships, and invitation links.

Roles form a lattice: manager > moderator > contributor.  Every action
allowed to a lower role is allowed to a higher one within the project.
Project creation is restricted to staff accounts; the creator becomes
the project's first manager.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Callable

from .errors import (
    InvalidToken,
    PermissionDenied,
    UnknownProject,
    UnknownUser,
    ValidationError,
)
from .ids import new_id, new_token
from .store import Store, isoformat_utc, parse_utc, utcnow


class Role(str, Enum):
    CONTRIBUTOR = "contributor"
    MODERATOR = "moderator"
    MANAGER = "manager"


ROLE_RANK = {Role.CONTRIBUTOR: 1, Role.MODERATOR: 2, Role.MANAGER: 3}


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


@dataclass
class UserAccount:
    user_id: str
    email: str
    display_name: str
    credential_hash: str  # opaque; never serialized by any read path
    is_staff: bool = False
    created_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "email": self.email,
            "display_name": self.display_name,
            "credential_hash": self.credential_hash,
            "is_staff": self.is_staff,
            "created_at": isoformat_utc(self.created_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "UserAccount":
        return cls(
            user_id=row["user_id"],
            email=row["email"],
            display_name=row["display_name"],
            credential_hash=row["credential_hash"],
            is_staff=bool(row.get("is_staff", False)),
            created_at=parse_utc(row["created_at"]),
        )

    def public_dict(self) -> dict[str, Any]:
        """Serialization safe for API responses: no credential material."""
        return {
            "user_id": self.user_id,
            "email": self.email,
            "display_name": self.display_name,
            "is_staff": self.is_staff,
            "created_at": isoformat_utc(self.created_at),
        }


@dataclass
class Project:
    project_id: str
    name: str
    description: str
    visibility: Visibility
    created_by: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "name": self.name,
            "description": self.description,
            "visibility": self.visibility.value,
            "created_by": self.created_by,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "Project":
        return cls(
            project_id=row["project_id"],
            name=row["name"],
            description=row.get("description", ""),
            visibility=Visibility(row["visibility"]),
            created_by=row["created_by"],
        )


@dataclass
class Membership:
    project_id: str
    user_id: str
    role: Role
    joined_at: datetime = field(default_factory=utcnow)

    @property
    def key(self) -> str:
        return f"{self.project_id}:{self.user_id}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "user_id": self.user_id,
            "role": self.role.value,
            "joined_at": isoformat_utc(self.joined_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "Membership":
        return cls(
            project_id=row["project_id"],
            user_id=row["user_id"],
            role=Role(row["role"]),
            joined_at=parse_utc(row["joined_at"]),
        )


@dataclass
class InvitationLink:
    project_id: str
    token: str
    active: bool = True
    created_at: datetime = field(default_factory=utcnow)

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "token": self.token,
            "active": self.active,
            "created_at": isoformat_utc(self.created_at),
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "InvitationLink":
        return cls(
            project_id=row["project_id"],
            token=row["token"],
            active=bool(row["active"]),
            created_at=parse_utc(row["created_at"]),
        )


USERS = "users"
PROJECTS = "projects"
MEMBERSHIPS = "memberships"
INVITATIONS = "invitations"


class AccountService:
    """Operations over users, projects, memberships, and invitations."""

    def __init__(self, store: Store, clock: Callable[[], datetime] = utcnow):
        self._store = store
        self._clock = clock

    # -- users ----------------------------------------------------------------

    def register_user(self, email: str, display_name: str, credential_hash: str,
                      is_staff: bool = False) -> UserAccount:
        email = email.strip()
        if not email or "@" not in email:
            raise ValidationError("a valid email address is required")
        with self._store.lock:
            for existing in self._store.values(USERS):
                if existing.email.casefold() == email.casefold():
                    raise ValidationError(f"email already registered: {email}")
            user = UserAccount(
                user_id=new_id("usr"),
                email=email,
                display_name=display_name or email.split("@")[0],
                credential_hash=credential_hash,
                is_staff=is_staff,
                created_at=self._clock(),
            )
            return self._store.put(USERS, user.user_id, user)

    def get_user(self, user_id: str) -> UserAccount:
        user = self._store.get(USERS, user_id)
        if user is None:
            raise UnknownUser(user_id)
        return user

    def find_user_by_email(self, email: str) -> UserAccount | None:
        matches = self._store.find(USERS, lambda u: u.email.casefold() == email.casefold())
        return matches[0] if matches else None

    # -- projects ---------------------------------------------------------------

    def create_project(self, actor: str, name: str, visibility: Visibility | str,
                       description: str = "") -> Project:
        user = self.get_user(actor)
        if not user.is_staff:
            raise PermissionDenied("project creation is reserved for staff accounts")
        if not name or not name.strip():
            raise ValidationError("project name must be non-empty")
        visibility = Visibility(visibility)
        with self._store.lock:
            project = Project(
                project_id=new_id("prj"),
                name=name.strip(),
                description=description,
                visibility=visibility,
                created_by=actor,
            )
            self._store.put(PROJECTS, project.project_id, project)
            self._set_role(project.project_id, actor, Role.MANAGER)
            return project

    def get_project(self, project_id: str) -> Project:
        project = self._store.get(PROJECTS, project_id)
        if project is None:
            raise UnknownProject(project_id)
        return project

    def projects_visible_to(self, user_id: str) -> list[Project]:
        with self._store.lock:
            member_of = {
                m.project_id
                for m in self._store.values(MEMBERSHIPS)
                if m.user_id == user_id
            }
            return sorted(
                (
                    p for p in self._store.values(PROJECTS)
                    if p.project_id in member_of or p.visibility is Visibility.PUBLIC
                ),
                key=lambda p: p.project_id,
            )

    # -- memberships ------------------------------------------------------------

    def role_of(self, project_id: str, user_id: str) -> Role | None:
        membership = self._store.get(MEMBERSHIPS, f"{project_id}:{user_id}")
        return membership.role if membership else None

    def has_role(self, project_id: str, user_id: str, minimum: Role) -> bool:
        role = self.role_of(project_id, user_id)
        return role is not None and ROLE_RANK[role] >= ROLE_RANK[minimum]

    def require_role(self, project_id: str, user_id: str, minimum: Role) -> Role:
        role = self.role_of(project_id, user_id)
        if role is None or ROLE_RANK[role] < ROLE_RANK[minimum]:
            raise PermissionDenied(
                f"requires at least {minimum.value} on project {project_id}"
            )
        return role

    def members_of(self, project_id: str) -> list[Membership]:
        self.get_project(project_id)
        members = self._store.find(MEMBERSHIPS, lambda m: m.project_id == project_id)
        return sorted(members, key=lambda m: m.user_id)

    def set_member_role(self, actor: str, project_id: str, target: str,
                        role: Role | str) -> Membership:
        self.get_project(project_id)
        self.require_role(project_id, actor, Role.MANAGER)
        self.get_user(target)
        with self._store.lock:
            return self._set_role(project_id, target, Role(role))

    def _set_role(self, project_id: str, user_id: str, role: Role) -> Membership:
        membership = Membership(
            project_id=project_id, user_id=user_id, role=role, joined_at=self._clock()
        )
        # keyed write replaces any prior role: uniqueness by construction
        return self._store.put(MEMBERSHIPS, membership.key, membership)

    # -- invitations --------------------------------------------------------------

    def rotate_invitation(self, actor: str, project_id: str) -> InvitationLink:
        self.get_project(project_id)
        self.require_role(project_id, actor, Role.MANAGER)
        with self._store.lock:
            for link in self._store.values(INVITATIONS):
                if link.project_id == project_id and link.active:
                    link.active = False
            fresh = InvitationLink(
                project_id=project_id,
                token=new_token(),
                active=True,
                created_at=self._clock(),
            )
            return self._store.put(INVITATIONS, fresh.token, fresh)

    def active_invitation(self, project_id: str) -> InvitationLink | None:
        links = self._store.find(
            INVITATIONS, lambda l: l.project_id == project_id and l.active
        )
        return links[0] if links else None

    def join_via_invitation(self, token: str, user_id: str) -> Membership:
        self.get_user(user_id)
        with self._store.lock:
            link = self._store.get(INVITATIONS, token)
            if link is None or not link.active:
                raise InvalidToken("invitation token is unknown or inactive")
            existing = self._store.get(MEMBERSHIPS, f"{link.project_id}:{user_id}")
            if existing is not None:
                return existing  # idempotent; higher roles preserved
            return self._set_role(link.project_id, user_id, Role.CONTRIBUTOR)

    def join_public_project(self, project_id: str, user_id: str) -> Membership:
        """Self-signup, permitted only on public projects."""
        project = self.get_project(project_id)
        self.get_user(user_id)
        if project.visibility is not Visibility.PUBLIC:
            raise PermissionDenied("self-signup requires a public project")
        with self._store.lock:
            existing = self._store.get(MEMBERSHIPS, f"{project_id}:{user_id}")
            if existing is not None:
                return existing
            return self._set_role(project_id, user_id, Role.CONTRIBUTOR)
