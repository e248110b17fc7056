from __future__ import annotations

import pytest

from scriptorium.accounts import ROLE_RANK, Role, Visibility
from scriptorium.errors import InvalidToken, PermissionDenied, UnknownUser, ValidationError


def memberships_for(platform, project_id, user_id):
    return platform.store.find(
        "memberships",
        lambda m: m.project_id == project_id and m.user_id == user_id,
    )


class TestCreateProject:
    def test_staff_creates_project_and_becomes_manager(self, platform, staff):
        project = platform.accounts.create_project(
            staff.user_id, "Municipal registers", "public")
        assert project.name == "Municipal registers"
        assert project.visibility is Visibility.PUBLIC
        assert platform.accounts.role_of(project.project_id, staff.user_id) is Role.MANAGER

    def test_non_staff_is_rejected(self, platform):
        user = platform.accounts.register_user("u@example.org", "U", "h")
        with pytest.raises(PermissionDenied):
            platform.accounts.create_project(user.user_id, "X", "private")

    def test_empty_name_is_rejected(self, platform, staff):
        with pytest.raises(ValidationError):
            platform.accounts.create_project(staff.user_id, "", "public")
        with pytest.raises(ValidationError):
            platform.accounts.create_project(staff.user_id, "   ", "public")


class TestRegisterUser:
    def test_email_unique_case_insensitive(self, platform):
        platform.accounts.register_user("Ada@Example.org", "Ada", "h1")
        with pytest.raises(ValidationError):
            platform.accounts.register_user("ada@example.org", "Ada 2", "h2")

    def test_rejects_garbage_email(self, platform):
        with pytest.raises(ValidationError):
            platform.accounts.register_user("not-an-email", "X", "h")


class TestSetMemberRole:
    def test_manager_assigns_moderator(self, platform, project, staff):
        user = platform.accounts.register_user("m@example.org", "M", "h")
        membership = platform.accounts.set_member_role(
            staff.user_id, project.project_id, user.user_id, "moderator")
        assert membership.role is Role.MODERATOR

    def test_contributor_cannot_assign_roles(self, platform, project, staff, contributor):
        target = platform.accounts.register_user("t@example.org", "T", "h")
        with pytest.raises(PermissionDenied):
            platform.accounts.set_member_role(
                contributor.user_id, project.project_id, target.user_id, "manager")

    def test_role_change_replaces_membership(self, platform, project, staff, contributor):
        platform.accounts.set_member_role(
            staff.user_id, project.project_id, contributor.user_id, "manager")
        rows = memberships_for(platform, project.project_id, contributor.user_id)
        assert len(rows) == 1
        assert rows[0].role is Role.MANAGER

    def test_unknown_target_user(self, platform, project, staff):
        with pytest.raises(UnknownUser):
            platform.accounts.set_member_role(
                staff.user_id, project.project_id, "usr_missing", "contributor")


class TestInvitations:
    def test_first_rotation_creates_one_active_link(self, platform, project, staff):
        link = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        assert link.active
        active = [l for l in platform.store.values("invitations")
                  if l.project_id == project.project_id and l.active]
        assert len(active) == 1

    def test_rotation_deactivates_previous_token(self, platform, project, staff):
        first = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        second = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        assert first.token != second.token
        assert not platform.store.get("invitations", first.token).active
        assert platform.store.get("invitations", second.token).active

    def test_join_with_rotated_token_is_rejected(self, platform, project, staff):
        old = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        user = platform.accounts.register_user("late@example.org", "Late", "h")
        with pytest.raises(InvalidToken):
            platform.accounts.join_via_invitation(old.token, user.user_id)
        assert memberships_for(platform, project.project_id, user.user_id) == []

    def test_join_grants_contributor(self, platform, project, staff):
        link = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        user = platform.accounts.register_user("new@example.org", "New", "h")
        membership = platform.accounts.join_via_invitation(link.token, user.user_id)
        assert membership.role is Role.CONTRIBUTOR

    def test_join_is_idempotent_and_preserves_higher_role(
            self, platform, project, staff, moderator):
        link = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
        before = memberships_for(platform, project.project_id, moderator.user_id)
        membership = platform.accounts.join_via_invitation(link.token, moderator.user_id)
        after = memberships_for(platform, project.project_id, moderator.user_id)
        assert membership.role is Role.MODERATOR
        assert len(after) == 1
        assert after[0].joined_at == before[0].joined_at

    def test_rotation_requires_manager(self, platform, project, contributor):
        with pytest.raises(PermissionDenied):
            platform.accounts.rotate_invitation(contributor.user_id, project.project_id)

    def test_at_most_one_active_link_through_any_sequence(self, platform, project, staff):
        user = platform.accounts.register_user("seq@example.org", "Seq", "h")
        for i in range(6):
            link = platform.accounts.rotate_invitation(staff.user_id, project.project_id)
            if i % 2:
                platform.accounts.join_via_invitation(link.token, user.user_id)
            active = [l for l in platform.store.values("invitations")
                      if l.project_id == project.project_id and l.active]
            assert len(active) == 1

    def test_tokens_never_reused(self, platform, project, staff):
        tokens = {platform.accounts.rotate_invitation(staff.user_id, project.project_id).token
                  for _ in range(20)}
        assert len(tokens) == 20


class TestPublicProjects:
    def test_self_signup_on_public_project(self, platform, staff):
        project = platform.accounts.create_project(staff.user_id, "Open", "public")
        user = platform.accounts.register_user("vol@example.org", "Vol", "h")
        membership = platform.accounts.join_public_project(project.project_id, user.user_id)
        assert membership.role is Role.CONTRIBUTOR

    def test_self_signup_rejected_on_private_project(self, platform, project):
        user = platform.accounts.register_user("vol2@example.org", "Vol", "h")
        with pytest.raises(PermissionDenied):
            platform.accounts.join_public_project(project.project_id, user.user_id)


class TestRoleLattice:
    def test_higher_role_passes_every_lower_gate(self, platform, project, staff):
        users = {}
        for role in Role:
            user = platform.accounts.register_user(
                f"{role.value}@lattice.org", role.value, "h")
            platform.accounts.set_member_role(
                staff.user_id, project.project_id, user.user_id, role)
            users[role] = user
        for held in Role:
            for needed in Role:
                allowed = ROLE_RANK[held] >= ROLE_RANK[needed]
                if allowed:
                    platform.accounts.require_role(
                        project.project_id, users[held].user_id, needed)
                else:
                    with pytest.raises(PermissionDenied):
                        platform.accounts.require_role(
                            project.project_id, users[held].user_id, needed)

    def test_non_member_fails_every_gate(self, platform, project):
        outsider = platform.accounts.register_user("out@example.org", "Out", "h")
        for needed in Role:
            with pytest.raises(PermissionDenied):
                platform.accounts.require_role(
                    project.project_id, outsider.user_id, needed)
