"""Exception hierarchy shared by every subsystem.

Each error maps to exactly one HTTP status in the service layer; the
mapping table lives in ``scriptorium.service.http``.
"""

from __future__ import annotations

from typing import Any


class ScriptoriumError(Exception):
    """Base class for all platform errors."""


class PermissionDenied(ScriptoriumError):
    """Actor's role is below the operation's declared minimum."""


class ValidationError(ScriptoriumError):
    """Malformed input outside the payload/config validators."""


class UnknownUser(ScriptoriumError):
    pass


class UnknownProject(ScriptoriumError):
    pass


class UnknownElement(ScriptoriumError):
    pass


class UnknownParent(ScriptoriumError):
    pass


class UnknownCampaign(ScriptoriumError):
    pass


class UnknownTask(ScriptoriumError):
    pass


class UnknownJob(ScriptoriumError):
    pass


class InvalidToken(ScriptoriumError):
    """Invitation token missing, inactive, or rotated away."""


class GeometryError(ScriptoriumError):
    """Polygon out of image bounds or degenerate."""


class CycleError(ScriptoriumError):
    """Parent link would make the element hierarchy cyclic."""


class ConfigError(ScriptoriumError):
    """Campaign mode configuration violates its schema.

    Carries the first violated rule only; callers fix and retry.
    """


class PayloadError(ScriptoriumError):
    """Annotation payload rejected; carries a machine-readable violation list.

    Each violation is ``{"code": str, "detail": str}``.
    """

    def __init__(self, violations: list[dict[str, Any]]):
        self.violations = violations
        first = violations[0]["detail"] if violations else "invalid payload"
        super().__init__(first)


class UnknownMember(ScriptoriumError):
    """Grouping member id outside the eligible child set."""


class CampaignClosed(ScriptoriumError):
    pass


class IllegalTransition(ScriptoriumError):
    """Task status does not admit the requested transition."""


class NotAssignee(ScriptoriumError):
    pass


class NotAuthorized(ScriptoriumError):
    """User is neither the original author nor a moderator."""


class EmptyComment(ScriptoriumError):
    pass


class RegionError(ScriptoriumError):
    """IIIF region invalid for the target image."""


class ManifestError(ScriptoriumError):
    """IIIF Presentation document unparseable or missing required data."""


class LengthMismatch(ScriptoriumError):
    """Paired label vectors have different lengths."""


class DegenerateAgreement(ScriptoriumError):
    """Chance agreement is 1 so kappa is undefined; observed agreement attached."""

    def __init__(self, observed: float):
        self.observed = observed
        super().__init__(f"chance agreement is 1.0 (observed={observed})")


class StorageUnavailable(ScriptoriumError):
    pass
