"""Collaborative annotation platform for digitised document images.

Managers configure campaigns in one of six annotation modes, contributors
claim and complete tasks against IIIF-hosted images, moderators validate
the results, and the platform exports training data and inter-annotator
agreement statistics.
"""

from .core import Platform

__version__ = "0.1.0"

__all__ = ["Platform", "__version__"]
