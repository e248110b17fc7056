from .config import ServiceConfig
from .http import create_app

__all__ = ["ServiceConfig", "create_app"]
