"""HTTP service wrapping the estimators."""

from .app import app, create_app

__all__ = ["app", "create_app"]
