"""Main application package."""

from app.main import app
