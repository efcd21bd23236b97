"""API layer - FastAPI endpoints."""

from app.api.routers import trials_router
