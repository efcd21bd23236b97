"""API Routers package."""

from app.api.routers.trials import router as trials_router
