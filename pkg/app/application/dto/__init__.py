"""DTOs package."""
