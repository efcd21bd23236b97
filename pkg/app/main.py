"""
Main FastAPI application - set reconciliation sessions and benchmark trials.
"""

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from app.api.routers import trials
from app.domain.value_objects import PROTOCOL_VERSION

app = FastAPI(
    title="CS-IBLT Reconciliation API",
    description="""
## Set reconciliation with compressed-sensing-encoded IBLTs

- **Negotiate**: table length and seeds for a session between two hosts
- **Trials**: run CS-IBLT or a baseline (iblt-guess, iblt-oracle, naive, bloom)
  on a generated instance and report its communication cost

Costs are counted in 64-bit scalars sent from host A to host B.
    """,
    version="0.1.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(trials.router)


@app.get("/")
def root():
    return {
        "name": "CS-IBLT Reconciliation API",
        "version": "0.1.0",
        "protocol_version": PROTOCOL_VERSION,
        "docs": "/docs",
    }


@app.get("/health")
def health_check():
    """Health check endpoint."""
    return {"status": "healthy"}


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError):
    """Handle domain validation errors."""
    return JSONResponse(
        status_code=400,
        content={"detail": str(exc), "error": type(exc).__name__}
    )


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="127.0.0.1", port=8000)
