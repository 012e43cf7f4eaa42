"""Orlicz Lab API Application

This module defines the FastAPI application of the Orlicz cohomology lab. It
exposes the Young function calculus, Luxemburg norms of weighted vectors and
the example reproductions, and keeps every reproduction report in a run
ledger.

Application Routes:
- Young function routes
- Orlicz norm routes
- Reproduction routes
- Run ledger routes

Health Check:
- A health check endpoint is provided to verify that the API is running.

Usage:
Run `start.py`; it serves the application with uvicorn on the configured
host and port.
"""
from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse

from src.conf.logging import setup_logging
from src.routes import orlicz, repro, runs, young
from src.services.exceptions import OrliczLabError

setup_logging()

app = FastAPI(
    title="Orlicz Lab",
    description="**Orlicz Lab** computes with L^φ cochains on finite metric measure spaces.\n\n\
        It evaluates Young functions and their conjugates, Luxemburg norms and doubling \
        diagnostics, and reproduces the worked examples: the free group cocycle that is a \
        limit of coboundaries for a non-doubling φ, φ-harmonic functions on the integers, \
        the homotopy identities of the quasi-isometry transfer and more.\n\nEvery \
        reproduction is stored in a run ledger."
)

app.include_router(young.router, prefix='/api')
app.include_router(orlicz.router, prefix='/api')
app.include_router(repro.router, prefix='/api')
app.include_router(runs.router, prefix='/api')


@app.exception_handler(OrliczLabError)
async def lab_error_handler(request: Request, exc: OrliczLabError):
    """Numerical errors are reported as unprocessable input."""
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content={"detail": str(exc)})


@app.get("/", tags=['Healthcheck'])
def read_root():
    """## Healthchecker"""
    return {"message": "Orlicz Lab API is alive"}
