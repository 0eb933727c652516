"""HTTP face of the package: one route per command, shared with the CLI.

Domain errors map onto status codes the same way the CLI maps them onto exit
codes: validation problems are 422, infeasible requests 409, numerical
failures 500.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import api
from .core import InfeasibleError, NumericalError, ParameterError
from .models import (
    FactorizeRequest,
    FactorizeResponse,
    MCRequest,
    MCResponse,
    MPRequest,
    MPResponse,
    PlanRequest,
    PlanResponse,
    SimulateRequest,
    SimulateResponse,
    TilesRequest,
    TilesResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="tessfact", version="0.1.0")

    @app.exception_handler(ParameterError)
    def _parameter_error(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(InfeasibleError)
    def _infeasible_error(request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(NumericalError)
    def _numerical_error(request, exc):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/plan", response_model=PlanResponse)
    def plan(req: PlanRequest):
        return api.plan(req)

    @app.post("/factorize", response_model=FactorizeResponse)
    def factorize(req: FactorizeRequest):
        return api.factorize(req)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        return api.simulate(req)

    @app.post("/mp", response_model=MPResponse)
    def mp(req: MPRequest):
        return api.mp_eval(req)

    @app.post("/mc", response_model=MCResponse)
    def mc(req: MCRequest):
        return api.mc(req)

    @app.post("/tiles", response_model=TilesResponse)
    def tiles(req: TilesRequest):
        return api.tiles(req)

    return app
