"""Client used by the CLI: in-process by default, HTTP when given a URL.

Both transports expose the same typed methods, and the HTTP side converts
status codes back into the domain exceptions, so callers cannot tell the
difference.
"""

from __future__ import annotations

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

_STATUS_ERRORS = {422: ParameterError, 409: InfeasibleError, 500: NumericalError}


class Client:
    """Dispatches requests either to the local api module or a running service.

    An httpx.Client may be injected (tests route it through an ASGI transport);
    otherwise one is built lazily from base_url on first remote call.
    """

    def __init__(self, base_url: str | None = None, timeout: float = 600.0,
                 http=None):
        self.base_url = base_url.rstrip("/") if base_url else None
        self.timeout = timeout
        self._http = http

    def _http_client(self):
        if self._http is None:
            import httpx

            self._http = httpx.Client(base_url=self.base_url, timeout=self.timeout)
        return self._http

    def _post(self, fn_name: str, path: str, req, response_cls):
        if self.base_url is None and self._http is None:
            from . import api

            return getattr(api, fn_name)(req)
        resp = self._http_client().post(path, json=req.model_dump())
        if resp.status_code in _STATUS_ERRORS:
            detail = resp.json().get("detail", resp.text)
            raise _STATUS_ERRORS[resp.status_code](detail)
        resp.raise_for_status()
        return response_cls.model_validate(resp.json())

    def plan(self, req: PlanRequest) -> PlanResponse:
        return self._post("plan", "/plan", req, PlanResponse)

    def factorize(self, req: FactorizeRequest) -> FactorizeResponse:
        return self._post("factorize", "/factorize", req, FactorizeResponse)

    def simulate(self, req: SimulateRequest) -> SimulateResponse:
        return self._post("simulate", "/simulate", req, SimulateResponse)

    def mp_eval(self, req: MPRequest) -> MPResponse:
        return self._post("mp_eval", "/mp", req, MPResponse)

    def mc(self, req: MCRequest) -> MCResponse:
        return self._post("mc", "/mc", req, MCResponse)

    def tiles(self, req: TilesRequest) -> TilesResponse:
        return self._post("tiles", "/tiles", req, TilesResponse)
