"""Request/response handlers shared by the HTTP service and the local client.

Every function takes a pydantic request model and returns a response model;
domain exceptions (ParameterError, InfeasibleError, NumericalError) propagate
to the caller, which maps them to exit codes or HTTP statuses.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import capacity
from .core import FactorPair, ParameterError, SchemeParams
from .factorization import factorize_lossless, factorize_lossy
from .models import (
    FactorizeRequest,
    FactorizeResponse,
    MCRequest,
    MCResponse,
    MCRow,
    MPRequest,
    MPResponse,
    ParamsModel,
    PlanRequest,
    PlanResponse,
    SimulateRequest,
    SimulateResponse,
    TileRecord,
    TilesRequest,
    TilesResponse,
    TradeoffModel,
)
from .protocol import measure_costs, run_end_to_end
from .tessellation import build_tessellation, render_ascii, render_svg


def _family_counts(plan) -> dict[str, int]:
    counts: dict[str, int] = {}
    for tile in plan.tiles:
        counts[tile.family.value] = counts.get(tile.family.value, 0) + 1
    return counts


def _resolve_params(K, L, T, Delta, Gamma, N) -> SchemeParams:
    # The planner recommends the constructive server count when N is omitted.
    probe = SchemeParams(K=K, L=L, N=1, T=T, Delta=Delta, Gamma=Gamma)
    if N is None:
        N = capacity.n_opt_upper(probe)
    return replace(probe, N=int(N))


def plan(req: PlanRequest) -> PlanResponse:
    p = _resolve_params(req.K, req.L, req.T, req.Delta, req.Gamma, req.N)
    rep = capacity.report(p)
    tess = build_tessellation(p)
    try:
        trade = capacity.tradeoff_points(p)
        trade_model = TradeoffModel(
            case=trade.case,
            relation=trade.relation,
            points=[[str(g), str(d)] for g, d in trade.points],
            dominatedBaselines=[[str(g), str(d)] for g, d in trade.dominatedBaselines],
        )
    except ParameterError:
        trade_model = TradeoffModel(case="outside-closed-form")
    return PlanResponse(
        params=ParamsModel.from_params(p),
        nUpper=rep.nUpper,
        nLower=str(rep.nLower),
        nLowerFloat=float(rep.nLower),
        tileCount=rep.tileCount,
        capacity=str(rep.capacity),
        capacityFloat=float(rep.capacity),
        capacityCase=rep.capacityCase.value,
        exactness=rep.exactness.value,
        gapRatio=str(rep.gapRatio),
        gapRatioFloat=float(rep.gapRatio),
        familyCounts=_family_counts(tess),
        tradeoff=trade_model,
    )


def _tile_records(result) -> list[TileRecord]:
    residuals = {tf.tile_id: tf.residual_sq for tf in result.tile_factors}
    records = []
    for tile in result.plan.tiles:
        records.append(TileRecord(
            tileId=tile.tile_id,
            rows=list(tile.row_set),
            cols=list(tile.col_set),
            q=tile.allocated_rank,
            residualSq=residuals.get(tile.tile_id, 0.0),
            serverIds=list(tile.server_ids),
        ))
    return records


def factorize(req: FactorizeRequest) -> FactorizeResponse:
    p = req.params.to_params()
    F = np.asarray(req.F, dtype=float)
    if req.mode == "lossless":
        result = factorize_lossless(F, p)
    elif req.mode == "lossy":
        result = factorize_lossy(F, p, req.N, allow_dropped=req.allowDropped)
    else:
        raise ParameterError(f"mode must be lossless or lossy, got {req.mode!r}")
    gamma, delta = measure_costs(result.pair, p.T)
    return FactorizeResponse(
        params=ParamsModel.from_params(result.plan.params),
        mode=result.mode,
        D=result.pair.D.tolist(),
        E=result.pair.E.tolist(),
        tiles=_tile_records(result),
        residualSq=result.residual_sq,
        gammaMeasured=gamma,
        deltaMeasured=delta,
        serversUsed=result.servers_used,
        withinGuarantees=result.within_guarantees,
        droppedTiles=list(result.dropped_tiles),
    )


def _support_from_tiles(tiles: list[TileRecord], shape_d, shape_e, T: int):
    suppD = np.zeros(shape_d, dtype=bool)
    suppE = np.zeros(shape_e, dtype=bool)
    for rec in tiles:
        if rec.q == 0 or not rec.serverIds:
            continue
        c0 = rec.serverIds[0] * T
        cols = np.arange(c0, c0 + rec.q)
        suppD[np.ix_(rec.rows, cols)] = True
        suppE[np.ix_(cols, rec.cols)] = True
    return suppD, suppE


def simulate(req: SimulateRequest) -> SimulateResponse:
    p = req.params.to_params()
    D = np.asarray(req.D, dtype=float)
    E = np.asarray(req.E, dtype=float)
    F = np.asarray(req.F, dtype=float)
    w = np.asarray(req.w, dtype=float)
    if req.tiles is not None:
        suppD, suppE = _support_from_tiles(req.tiles, D.shape, E.shape, p.T)
        # entries outside the declared structure are numerical noise, not data
        if np.any(D[~suppD] != 0) or np.any(E[~suppE] != 0):
            raise ParameterError("matrix entries fall outside the declared tile supports")
    else:
        suppD, suppE = D != 0, E != 0
    pair = FactorPair(D=D, E=E, suppD=suppD, suppE=suppE)
    report = run_end_to_end(F, w, pair, p.T)
    return SimulateResponse(
        z=report.z.tolist(),
        fTrue=report.f_true.tolist(),
        fDecoded=report.f_decoded.tolist(),
        errorE=report.error_e,
        gammaMeasured=report.gamma_measured,
        deltaMeasured=report.delta_measured,
    )


def mp_eval(req: MPRequest) -> MPResponse:
    from . import mp as mplib

    mp = mplib.MPParams(lam=req.lam, sigma_sq=req.sigmaSq)
    if req.op == "pdf":
        value = mplib.mp_pdf(req.x, mp)
    elif req.op == "cdf":
        value = mplib.mp_cdf(req.x, mp)
    elif req.op == "inv":
        value = mplib.mp_cdf_inv(req.x, mp)
    elif req.op == "phi":
        r = mp.edges[0] if req.r is None else req.r
        value = mplib.incomplete_first_moment(req.x, r, mp)
    else:
        raise ParameterError(f"op must be pdf, cdf, inv or phi, got {req.op!r}")
    return MPResponse(value=value)


def mc(req: MCRequest) -> MCResponse:
    from . import mp as mplib

    p = req.params.to_params()
    rows = []
    for n in req.Ns:
        res = mplib.monte_carlo(p, n, trials=req.trials, seed=req.seed, dist=req.dist)
        rows.append(MCRow(N=res.N, eps_pred=res.eps_pred, eps_emp=res.eps_emp,
                          stderr=res.stderr, trials=res.trials, seed=res.seed))
    return MCResponse(rows=rows)


def tiles(req: TilesRequest) -> TilesResponse:
    p = _resolve_params(req.K, req.L, req.T, req.Delta, req.Gamma, None)
    tess = build_tessellation(p)
    return TilesResponse(
        tileCount=len(tess),
        familyCounts=_family_counts(tess),
        ascii_art=render_ascii(tess),
        svg=render_svg(tess),
    )
