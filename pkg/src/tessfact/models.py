"""Pydantic request/response schemas shared by the HTTP service and the CLI.

Matrices travel as nested float lists, exact rationals as "p/q" strings with
float twins for plotting, and tile records carry index lists so arbitrary
(non-grid) plans survive a round trip.
"""

from __future__ import annotations

from fractions import Fraction

from pydantic import BaseModel


class ParamsModel(BaseModel):
    K: int
    L: int
    N: int
    T: int = 1
    Delta: int
    Gamma: int

    @classmethod
    def from_params(cls, p) -> "ParamsModel":
        return cls(K=p.K, L=p.L, N=p.N, T=p.T, Delta=p.Delta, Gamma=p.Gamma)

    def to_params(self):
        from .core import SchemeParams

        return SchemeParams(K=self.K, L=self.L, N=self.N, T=self.T,
                            Delta=self.Delta, Gamma=self.Gamma)


class TileRecord(BaseModel):
    tileId: int
    rows: list[int]
    cols: list[int]
    q: int
    residualSq: float
    serverIds: list[int]


class TradeoffModel(BaseModel):
    case: str
    relation: str | None = None
    points: list[list[str]] = []
    dominatedBaselines: list[list[str]] = []


class PlanRequest(BaseModel):
    K: int
    L: int
    T: int = 1
    Delta: int
    Gamma: int
    N: int | None = None


class PlanResponse(BaseModel):
    params: ParamsModel
    nUpper: int
    nLower: str
    nLowerFloat: float
    tileCount: int
    capacity: str
    capacityFloat: float
    capacityCase: str
    exactness: str
    gapRatio: str
    gapRatioFloat: float
    familyCounts: dict[str, int]
    tradeoff: TradeoffModel

    def n_lower_fraction(self) -> Fraction:
        return Fraction(self.nLower)


class FactorizeRequest(BaseModel):
    params: ParamsModel
    F: list[list[float]]
    mode: str = "lossless"
    N: int | None = None
    allowDropped: bool = False


class FactorizeResponse(BaseModel):
    params: ParamsModel
    mode: str
    D: list[list[float]]
    E: list[list[float]]
    tiles: list[TileRecord]
    residualSq: float
    gammaMeasured: int
    deltaMeasured: int
    serversUsed: int
    withinGuarantees: bool
    droppedTiles: list[int]


class SimulateRequest(BaseModel):
    params: ParamsModel
    D: list[list[float]]
    E: list[list[float]]
    F: list[list[float]]
    w: list[float]
    tiles: list[TileRecord] | None = None


class SimulateResponse(BaseModel):
    z: list[float]
    fTrue: list[float]
    fDecoded: list[float]
    errorE: float
    gammaMeasured: int
    deltaMeasured: int


class MPRequest(BaseModel):
    lam: float
    sigmaSq: float = 1.0
    op: str  # pdf | cdf | inv | phi
    x: float
    r: float | None = None


class MPResponse(BaseModel):
    value: float


class MCRequest(BaseModel):
    params: ParamsModel
    Ns: list[int]
    trials: int = 50
    seed: int = 0
    dist: str = "normal"


class MCRow(BaseModel):
    N: int
    eps_pred: float
    eps_emp: float
    stderr: float
    trials: int
    seed: int


class MCResponse(BaseModel):
    rows: list[MCRow]


class TilesRequest(BaseModel):
    K: int
    L: int
    Delta: int
    Gamma: int
    T: int = 1


class TilesResponse(BaseModel):
    tileCount: int
    familyCounts: dict[str, int]
    ascii_art: str
    svg: str


class SchemeDescriptor(BaseModel):
    """On-disk pointer bundle tying a factorization's files together."""

    params: ParamsModel
    tiles: list[TileRecord]
    mode: str
    files: dict[str, str]  # keys D, E, F -> CSV paths
