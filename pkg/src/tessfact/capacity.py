"""Closed-form server counts, capacity, tradeoff points, and the gap certificate.

Everything here is exact integer/Fraction arithmetic. Floats appear only when a
caller formats the results; divisibility case selection must never be subject
to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .core import ParameterError, SchemeParams, ceil_div, validate


class Exactness(str, Enum):
    EXACT = "exact"
    CONSTANT_GAP = "constant-gap"


class CapacityCase(str, Enum):
    SHOT_DIVISIBLE = "T-divides-min-budget"
    SHOT_EXCEEDS = "T-exceeds-min-budget"
    OUTSIDE_CLOSED_FORM = "outside-closed-form"


@dataclass(frozen=True)
class CapacityReport:
    """Bounds and certificates for one parameter tuple.

    nLower is the closed-form converse KL/(T*max(Gamma, Delta)); tileCount is
    the covering converse (every scheme needs at least ceil(K/Delta) *
    ceil(L/Gamma) tiles, hence that many servers). gapRatio compares nUpper to
    the better of the two.
    """

    nUpper: int
    nLower: Fraction
    tileCount: int
    capacity: Fraction
    capacityCase: CapacityCase
    exactness: Exactness
    gapRatio: Fraction


def _rank_term(a: int, b: int, T: int) -> int:
    # A class family whose min dimension is 0 does not exist and consumes nothing.
    m = min(a, b)
    return 0 if m == 0 else ceil_div(m, T)


def n_opt_upper(params: SchemeParams) -> int:
    """Server count of the tessellated scheme (achievable upper bound on N_opt).

    Sums, over the four tile families, servers-per-tile times tile count:
    full Delta x Gamma blocks, the bottom remainder strip, the right remainder
    strip, and the corner block.
    """
    p = params
    K, L, T, D, G = p.K, p.L, p.T, p.Delta, p.Gamma
    return (
        _rank_term(D, G, T) * (K // D) * (L // G)
        + _rank_term(K % D, G, T) * (L // G)
        + _rank_term(L % G, D, T) * (K // D)
        + _rank_term(K % D, L % G, T)
    )


def n_lower(params: SchemeParams) -> Fraction:
    """Closed-form converse: any lossless scheme needs at least KL/(T*max(Gamma, Delta))."""
    p = params
    return Fraction(p.K * p.L, p.T * max(p.Gamma, p.Delta))


def min_tile_count(params: SchemeParams) -> int:
    """Covering converse: tiles of size at most Delta x Gamma that cover a K x L
    grid number at least ceil(K/Delta)*ceil(L/Gamma)."""
    p = params
    return ceil_div(p.K, p.Delta) * ceil_div(p.L, p.Gamma)


def optimality_status(params: SchemeParams) -> Exactness:
    """Exact when any of the three optimality conditions holds.

    1. T >= min(Delta, Gamma)
    2. Delta >= Gamma, Delta | K, T | Gamma
    3. Gamma >= Delta, Gamma | L, T | Delta
    """
    p = params
    D, G = p.Delta, p.Gamma
    if p.T >= min(D, G):
        return Exactness.EXACT
    if D >= G and p.K % D == 0 and G % p.T == 0:
        return Exactness.EXACT
    if G >= D and p.L % G == 0 and D % p.T == 0:
        return Exactness.EXACT
    return Exactness.CONSTANT_GAP


def gap_ratio(params: SchemeParams) -> Fraction:
    """nUpper divided by the best proved converse.

    The denominator is max(KL/(T*max(Gamma, Delta)), tile count): the first
    converse is tight when T is small relative to the budgets, the second
    takes over once T >= min(Delta, Gamma) (each tile then costs one server
    and the scheme meets the covering bound head-on). Under T < max(Delta,
    Gamma) the ratio is provably below 8.
    """
    up = n_opt_upper(params)
    low = max(n_lower(params), Fraction(min_tile_count(params)))
    ratio = Fraction(up) / low
    if params.T < max(params.Delta, params.Gamma) and ratio >= 8:
        raise AssertionError(
            f"gap certificate violated: ratio {ratio} >= 8 for {params}; this is a bug")
    return ratio


def capacity_simple(params: SchemeParams) -> tuple[Fraction, CapacityCase]:
    """Capacity for the divisible regime Delta | K and Gamma | L.

    Two closed-form cases, selected by how T compares with min(Delta, Gamma)
    (= L*min(zeta, gamma)):

      T | min(Delta, Gamma)  ->  C = T * max(zeta, gamma)
      T > min(Delta, Gamma)  ->  C = L * zeta * gamma

    The middle regime (T neither divides nor exceeds the smaller budget) has
    no closed form; it is reported as such rather than guessed.
    """
    p = params
    if p.K % p.Delta != 0:
        raise ParameterError(f"capacity closed form needs Delta | K; {p.Delta} does not divide {p.K}")
    if p.L % p.Gamma != 0:
        raise ParameterError(f"capacity closed form needs Gamma | L; {p.Gamma} does not divide {p.L}")
    m = min(p.Delta, p.Gamma)  # = L * min(zeta, gamma)
    if p.T > m:
        return p.L * p.zeta * p.gamma, CapacityCase.SHOT_EXCEEDS
    if m % p.T == 0:
        return p.T * max(p.zeta, p.gamma), CapacityCase.SHOT_DIVISIBLE
    return Fraction(p.K, n_opt_upper(p)), CapacityCase.OUTSIDE_CLOSED_FORM


@dataclass(frozen=True)
class TradeoffResult:
    """Optimal communication/computation operating points for divisible budgets.

    Either the product relation gamma*delta = 1/N (when T exceeds the smaller
    budget) or the two corner points (gamma, delta) between which one may
    interpolate. The all-communication and all-computation baselines
    (1/L, 1) and (1, 1/K) are dominated by these.
    """

    case: str
    relation: str | None = None
    points: tuple[tuple[Fraction, Fraction], ...] = ()
    dominatedBaselines: tuple[tuple[Fraction, Fraction], ...] = ()


def tradeoff_points(params: SchemeParams) -> TradeoffResult:
    p = params
    if p.K % p.Delta != 0 or p.L % p.Gamma != 0:
        raise ParameterError("tradeoff characterization needs Delta | K and Gamma | L")
    baselines = ((Fraction(1, p.L), Fraction(1)), (Fraction(1), Fraction(1, p.K)))
    m = min(p.Delta, p.Gamma)
    if p.T > m:
        return TradeoffResult(
            case="product", relation=f"gamma*delta = 1/{p.N}", dominatedBaselines=baselines)
    if m % p.T == 0:
        pts = (
            (Fraction(p.K, p.N * p.T), Fraction(p.T, p.K)),
            (Fraction(p.T, p.L), Fraction(p.L, p.N * p.T)),
        )
        return TradeoffResult(case="corner-points", points=pts, dominatedBaselines=baselines)
    return TradeoffResult(case="outside-closed-form", dominatedBaselines=baselines)


def report(params: SchemeParams) -> CapacityReport:
    """Evaluate every closed form at once; the CLI's plan output."""
    p = validate(params, allow_reduced_budget=True)
    up = n_opt_upper(p)
    low = n_lower(p)
    tiles = min_tile_count(p)
    try:
        cap, case = capacity_simple(p)
    except ParameterError:
        cap, case = Fraction(p.K, up), CapacityCase.OUTSIDE_CLOSED_FORM
    return CapacityReport(
        nUpper=up,
        nLower=low,
        tileCount=tiles,
        capacity=cap,
        capacityCase=case,
        exactness=optimality_status(p),
        gapRatio=gap_ratio(p),
    )
