"""Per-tile SVD factorization of F into the sparse pair (D, E).

Each tile of the tessellation is cut out of F, decomposed, optionally
truncated to a rank budget, and placed into its own column block of D and row
block of E. Tile j's block starts at column sum_{i<j} T*ceil(q_i/T); only the
first q_j columns of the block are nonzero, the rest pad the block to a whole
number of servers. Within a tile the left factor carries U*diag(S) and the
right factor V^T, so the product reproduces the truncated tile exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    FactorPair,
    InfeasibleError,
    NumericalError,
    ParameterError,
    SchemeParams,
    ceil_div,
    check_demand_matrix,
    frobenius_sq,
    validate,
)
from .tessellation import Tile, TilePlan, allocate_servers, build_tessellation


@dataclass(frozen=True)
class SvdResult:
    """Economy SVD A = U @ diag(S) @ V.T with a fixed sign convention."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.S)


@dataclass(frozen=True)
class TileFactor:
    """The factor blocks of one tile and the error its truncation leaves."""

    tile_id: int
    Dp: np.ndarray  # |row_set| x q
    Ep: np.ndarray  # q x |col_set|
    residual_sq: float


@dataclass(frozen=True)
class FactorizationResult:
    pair: FactorPair
    plan: TilePlan
    tile_factors: tuple[TileFactor, ...]
    residual_sq: float
    servers_used: int
    mode: str
    within_guarantees: bool = True
    dropped_tiles: tuple[int, ...] = ()


def svd(A: np.ndarray) -> SvdResult:
    """Economy SVD with deterministic signs.

    Each left singular vector is flipped, together with its partner, so that
    its largest-magnitude coordinate is positive; outputs are then identical
    across platforms and BLAS builds.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ParameterError("svd expects a matrix")
    if not np.all(np.isfinite(A)):
        raise ParameterError("svd input has non-finite entries")
    try:
        U, S, Vh = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD failed to converge on a {A.shape[0]}x{A.shape[1]} matrix "
            f"with Frobenius norm {np.linalg.norm(A):.6g}") from exc
    for i in range(len(S)):
        col = U[:, i]
        if col[int(np.argmax(np.abs(col)))] < 0:
            U[:, i] = -col
            Vh[i, :] = -Vh[i, :]
    return SvdResult(U=U, S=S, V=Vh.T)


def truncate(res: SvdResult, q: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Split the best rank-q approximation into (U_q*diag(S_q), V_q^T).

    The discarded tail is exactly the optimal residual: the returned error is
    sum of the squared singular values beyond q.
    """
    if not 0 <= q <= res.rank:
        raise ParameterError(f"truncation rank {q} outside [0, {res.rank}]")
    Dp = res.U[:, :q] * res.S[:q]
    Ep = res.V[:, :q].T
    residual = float(np.sum(res.S[q:] ** 2))
    return Dp, Ep, residual


def extract_tile(F: np.ndarray, tile: Tile) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    K, L = F.shape
    if tile.row_set and (min(tile.row_set) < 0 or max(tile.row_set) >= K):
        raise ParameterError(f"tile {tile.tile_id} row indices exceed matrix bounds")
    if tile.col_set and (min(tile.col_set) < 0 or max(tile.col_set) >= L):
        raise ParameterError(f"tile {tile.tile_id} column indices exceed matrix bounds")
    return F[np.ix_(tile.row_set, tile.col_set)]


def rank_budget(
    params: SchemeParams,
    plan: TilePlan,
    N: int,
    F: np.ndarray | None = None,
    *,
    allow_dropped: bool = False,
) -> list[int]:
    """Split the total rank budget N*T across tiles.

    Every tile first receives floor(N*T/m), capped at its own rank ceiling.
    Whatever remains is handed out one unit at a time to the tile whose next
    singular value is largest, which greedily minimizes the total residual;
    without F to look at, leftovers go in enumeration order. A tile ending at
    rank 0 would be dropped from the scheme entirely, which is refused unless
    allow_dropped says otherwise.
    """
    sigmas = None
    if F is not None:
        F = check_demand_matrix(F, params)
        sigmas = [svd(extract_tile(F, t)).S for t in plan.tiles]
    return _rank_budget(plan, N * params.T, params.T, N, sigmas, allow_dropped)


def _rank_budget(
    plan: TilePlan,
    total_rank: int,
    T: int,
    n_servers: int,
    sigmas: list[np.ndarray] | None,
    allow_dropped: bool,
) -> list[int]:
    m = len(plan.tiles)
    if m == 0:
        raise ParameterError("empty tile plan")
    caps = [t.max_rank for t in plan.tiles]
    base = total_rank // m
    qs = [min(base, c) for c in caps]
    pool = total_rank - sum(qs)

    def next_sigma(j: int) -> float:
        if sigmas is None:
            return 0.0
        s = sigmas[j]
        return float(s[qs[j]]) if qs[j] < len(s) else 0.0

    # Without spectra the leftover spreads round-robin (closest to the uniform
    # per-tile rank the error analysis assumes); with them it chases the
    # largest not-yet-kept singular value. The uniform base is load-bearing:
    # the closed-form error prediction models every tile at the same rank, so
    # the budget may not concentrate on a few strong tiles even when that
    # would lower the residual for one particular F.
    cursor = 0
    while pool > 0:
        open_tiles = [j for j in range(m) if qs[j] < caps[j]]
        if not open_tiles:
            break  # budget exceeds the lossless total; surplus simply unused
        if sigmas is None:
            j = min(open_tiles, key=lambda k: (k - cursor) % m)
            cursor = (j + 1) % m
        else:
            j = max(open_tiles, key=lambda k: (next_sigma(k), -k))
        qs[j] += 1
        pool -= 1

    # Rank units are cheap but servers come in whole shots: with T > 1 the
    # ceil(q/T) totals can overshoot N, so shed the least valuable units.
    while sum(ceil_div(q, T) for q in qs if q > 0) > n_servers:
        shrinkable = [j for j in range(m) if qs[j] > 0]
        if sigmas is None:
            j = shrinkable[-1]
        else:
            j = min(shrinkable, key=lambda k: (float(sigmas[k][qs[k] - 1]) if qs[k] <= len(sigmas[k]) else 0.0, k))
        qs[j] -= 1

    dropped = [j for j in range(m) if qs[j] == 0]
    if dropped and not allow_dropped:
        raise InfeasibleError(
            f"rank budget {total_rank} over {m} tiles would drop tiles {dropped}; "
            "pass allow_dropped to permit all-zero tiles")
    return qs


def factorize_lossless(F: np.ndarray, params: SchemeParams) -> FactorizationResult:
    """Exact factorization F = D @ E using the full rank of every tile."""
    p = validate(params)
    F = check_demand_matrix(F, p)
    plan = allocate_servers(build_tessellation(p), "lossless")
    return _assemble(F, p, plan, mode="lossless")


def factorize_lossy(
    F: np.ndarray,
    params: SchemeParams,
    N: int | None = None,
    *,
    allow_dropped: bool = False,
) -> FactorizationResult:
    """Best-effort factorization under a server budget N below the lossless floor.

    Tiles are truncated to the ranks chosen by rank_budget; the total squared
    error is the sum of each tile's discarded singular values. When the
    budgets divide the matrix evenly (Delta | K and Gamma | L) the error obeys
    the spectral prediction; otherwise the same construction runs but the
    result is marked as sitting outside those guarantees.
    """
    p = validate(params, allow_reduced_budget=True)
    if N is not None:
        p = replace(p, N=int(N))
        validate(p, allow_reduced_budget=True)
    F = check_demand_matrix(F, p)
    plan = build_tessellation(p)
    sigmas = [svd(extract_tile(F, t)).S for t in plan.tiles]
    qs = _rank_budget(plan, p.shots_total, p.T, p.N, sigmas, allow_dropped)
    dropped = tuple(j for j, q in enumerate(qs) if q == 0)
    if dropped:
        warnings.warn(f"tiles {list(dropped)} dropped (rank 0) under server budget {p.N}",
                      stacklevel=2)
    plan = allocate_servers(plan, "lossy", N=p.N, ranks=qs)
    divisible = p.K % p.Delta == 0 and p.L % p.Gamma == 0
    return _assemble(F, p, plan, mode="lossy",
                     within_guarantees=divisible, dropped_tiles=dropped)


def _assemble(
    F: np.ndarray,
    p: SchemeParams,
    plan: TilePlan,
    *,
    mode: str,
    within_guarantees: bool = True,
    dropped_tiles: tuple[int, ...] = (),
) -> FactorizationResult:
    NT = p.shots_total
    D = np.zeros((p.K, NT))
    E = np.zeros((NT, p.L))
    suppD = np.zeros((p.K, NT), dtype=bool)
    suppE = np.zeros((NT, p.L), dtype=bool)
    factors: list[TileFactor] = []
    total = 0.0
    servers_used = 0
    for tile in plan.tiles:
        res = svd(extract_tile(F, tile))
        q = tile.allocated_rank
        Dp, Ep, residual = truncate(res, q)
        factors.append(TileFactor(tile.tile_id, Dp, Ep, residual))
        total += residual
        servers_used += len(tile.server_ids)
        if q == 0:
            continue
        c0 = tile.server_ids[0] * p.T
        rows = np.asarray(tile.row_set)
        cols = np.asarray(tile.col_set)
        D[np.ix_(rows, range(c0, c0 + q))] = Dp
        E[np.ix_(range(c0, c0 + q), cols)] = Ep
        suppD[np.ix_(rows, range(c0, c0 + q))] = True
        suppE[np.ix_(range(c0, c0 + q), cols)] = True
    pair = FactorPair(D=D, E=E, suppD=suppD, suppE=suppE)
    return FactorizationResult(
        pair=pair,
        plan=plan,
        tile_factors=tuple(factors),
        residual_sq=total,
        servers_used=servers_used,
        mode=mode,
        within_guarantees=within_guarantees,
        dropped_tiles=dropped_tiles,
    )


def residual_error(F: np.ndarray, pair: FactorPair) -> float:
    """Dense evaluation of the squared factorization error |D@E - F|_F^2."""
    F = np.asarray(F, dtype=float)
    if pair.D.shape[0] != F.shape[0] or pair.E.shape[1] != F.shape[1]:
        raise ParameterError(
            f"factor shapes {pair.D.shape}x{pair.E.shape} do not match F {F.shape}")
    return frobenius_sq(pair.D @ pair.E - F)


def check_support_structure(pair: FactorPair) -> tuple[bool, list[str]]:
    """Verify the disjoint-support condition on the structural masks.

    Any two columns of D must have equal or disjoint supports, and likewise
    any two rows of E. Distinct supports are few (one per tile), so the
    pairwise check runs over the deduplicated set.
    """
    problems = []
    for name, mask in (("D columns", pair.suppD.T), ("E rows", pair.suppE)):
        distinct = {frozenset(np.flatnonzero(row)) for row in mask}
        distinct.discard(frozenset())
        supports = sorted(distinct, key=sorted)
        for i in range(len(supports)):
            for j in range(i + 1, len(supports)):
                if supports[i] & supports[j]:
                    problems.append(
                        f"{name} {sorted(supports[i])} and {sorted(supports[j])} "
                        "overlap without being equal")
    return not problems, problems


def check_balanced(pair: FactorPair) -> tuple[bool, list[str]]:
    """Verify equal support sizes over the nonzero columns of D / rows of E.

    This is the stronger balanced condition that the evenly divided regime
    promises; padding and unused server columns are all-zero and excluded.
    """
    problems = []
    for name, mask in (("D column", pair.suppD.T), ("E row", pair.suppE)):
        sizes = {int(row.sum()) for row in mask if row.any()}
        if len(sizes) > 1:
            problems.append(f"{name} support sizes differ: {sorted(sizes)}")
    return not problems, problems
