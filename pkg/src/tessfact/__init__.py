"""Tessellated distributed computation of linearly-decomposable functions.

Plans tessellation patterns over a K x L demand matrix, factorizes it into a
sparse communication matrix D and computing matrix E via per-tile truncated
SVD, simulates the server/user protocol, and predicts the reconstruction
error of rank-starved schemes through the Marchenko-Pastur law.

Heavy dependencies load lazily: importing the package costs numpy only, the
spectral-analysis helpers pull scipy on first use, and the HTTP layer pulls
fastapi/uvicorn only when a service is actually created.
"""

from .core import (
    FactorPair,
    InfeasibleError,
    NumericalError,
    ParameterError,
    SchemeParams,
    read_matrix_file,
    validate,
    write_matrix_file,
)
from .capacity import (
    CapacityReport,
    Exactness,
    capacity_simple,
    gap_ratio,
    n_lower,
    n_opt_upper,
    optimality_status,
    report,
    tradeoff_points,
)
from .tessellation import (
    Family,
    Tile,
    TilePlan,
    allocate_servers,
    build_tessellation,
    check_coverage,
    check_disjoint,
    min_tile_count,
    render_ascii,
    render_svg,
)
from .factorization import (
    FactorizationResult,
    check_balanced,
    check_support_structure,
    factorize_lossless,
    factorize_lossy,
    rank_budget,
    residual_error,
    svd,
    truncate,
)
from .protocol import SimulationReport, decode, encode, measure_costs, run_end_to_end

__version__ = "0.1.0"

__all__ = [
    "CapacityReport",
    "Exactness",
    "FactorPair",
    "FactorizationResult",
    "Family",
    "InfeasibleError",
    "NumericalError",
    "ParameterError",
    "SchemeParams",
    "SimulationReport",
    "Tile",
    "TilePlan",
    "allocate_servers",
    "build_tessellation",
    "capacity_simple",
    "check_balanced",
    "check_coverage",
    "check_disjoint",
    "check_support_structure",
    "decode",
    "encode",
    "factorize_lossless",
    "factorize_lossy",
    "gap_ratio",
    "measure_costs",
    "min_tile_count",
    "n_lower",
    "n_opt_upper",
    "optimality_status",
    "rank_budget",
    "read_matrix_file",
    "render_ascii",
    "render_svg",
    "report",
    "residual_error",
    "run_end_to_end",
    "svd",
    "tradeoff_points",
    "truncate",
    "validate",
    "write_matrix_file",
    "__version__",
]
