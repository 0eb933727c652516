"""Shared domain types, parameter validation, and matrix text I/O.

The whole package revolves around one parameter tuple: K users ask for linear
combinations of L subfunction outputs, served by N servers that each broadcast
T shots. Delta caps how many users a server may talk to, Gamma caps how many
subfunctions a server may compute. Everything downstream (tessellation,
factorization, capacity formulas, error prediction) is a function of these six
integers plus the demand matrix F.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

import numpy as np


class ParameterError(ValueError):
    """Invalid parameters or malformed input data (CLI exit code 2)."""


class InfeasibleError(RuntimeError):
    """A request that no scheme can satisfy, e.g. too few servers (exit 3)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge (exit 4)."""


@dataclass(frozen=True)
class SchemeParams:
    """The scheme tuple (K, L, N, T, Delta, Gamma).

    K : number of users (rows of F)
    L : number of subfunctions (columns of F)
    N : number of servers
    T : shots (channel uses) per server
    Delta : per-server communication budget, in users (1 <= Delta <= K)
    Gamma : per-server computation budget, in subfunctions (1 <= Gamma <= L)
    """

    K: int
    L: int
    N: int
    T: int
    Delta: int
    Gamma: int

    @property
    def gamma(self) -> Fraction:
        """Normalized computation cost Gamma/L."""
        return Fraction(self.Gamma, self.L)

    @property
    def delta(self) -> Fraction:
        """Normalized communication cost Delta/K."""
        return Fraction(self.Delta, self.K)

    @property
    def zeta(self) -> Fraction:
        """Communication budget normalized by the subfunction count, Delta/L."""
        return Fraction(self.Delta, self.L)

    @property
    def kappa(self) -> Fraction:
        """Aspect ratio K/L of the demand matrix."""
        return Fraction(self.K, self.L)

    @property
    def rate(self) -> Fraction:
        """System rate R = K/N: users served per server."""
        return Fraction(self.K, self.N)

    @property
    def shots_total(self) -> int:
        """Total broadcast shots N*T, the column count of D / row count of E."""
        return self.N * self.T


def validate(params: SchemeParams, *, allow_reduced_budget: bool = False) -> SchemeParams:
    """Check a parameter tuple and return it unchanged, or raise ParameterError.

    With ``allow_reduced_budget`` the N*T >= max(K, L) requirement is waived;
    the lossy factorization path accepts fewer total shots than users or
    subfunctions, trading accuracy for servers.
    """
    p = params
    for name in ("K", "L", "N", "T", "Delta", "Gamma"):
        v = getattr(p, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            raise ParameterError(f"{name} must be an integer, got {v!r}")
        if v < 1:
            raise ParameterError(f"{name} must be positive, got {v}")
    if p.Delta > p.K:
        raise ParameterError(f"Delta={p.Delta} > K={p.K}: communication budget exceeds users")
    if p.Gamma > p.L:
        raise ParameterError(f"Gamma={p.Gamma} > L={p.L}: computation budget exceeds subfunctions")
    if not allow_reduced_budget:
        nt = p.shots_total
        if nt < p.K:
            raise ParameterError(f"NT={nt} < K={p.K}: too few total shots for lossless recovery")
        if nt < p.L:
            raise ParameterError(f"NT={nt} < L={p.L}: too few total shots for lossless recovery")
    return p


def check_demand_matrix(F: np.ndarray, params: SchemeParams) -> np.ndarray:
    """Validate F as a K x L real matrix with finite entries."""
    F = np.asarray(F, dtype=float)
    if F.shape != (params.K, params.L):
        raise ParameterError(
            f"demand matrix shape {F.shape} does not match (K, L)=({params.K}, {params.L})")
    if not np.all(np.isfinite(F)):
        raise ParameterError("demand matrix contains non-finite entries")
    return F


def check_output_vector(w: np.ndarray, params: SchemeParams) -> np.ndarray:
    """Validate w as a length-L real vector with finite entries."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape != (params.L,):
        raise ParameterError(f"output vector length {w.shape[0]} does not match L={params.L}")
    if not np.all(np.isfinite(w)):
        raise ParameterError("output vector contains non-finite entries")
    return w


@dataclass(frozen=True)
class FactorPair:
    """Assembled factors D (K x NT) and E (NT x L) with their support masks.

    Column n of D belongs to server n // T, shot n % T; row n of E likewise.
    suppD/suppE mark where entries are allowed to be nonzero; all actual
    nonzeros lie inside the masks.
    """

    D: np.ndarray
    E: np.ndarray
    suppD: np.ndarray
    suppE: np.ndarray

    def __post_init__(self):
        if self.D.ndim != 2 or self.E.ndim != 2:
            raise ParameterError("D and E must be matrices")
        if self.D.shape[1] != self.E.shape[0]:
            raise ParameterError(
                f"inner dimensions disagree: D is {self.D.shape}, E is {self.E.shape}")
        if self.suppD.shape != self.D.shape or self.suppE.shape != self.E.shape:
            raise ParameterError("support masks must match factor shapes")
        if np.any(self.D[~self.suppD.astype(bool)] != 0.0):
            raise ParameterError("D has nonzeros outside its support mask")
        if np.any(self.E[~self.suppE.astype(bool)] != 0.0):
            raise ParameterError("E has nonzeros outside its support mask")

    @property
    def shots_total(self) -> int:
        return self.D.shape[1]


# ---------------------------------------------------------------------------
# CSV matrix format: one row per line, comma separated, optional leading
# comment line "# rows cols". Values are written with repr-level precision so
# a write/read round trip is exact.
# ---------------------------------------------------------------------------

def write_matrix(fh: TextIO, A: np.ndarray, *, header: bool = True) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if header:
        fh.write(f"# {A.shape[0]} {A.shape[1]}\n")
    for row in A:
        fh.write(",".join(format(v, ".17g") for v in row))
        fh.write("\n")


def read_matrix(fh: TextIO) -> np.ndarray:
    """Parse a CSV matrix, reporting the 1-based line number on bad input."""
    declared: tuple[int, int] | None = None
    rows: list[list[float]] = []
    for lineno, line in enumerate(fh, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            fields = text[1:].split()
            if lineno == 1 and len(fields) == 2:
                try:
                    declared = (int(fields[0]), int(fields[1]))
                except ValueError:
                    pass  # a plain comment, not a shape header
            continue
        values = []
        for col, tok in enumerate(text.split(","), start=1):
            try:
                values.append(float(tok))
            except ValueError:
                raise ParameterError(
                    f"line {lineno}, field {col}: {tok.strip()!r} is not a number") from None
        if rows and len(values) != len(rows[0]):
            raise ParameterError(
                f"line {lineno}: expected {len(rows[0])} fields, got {len(values)}")
        rows.append(values)
    if not rows:
        raise ParameterError("empty matrix file")
    A = np.array(rows, dtype=float)
    if declared is not None and A.shape != declared:
        raise ParameterError(f"header declares shape {declared} but data is {A.shape}")
    return A


def write_matrix_file(path, A: np.ndarray, *, header: bool = True) -> None:
    with open(path, "w") as fh:
        write_matrix(fh, A, header=header)


def read_matrix_file(path) -> np.ndarray:
    with open(path) as fh:
        return read_matrix(fh)


def read_vector_file(path) -> np.ndarray:
    """Read a vector stored either as one CSV line or one value per line."""
    A = read_matrix_file(path)
    if 1 in A.shape:
        return A.reshape(-1)
    raise ParameterError(f"expected a vector, got a {A.shape[0]}x{A.shape[1]} matrix")


def frobenius_sq(A: np.ndarray) -> float:
    """Squared Frobenius norm; the error currency used throughout."""
    A = np.asarray(A, dtype=float)
    return float(np.sum(A * A))


def ceil_div(a: int, b: int) -> int:
    """Integer ceiling a/b for non-negative a, positive b."""
    if b <= 0:
        raise ParameterError(f"ceil_div needs a positive divisor, got {b}")
    return -(-a // b)
