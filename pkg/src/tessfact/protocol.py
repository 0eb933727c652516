"""Algebraic simulation of the broadcast pipeline.

Servers encode the subfunction outputs w into z = E @ w, one entry per shot;
each user k recovers its function value as the inner product of its row of D
with z. Channels are error-free, so the simulator works on vectors rather
than packets; the per-server shot structure survives as the grouping of T
consecutive columns of D (rows of E).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FactorPair, ParameterError


@dataclass(frozen=True)
class SimulationReport:
    z: np.ndarray
    f_true: np.ndarray
    f_decoded: np.ndarray
    error_e: float
    gamma_measured: int
    delta_measured: int


def encode(E: np.ndarray, w: np.ndarray) -> np.ndarray:
    E = np.asarray(E, dtype=float)
    w = np.asarray(w, dtype=float).reshape(-1)
    if E.shape[1] != w.shape[0]:
        raise ParameterError(f"encode: E has {E.shape[1]} columns but w has length {w.shape[0]}")
    return E @ w


def decode(D: np.ndarray, z: np.ndarray) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    z = np.asarray(z, dtype=float).reshape(-1)
    if D.shape[1] != z.shape[0]:
        raise ParameterError(f"decode: D has {D.shape[1]} columns but z has length {z.shape[0]}")
    return D @ z


def measure_costs(pair: FactorPair, T: int) -> tuple[int, int]:
    """Realized (gamma, delta) in absolute units.

    gamma: the largest number of distinct subfunctions any single server
    touches across its T shots (union of supports of its rows of E).
    delta: the largest number of distinct users any server serves (union of
    supports of its columns of D).
    """
    if T < 1:
        raise ParameterError(f"T must be positive, got {T}")
    NT = pair.shots_total
    if NT % T != 0:
        raise ParameterError(f"total shots {NT} not divisible by T={T}")
    n = NT // T
    gamma = delta = 0
    for s in range(n):
        block = slice(s * T, (s + 1) * T)
        gamma = max(gamma, int(np.any(pair.suppE[block, :], axis=0).sum()))
        delta = max(delta, int(np.any(pair.suppD[:, block], axis=1).sum()))
    return gamma, delta


def run_end_to_end(F: np.ndarray, w: np.ndarray, pair: FactorPair, T: int) -> SimulationReport:
    """Encode, broadcast, decode, and compare against the direct product F @ w."""
    F = np.asarray(F, dtype=float)
    w = np.asarray(w, dtype=float).reshape(-1)
    if F.shape[1] != w.shape[0]:
        raise ParameterError(f"F has {F.shape[1]} columns but w has length {w.shape[0]}")
    if pair.D.shape[0] != F.shape[0] or pair.E.shape[1] != F.shape[1]:
        raise ParameterError("factor pair does not match F's shape")
    z = encode(pair.E, w)
    f_true = F @ w
    f_decoded = decode(pair.D, z)
    diff = f_decoded - f_true
    gamma, delta = measure_costs(pair, T)
    return SimulationReport(
        z=z,
        f_true=f_true,
        f_decoded=f_decoded,
        error_e=float(diff @ diff),
        gamma_measured=gamma,
        delta_measured=delta,
    )
