"""Marchenko-Pastur spectral law and the analytic error predictor.

For a tile with i.i.d. zero-mean unit-variance entries and shape ratio
lambda = Delta/Gamma, the eigenvalues of (1/Gamma) F_P F_P^T settle onto the
Marchenko-Pastur distribution with edges (1 +- sqrt(lambda))^2; for
lambda > 1 an extra point mass of 1 - 1/lambda sits at zero. Truncating every
tile to rank q discards exactly the spectral mass below the (1 - q/Delta)
quantile, which turns the reconstruction error of the whole scheme into an
incomplete first moment of this law. That is the predictor implemented here,
next to the density, the closed-form CDF, its inverse, and a seeded Monte
Carlo harness that checks the prediction against actual factorizations.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .core import ParameterError, SchemeParams, validate
from .factorization import factorize_lossy, residual_error


@dataclass(frozen=True)
class MPParams:
    """Shape ratio and variance of the law; edges derive from them."""

    lam: float
    sigma_sq: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ParameterError(f"shape ratio must be positive, got {self.lam}")
        if self.sigma_sq <= 0:
            raise ParameterError(f"variance must be positive, got {self.sigma_sq}")

    @property
    def edges(self) -> tuple[float, float]:
        s = math.sqrt(self.lam)
        return self.sigma_sq * (1 - s) ** 2, self.sigma_sq * (1 + s) ** 2

    @property
    def atom_mass(self) -> float:
        """Point mass at zero; nonzero only for lambda > 1."""
        return max(0.0, 1.0 - 1.0 / self.lam)


def mp_pdf(x: float, mp: MPParams) -> float:
    """Continuous part of the density; the atom is never folded in."""
    lo, hi = mp.edges
    if x <= lo or x >= hi:
        return 0.0
    return math.sqrt((hi - x) * (x - lo)) / (2 * math.pi * mp.sigma_sq * mp.lam * x)


def _cdf_bulk(x: float, mp: MPParams) -> float:
    # Closed form of the continuous mass on (edge-, x]; the two arctan terms
    # carry the boundary behavior, the sqrt term the bulk.
    lam, s2 = mp.lam, mp.sigma_sq
    lo, hi = mp.edges
    r2 = (hi - x) / (x - lo)
    r = math.sqrt(r2)
    root = math.sqrt((hi - x) * (x - lo))
    total = math.pi * lam + root / s2
    total -= (1 + lam) * math.atan((r2 - 1) / (2 * r))
    if lam != 1.0:
        total += (1 - lam) * math.atan((lo * r2 - hi) / (2 * s2 * (1 - lam) * r))
    return total / (2 * math.pi * lam)


def mp_cdf(x: float, mp: MPParams) -> float:
    """Full CDF including the atom at zero when lambda > 1."""
    lo, hi = mp.edges
    guard = 1e-14 * (hi - lo)
    if x >= hi - guard:
        return 1.0
    if mp.lam > 1.0:
        if x < 0:
            return 0.0
        if x <= lo + guard:
            return mp.atom_mass
        return (mp.lam - 1) / (2 * mp.lam) + _cdf_bulk(x, mp)
    if x <= lo + guard:
        return 0.0
    return _cdf_bulk(x, mp)


def mp_cdf_inv(p: float, mp: MPParams) -> float:
    """Smallest x in [edge-, edge+] with CDF(x) = p, by 80-step bisection.

    Probabilities at or below the atom mass are clamped to the lower edge:
    the CDF is flat there, so the equation has no interior solution.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability {p} outside [0, 1]")
    lo, hi = mp.edges
    if p <= mp.atom_mass or p == 0.0:
        return lo
    if p >= 1.0:
        return hi
    a, b = lo, hi
    for _ in range(80):
        mid = 0.5 * (a + b)
        if mp_cdf(mid, mp) < p:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def incomplete_first_moment(t: float, r: float, mp: MPParams) -> float:
    """Phi(t, r) = integral of x*f(x) from r to t over the continuous part.

    The integrand's 1/x cancels, leaving sqrt((hi-x)(x-lo))/(2*pi*lam*s2);
    the substitution x = lo + (hi-lo)*sin(theta)^2 removes the sqrt edges, so
    quadrature sees an analytic integrand and lands far below the 1e-8
    contract. Bounds outside the support are clamped.
    """
    lo, hi = mp.edges
    r = min(max(r, lo), hi)
    t = min(max(t, lo), hi)
    if t <= r:
        return 0.0
    span = hi - lo

    def theta_of(x: float) -> float:
        return math.asin(min(1.0, math.sqrt((x - lo) / span)))

    def integrand(theta: float) -> float:
        return 0.5 * span * span * math.sin(2 * theta) ** 2

    val, _ = quad(integrand, theta_of(r), theta_of(t), epsabs=1e-12, epsrel=1e-12)
    return val / (2 * math.pi * mp.lam * mp.sigma_sq)


@dataclass(frozen=True)
class ErrorPrediction:
    """Output of the analytic predictor.

    t is the spectral truncation point, phi the incomplete first moment up to
    t, epsilon the predicted mean normalized squared error. at_floor marks
    budgets at or beyond lossless recovery (epsilon exactly 0); there the
    truncation equation has no interior solution and t sits at the lower edge.
    """

    lam: float
    drop_mass: float
    t: float
    phi: float
    epsilon: float
    at_floor: bool = False


def predicted_error_from_mass(lam: float, drop_mass: float) -> ErrorPrediction:
    """Predictor in ratio form: shape lambda and the spectral mass dropped.

    drop_mass = 1 - T*gamma*N/K, the fraction of eigenvalues (atom included)
    that the rank budget cannot keep.
    """
    mp = MPParams(lam=float(lam))
    p = float(drop_mass)
    if p > 1.0 + 1e-12:
        raise ParameterError(f"drop mass {p} exceeds 1")
    p = min(p, 1.0)
    lo, hi = mp.edges
    if p <= mp.atom_mass or p <= 0.0:
        return ErrorPrediction(lam=mp.lam, drop_mass=p, t=lo, phi=0.0, epsilon=0.0,
                               at_floor=True)
    if p >= 1.0:
        phi = incomplete_first_moment(hi, lo, mp)
        return ErrorPrediction(lam=mp.lam, drop_mass=p, t=hi, phi=phi, epsilon=phi)
    t = mp_cdf_inv(p, mp)
    phi = incomplete_first_moment(t, lo, mp)
    return ErrorPrediction(lam=mp.lam, drop_mass=p, t=t, phi=phi, epsilon=phi)


def predicted_error(params: SchemeParams, N: int | None = None) -> ErrorPrediction:
    """Predictor for an integer configuration in the evenly divided regime.

    Requires Delta | K and Gamma | L. N may be supplied separately (including
    0) to sweep budgets without rebuilding params.
    """
    p = validate(params, allow_reduced_budget=True)
    n = p.N if N is None else int(N)
    if n < 0:
        raise ParameterError(f"server count must be non-negative, got {n}")
    if p.K % p.Delta != 0 or p.L % p.Gamma != 0:
        raise ParameterError(
            "error prediction needs Delta | K and Gamma | L; "
            f"got K={p.K}, Delta={p.Delta}, L={p.L}, Gamma={p.Gamma}")
    lam = Fraction(p.Delta, p.Gamma)
    drop = 1 - Fraction(p.T * p.Gamma * n, p.K * p.L)
    if drop < 0:
        raise ParameterError(
            f"budget N={n} exceeds the lossless floor {Fraction(p.K * p.L, p.T * p.Gamma)}; "
            "the prediction is defined up to full-rank recovery")
    # Exact-arithmetic floor test: dropping no more than the atom means every
    # retained direction is real signal and the error is identically zero.
    atom = Fraction(0) if lam <= 1 else 1 - 1 / lam
    if drop <= atom:
        lo, _ = MPParams(lam=float(lam)).edges
        return ErrorPrediction(lam=float(lam), drop_mass=float(drop), t=lo,
                               phi=0.0, epsilon=0.0, at_floor=True)
    return predicted_error_from_mass(float(lam), float(drop))


@dataclass(frozen=True)
class MCResult:
    N: int
    eps_pred: float
    eps_emp: float
    stderr: float
    trials: int
    seed: int
    errors: tuple[float, ...]


def _trial_error(params: SchemeParams, N: int, seed: int, trial: int, dist: str) -> float:
    rng = np.random.default_rng((seed, trial))
    shape = (params.K, params.L)
    if dist == "normal":
        F = rng.standard_normal(shape)
    elif dist == "uniform":
        # unit variance without normality, to exercise universality
        F = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
    else:
        raise ParameterError(f"unknown ensemble {dist!r}")
    with warnings.catch_warnings():
        # rank starvation is the point of the lossy sweep, not a surprise
        warnings.simplefilter("ignore")
        result = factorize_lossy(F, params, N, allow_dropped=True)
    return residual_error(F, result.pair) / (params.K * params.L)


def thread_count() -> int:
    """Worker cap from TESSFACT_THREADS; 0 means auto, unset means serial."""
    raw = os.environ.get("TESSFACT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"TESSFACT_THREADS={raw!r} is not an integer") from None
    if n == 0:
        return min(4, os.cpu_count() or 1)
    return max(1, n)


def monte_carlo(
    params: SchemeParams,
    N: int | None = None,
    trials: int = 50,
    seed: int = 0,
    dist: str = "normal",
) -> MCResult:
    """Empirical mean normalized error over seeded random demand matrices.

    Each trial draws its own generator from (seed, trial index), so results
    are identical no matter how many workers run them or in what order.
    """
    p = validate(params, allow_reduced_budget=True)
    n = p.N if N is None else int(N)
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errs = list(pool.map(lambda t: _trial_error(p, n, seed, t, dist), range(trials)))
    else:
        errs = [_trial_error(p, n, seed, t, dist) for t in range(trials)]
    arr = np.asarray(errs)
    mean = float(arr.mean())
    stderr = float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    try:
        pred = predicted_error(p, n).epsilon
    except ParameterError:
        pred = float("nan")  # outside the evenly divided regime
    return MCResult(N=n, eps_pred=pred, eps_emp=mean, stderr=stderr,
                    trials=trials, seed=seed, errors=tuple(errs))
