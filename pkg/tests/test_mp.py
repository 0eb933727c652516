"""Spectral law, closed-form CDF, the error predictor, and Monte Carlo.

Analytic oracles are raw scipy quadrature on the density itself, so the
closed-form CDF and the substituted moment integral are checked by a route
that shares none of their algebra. Spectral oracles are eigenvalues of
actual Gaussian tiles.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from tessfact.core import ParameterError, SchemeParams
from tessfact.mp import (
    ErrorPrediction,
    MPParams,
    incomplete_first_moment,
    monte_carlo,
    mp_cdf,
    mp_cdf_inv,
    mp_pdf,
    predicted_error,
    predicted_error_from_mass,
    thread_count,
)

LAMBDAS = (0.1, 0.5, 1.0, 2.0, 5.0)


def raw_mass(mp, a, b):
    val, _ = quad(lambda x: mp_pdf(x, mp), a, b, limit=400, epsabs=1e-11)
    return val


def test_pdf_reference_value():
    assert mp_pdf(1.0, MPParams(lam=1.0)) == pytest.approx(math.sqrt(3) / (2 * math.pi), rel=1e-12)


def test_pdf_vanishes_at_edges_and_outside():
    mp = MPParams(lam=0.5)
    lo, hi = mp.edges
    assert mp_pdf(lo, mp) == 0.0
    assert mp_pdf(hi, mp) == 0.0
    assert mp_pdf(lo - 0.1, mp) == 0.0
    assert mp_pdf(hi + 0.1, mp) == 0.0


def test_params_reject_bad_shape_or_variance():
    with pytest.raises(ParameterError, match="positive"):
        MPParams(lam=0.0)
    with pytest.raises(ParameterError, match="positive"):
        MPParams(lam=-2.0)
    with pytest.raises(ParameterError, match="positive"):
        MPParams(lam=1.0, sigma_sq=0.0)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_density_plus_atom_normalizes(lam):
    mp = MPParams(lam=lam)
    lo, hi = mp.edges
    assert raw_mass(mp, lo, hi) + mp.atom_mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("lam", (0.5, 1.0, 2.0))
def test_cdf_matches_quadrature(lam):
    mp = MPParams(lam=lam)
    lo, hi = mp.edges
    for frac in (0.05, 0.2, 0.5, 0.8, 0.95):
        x = lo + frac * (hi - lo)
        expected = mp.atom_mass + raw_mass(mp, lo, x)
        assert mp_cdf(x, mp) == pytest.approx(expected, abs=1e-8)


def test_cdf_edge_values():
    thin = MPParams(lam=0.5)
    lo, hi = thin.edges
    assert mp_cdf(lo, thin) == 0.0
    assert mp_cdf(lo - 1.0, thin) == 0.0
    assert mp_cdf(hi, thin) == 1.0
    assert mp_cdf(hi + 1.0, thin) == 1.0
    wide = MPParams(lam=2.0)
    lo2, _ = wide.edges
    # mass 1 - 1/lambda sits at zero, so the CDF jumps there and stays flat
    # until the bulk begins
    assert mp_cdf(-1.0, wide) == 0.0
    assert mp_cdf(0.0, wide) == pytest.approx(0.5)
    assert mp_cdf(0.5 * lo2, wide) == pytest.approx(0.5)


@pytest.mark.parametrize("lam", (0.5, 1.0))
def test_cdf_derivative_is_pdf(lam):
    mp = MPParams(lam=lam)
    lo, hi = mp.edges
    span = hi - lo
    h = 1e-5 * span
    for x in np.linspace(lo + 0.05 * span, hi - 0.05 * span, 100):
        diff = (mp_cdf(x + h, mp) - mp_cdf(x - h, mp)) / (2 * h)
        assert diff == pytest.approx(mp_pdf(float(x), mp), abs=1e-5)


def test_cdf_inverse_round_trip():
    mp = MPParams(lam=0.5)
    for p in np.linspace(0.01, 0.99, 25):
        assert mp_cdf(mp_cdf_inv(float(p), mp), mp) == pytest.approx(float(p), abs=1e-9)


def test_cdf_inverse_endpoints_and_atom():
    thin = MPParams(lam=0.5)
    lo, hi = thin.edges
    assert mp_cdf_inv(0.0, thin) == lo
    assert mp_cdf_inv(1.0, thin) == hi
    wide = MPParams(lam=2.0)
    # any probability inside the atom has no interior preimage; the inverse
    # clamps to the lower edge, detectable as equality with edges[0]
    assert mp_cdf_inv(0.3, wide) == wide.edges[0]
    with pytest.raises(ParameterError, match="outside"):
        mp_cdf_inv(-0.1, thin)
    with pytest.raises(ParameterError, match="outside"):
        mp_cdf_inv(1.1, thin)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_moment_full_interval_is_unit_mean(lam):
    # the zero atom contributes nothing to the mean, so the continuous part
    # integrates to sigma^2 = 1 for every shape ratio
    mp = MPParams(lam=lam)
    lo, hi = mp.edges
    assert incomplete_first_moment(hi, lo, mp) == pytest.approx(1.0, abs=1e-8)


def test_moment_empty_and_clamped():
    mp = MPParams(lam=0.5)
    lo, hi = mp.edges
    assert incomplete_first_moment(lo, lo, mp) == 0.0
    assert incomplete_first_moment(hi + 5.0, lo - 5.0, mp) == pytest.approx(
        incomplete_first_moment(hi, lo, mp))


def test_moment_strictly_increasing():
    mp = MPParams(lam=0.5)
    lo, hi = mp.edges
    ts = np.linspace(lo, hi, 30)
    vals = [incomplete_first_moment(float(t), lo, mp) for t in ts]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("lam", (0.5, 2.0))
def test_moment_matches_x_weighted_quadrature(lam):
    mp = MPParams(lam=lam)
    lo, hi = mp.edges
    for fa, fb in ((0.0, 0.3), (0.1, 0.9), (0.4, 1.0)):
        a = lo + fa * (hi - lo)
        b = lo + fb * (hi - lo)
        oracle, _ = quad(lambda x: x * mp_pdf(x, mp), a, b, limit=400, epsabs=1e-11)
        assert incomplete_first_moment(b, a, mp) == pytest.approx(oracle, abs=1e-8)


def test_predictor_exact_zero_at_lossless_floor():
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=3, Gamma=4)
    pred = predicted_error(p, N=36)
    assert pred.epsilon == 0.0
    assert pred.at_floor
    assert pred.t == MPParams(lam=0.75).edges[0]


def test_predictor_exact_zero_inside_atom():
    # lambda > 1: ranks stop mattering once only the zero eigenvalues are
    # dropped, which happens strictly before the dropped-mass hits zero
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=4, Gamma=3)
    floor_n = (12 * 12) // (1 * 4)  # T N Delta >= K L
    pred = predicted_error(p, N=floor_n)
    assert pred.epsilon == 0.0
    assert pred.at_floor
    just_below = predicted_error(p, N=floor_n - 1)
    assert just_below.epsilon > 0.0
    assert not just_below.at_floor


def test_predictor_full_error_without_servers():
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=3, Gamma=4)
    pred = predicted_error(p, N=0)
    assert pred.epsilon == pytest.approx(1.0, abs=1e-8)
    assert pred.t == pytest.approx(MPParams(lam=0.75).edges[1])


def test_predictor_rejects_out_of_regime():
    ragged = SchemeParams(K=7, L=11, N=17, T=1, Delta=3, Gamma=5)
    with pytest.raises(ParameterError, match="Delta"):
        predicted_error(ragged)
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=3, Gamma=4)
    with pytest.raises(ParameterError, match="floor"):
        predicted_error(p, N=37)
    with pytest.raises(ParameterError, match="non-negative"):
        predicted_error(p, N=-1)


def test_predictor_monotone_in_budget():
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=3, Gamma=4)
    eps = [predicted_error(p, N=n).epsilon for n in range(0, 37)]
    assert all(b <= a + 1e-12 for a, b in zip(eps, eps[1:]))


def test_ratio_level_entry_matches_integer_entry():
    p = SchemeParams(K=12, L=12, N=36, T=1, Delta=3, Gamma=4)
    n = 18
    drop = 1 - (p.T * p.Gamma * n) / (p.K * p.L)
    by_mass = predicted_error_from_mass(p.Delta / p.Gamma, drop)
    direct = predicted_error(p, N=n)
    assert isinstance(by_mass, ErrorPrediction)
    assert by_mass.epsilon == pytest.approx(direct.epsilon, rel=1e-12)


def test_ratio_level_entry_rejects_excess_mass():
    with pytest.raises(ParameterError, match="exceeds"):
        predicted_error_from_mass(0.5, 1.5)


def test_empirical_spectrum_obeys_the_law():
    rng = np.random.default_rng(42)
    delta, gamma = 200, 400
    F = rng.standard_normal((delta, gamma))
    eigs = np.sort(np.linalg.eigvalsh(F @ F.T / gamma))
    mp = MPParams(lam=delta / gamma)
    n = len(eigs)
    ks = 0.0
    for i, x in enumerate(eigs, start=1):
        c = mp_cdf(float(x), mp)
        ks = max(ks, abs(i / n - c), abs((i - 1) / n - c))
    assert ks <= 0.05


def test_mean_dropped_tail_matches_moment_prediction():
    # truncating a Delta x Gamma Gaussian tile to rank q discards on average
    # the spectral mass below the (1 - q/Delta) quantile, scaled by
    # Gamma * Delta
    delta, gamma, q, trials = 60, 90, 24, 100
    rng = np.random.default_rng(7)
    tails = []
    for _ in range(trials):
        s = np.linalg.svd(rng.standard_normal((delta, gamma)), compute_uv=False)
        tails.append(float((s[q:] ** 2).sum()))
    mp = MPParams(lam=delta / gamma)
    alpha = q / min(delta, gamma)
    t = mp_cdf_inv(1 - (min(delta, gamma) / delta) * alpha, mp)
    predicted = gamma * delta * incomplete_first_moment(t, mp.edges[0], mp)
    assert np.mean(tails) == pytest.approx(predicted, rel=0.05)


MC_PARAMS = SchemeParams(K=24, L=24, N=48, T=1, Delta=12, Gamma=6)


def test_monte_carlo_is_deterministic():
    a = monte_carlo(MC_PARAMS, N=24, trials=6, seed=9)
    b = monte_carlo(MC_PARAMS, N=24, trials=6, seed=9)
    assert a == b
    c = monte_carlo(MC_PARAMS, N=24, trials=6, seed=10)
    assert c.errors != a.errors


def test_monte_carlo_full_budget_all_zero():
    floor_n = (24 * 24) // (1 * 12)  # atom boundary: T N Delta = K L
    res = monte_carlo(MC_PARAMS, N=floor_n, trials=4, seed=1)
    assert res.eps_pred == 0.0
    assert res.eps_emp == pytest.approx(0.0, abs=1e-18)
    assert all(e <= 1e-20 for e in res.errors)


def test_monte_carlo_tracks_prediction():
    res = monte_carlo(MC_PARAMS, N=24, trials=40, seed=3)
    assert res.eps_pred == pytest.approx(
        predicted_error(MC_PARAMS, N=24).epsilon, rel=1e-12)
    assert res.eps_emp == pytest.approx(res.eps_pred, rel=0.08)
    assert res.stderr > 0
    assert res.trials == 40


def test_monte_carlo_uniform_ensemble_agrees():
    normal = monte_carlo(MC_PARAMS, N=24, trials=40, seed=3)
    uniform = monte_carlo(MC_PARAMS, N=24, trials=40, seed=3, dist="uniform")
    assert uniform.eps_emp == pytest.approx(normal.eps_emp, rel=0.1)
    with pytest.raises(ParameterError, match="ensemble"):
        monte_carlo(MC_PARAMS, N=24, trials=2, seed=0, dist="cauchy")


def test_monte_carlo_prediction_nan_outside_regime():
    ragged = SchemeParams(K=7, L=11, N=17, T=1, Delta=3, Gamma=5)
    res = monte_carlo(ragged, N=9, trials=3, seed=0)
    assert math.isnan(res.eps_pred)
    assert res.eps_emp > 0


def test_monte_carlo_rejects_empty_run():
    with pytest.raises(ParameterError, match="trials"):
        monte_carlo(MC_PARAMS, N=24, trials=0)


def test_thread_count_parses_environment(monkeypatch):
    monkeypatch.delenv("TESSFACT_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("TESSFACT_THREADS", "")
    assert thread_count() == 1
    monkeypatch.setenv("TESSFACT_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("TESSFACT_THREADS", "0")
    assert 1 <= thread_count() <= 4
    monkeypatch.setenv("TESSFACT_THREADS", "-2")
    assert thread_count() == 1
    monkeypatch.setenv("TESSFACT_THREADS", "many")
    with pytest.raises(ParameterError, match="TESSFACT_THREADS"):
        thread_count()


def test_threaded_run_matches_serial(monkeypatch):
    monkeypatch.delenv("TESSFACT_THREADS", raising=False)
    serial = monte_carlo(MC_PARAMS, N=24, trials=8, seed=5)
    monkeypatch.setenv("TESSFACT_THREADS", "2")
    threaded = monte_carlo(MC_PARAMS, N=24, trials=8, seed=5)
    assert serial == threaded
