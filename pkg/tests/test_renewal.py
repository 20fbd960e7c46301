import math

import numpy as np
import pytest
from scipy import stats

from hawkes import (
    ExpKernel,
    PowerLawKernel,
    RenewalDensity,
    RenewalHawkesModel,
    VolterraGrid,
    renewal_intensity,
    simulate_cluster,
    simulate_renewal_hawkes,
    solve_K,
    solve_M,
)


# --- densities and hazards ---------------------------------------------------------


def test_density_matches_scipy():
    w = np.array([0.2, 0.9, 2.5])
    cases = [
        (RenewalDensity.exponential(1.4), stats.expon(scale=1 / 1.4)),
        (RenewalDensity.gamma(2.3, 1.7), stats.gamma(2.3, scale=1 / 1.7)),
        (RenewalDensity.weibull(1.8, 0.9), stats.weibull_min(1.8, scale=0.9)),
    ]
    for ours, ref in cases:
        assert np.allclose(ours.pdf(w), ref.pdf(w), rtol=1e-10)
        assert np.allclose(ours.cdf(w), ref.cdf(w), rtol=1e-10)
        u = np.array([0.1, 0.5, 0.95])
        assert np.allclose(ours.cdf(ours.ppf(u)), u, rtol=1e-9)
        assert ours.mean() == pytest.approx(ref.mean(), rel=1e-12)


def test_hazard_exponential_is_constant():
    dens = RenewalDensity.exponential(0.7)
    for w in (0.0, 0.5, 3.0, 10.0):
        assert renewal_intensity(dens, w) == pytest.approx(0.7, rel=1e-12)


def test_hazard_gamma_value():
    # gamma(shape 2, rate 1): pdf w e^-w, survival (1+w) e^-w, hazard w/(1+w)
    dens = RenewalDensity.gamma(2.0, 1.0)
    assert renewal_intensity(dens, 1.0) == pytest.approx(0.5, rel=1e-12)
    assert renewal_intensity(dens, 0.0) == 0.0  # g(0) = 0 for shape > 1


def test_hazard_exhausted_support():
    dens = RenewalDensity.weibull(3.0, 0.1)
    with pytest.raises(ValueError, match="exhausted"):
        renewal_intensity(dens, 50.0)
    with pytest.raises(ValueError):
        renewal_intensity(dens, -1.0)


# --- Volterra solvers -----------------------------------------------------------------


def test_volterra_grid_validation():
    with pytest.raises(ValueError):
        VolterraGrid(h=0.3, horizon=1.0, values=np.zeros(4))  # not a multiple
    with pytest.raises(ValueError):
        VolterraGrid(h=0.5, horizon=1.0, values=np.zeros(5))  # wrong length
    g = VolterraGrid(h=0.5, horizon=1.0, values=np.array([0.0, 1.0, 2.0]))
    assert g.at(0.5) == 1.0
    with pytest.raises(ValueError):
        g.at(0.3)


def test_solve_k_zero_kernel():
    grid = solve_K(ExpKernel(0.0, 1.0), 5.0, h=0.01)
    assert np.all(grid.values == 0.0)


def test_solve_k_exponential_closed_form():
    # K(t) = (alpha/kappa)(1 - exp(-kappa t)) solves the cluster-size equation
    grid = solve_K(ExpKernel(1.0, 2.0), 10.0, h=0.005)
    for t in (1.0, 5.0, 10.0):
        assert grid.at(t) == pytest.approx(1.0 - math.exp(-t), abs=5e-5)
    assert grid.at(10.0) == pytest.approx(1.0, abs=1e-3)  # eta/(1-eta)


def test_solve_k_halving_consistency():
    coarse = solve_K(ExpKernel(1.0, 2.0), 10.0, h=0.01)
    fine = solve_K(ExpKernel(1.0, 2.0), 10.0, h=0.005)
    for t in (1.0, 5.0, 10.0):
        assert abs(coarse.at(t) - fine.at(t)) < 1e-4


def test_solve_k_monotone_nonneg():
    for ker in (ExpKernel(1.0, 2.0), PowerLawKernel(0.5, 1.0, 2.0)):
        grid = solve_K(ker, 20.0, h=0.01)
        assert np.all(grid.values >= 0)
        assert np.all(np.diff(grid.values) >= 0)


def test_solve_m_poisson_case():
    grid = solve_M(
        RenewalDensity.exponential(1.0), ExpKernel(0.0, 1.0), 10.0, h=0.0025
    )
    assert grid.at(10.0) == pytest.approx(10.0, abs=1e-4)


def test_solve_m_exponential_closed_form():
    # Poisson immigrants at rate lam: M(t) = lam beta t / kappa
    #                                        - lam alpha (1 - e^{-kappa t})/kappa^2
    grid = solve_M(
        RenewalDensity.exponential(0.5), ExpKernel(1.0, 2.0), 10.0, h=0.0025
    )
    for t in (1.0, 5.0, 10.0):
        expect = t - 0.5 * (1.0 - math.exp(-t))
        assert grid.at(t) == pytest.approx(expect, abs=5e-4)


def test_richardson_order():
    sols = [solve_M(RenewalDensity.exponential(0.5), ExpKernel(1.0, 2.0), 20.0, h=h)
            for h in (0.08, 0.04, 0.02)]
    d1 = np.max(np.abs(sols[0].values - sols[1].values[::2]))
    d2 = np.max(np.abs(sols[1].values - sols[2].values[::2]))
    assert d1 / d2 == pytest.approx(4.0, abs=0.5)


def test_solve_m_self_check_matches_fixed_step():
    auto = solve_M(RenewalDensity.exponential(0.5), ExpKernel(1.0, 2.0), 10.0)
    fixed = solve_M(RenewalDensity.exponential(0.5), ExpKernel(1.0, 2.0), 10.0,
                    h=auto.h)
    assert np.array_equal(auto.values, fixed.values)
    assert auto.at(10.0) == pytest.approx(10.0 - 0.5 * (1 - math.exp(-10)), abs=1e-3)


def test_solve_m_nondecreasing():
    grid = solve_M(
        RenewalDensity.gamma(2.0, 2.0), ExpKernel(1.0, 2.0), 30.0, h=0.01
    )
    assert np.all(grid.values >= 0)
    assert np.all(np.diff(grid.values) >= 0)


def test_m_rate_approaches_lln():
    # with exponential immigrants M(t)/t -> lam/(1-eta)
    lam, eta = 0.5, 0.5
    horizon = 200.0 / ((1 - eta) * lam)
    grid = solve_M(
        RenewalDensity.exponential(lam), ExpKernel(1.0, 2.0), horizon, h=0.05
    )
    assert grid.at(horizon) / horizon == pytest.approx(lam / (1 - eta), rel=0.05)


def test_m_matches_cluster_simulation():
    grid = solve_M(
        RenewalDensity.exponential(0.5), ExpKernel(1.0, 2.0), 20.0, h=0.005
    )
    counts = np.array(
        [len(simulate_cluster(0.5, ExpKernel(1.0, 2.0), 20.0, s)) for s in range(500)]
    )
    assert counts.mean() == pytest.approx(grid.at(20.0), rel=0.05)


def test_m_matches_renewal_simulation_gamma():
    model = RenewalHawkesModel(RenewalDensity.gamma(2.0, 2.0), ExpKernel(1.0, 2.0))
    grid = solve_M(model.g, model.kernel, 50.0, h=0.01)
    counts10 = []
    counts50 = []
    for s in range(2000):
        ev = simulate_renewal_hawkes(model, 50.0, s)
        counts10.append(int(np.sum(ev.times <= 10.0)))
        counts50.append(len(ev))
    assert np.mean(counts10) == pytest.approx(grid.at(10.0), rel=0.03)
    assert np.mean(counts50) == pytest.approx(grid.at(50.0), rel=0.03)
