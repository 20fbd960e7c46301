import numpy as np
import pytest
from scipy import integrate

from hawkes import (
    BranchingMatrix,
    ExpKernel,
    HawkesModel,
    MultivariateHawkesModel,
    PowerLawKernel,
    branching_matrix,
    branching_ratio,
    conditional_intensity,
    intensity_k,
    is_stationary_mv,
    spectral_radius,
)

from conftest import make_events


def _exp(a, b=1.0):
    return ExpKernel(a, b)


def test_intensity_k_no_events():
    model = MultivariateHawkesModel(2, [0.7, 1.1], [[_exp(0.0)] * 2] * 2)
    ev = make_events([], horizon=5.0, dims=[])
    assert intensity_k(model, ev, 1, 2.0) == 0.7
    assert intensity_k(model, ev, 2, 2.0) == 1.1


def test_intensity_k_d1_matches_core():
    model = MultivariateHawkesModel(1, 0.5, [[ExpKernel(1.0, 2.0)]])
    uni = HawkesModel(0.5, ExpKernel(1.0, 2.0))
    times = [0.5, 1.0, 2.5]
    mv_ev = make_events(times, horizon=4.0, dims=[1, 1, 1])
    uni_ev = make_events(times, horizon=4.0)
    for t in (0.3, 1.0, 3.9):
        assert intensity_k(model, mv_ev, 1, t) == pytest.approx(
            conditional_intensity(uni, uni_ev, t), rel=1e-14
        )


def test_intensity_k_cross_excitation():
    zero = _exp(0.0)
    model = MultivariateHawkesModel(
        2, [1.0, 1.0], [[zero, ExpKernel(0.5, 1.0)], [zero, zero]]
    )
    ev = make_events([1.0], horizon=3.0, dims=[1])
    assert intensity_k(model, ev, 2, 2.0) == pytest.approx(
        1.0 + 0.5 * np.exp(-1.0), rel=1e-14
    )
    assert intensity_k(model, ev, 1, 2.0) == 1.0  # no self-excitation here


def test_intensity_k_invalid_dim():
    model = MultivariateHawkesModel(2, [1.0, 1.0], [[_exp(0.0)] * 2] * 2)
    ev = make_events([], horizon=1.0, dims=[])
    with pytest.raises(ValueError):
        intensity_k(model, ev, 3, 0.5)


def test_branching_matrix_values():
    zero = _exp(0.0)
    model = MultivariateHawkesModel(2, [1.0, 1.0], [[zero, zero], [zero, zero]])
    assert np.array_equal(branching_matrix(model).phi, np.zeros((2, 2)))

    model = MultivariateHawkesModel(
        2, [1.0, 1.0], [[ExpKernel(1.0, 2.0), zero], [zero, ExpKernel(1.0, 2.0)]]
    )
    assert np.allclose(branching_matrix(model).phi, np.diag([0.5, 0.5]))


def test_branching_matrix_mixed_vs_quadrature():
    pl = PowerLawKernel(0.4, 0.8, 2.5)
    ek = ExpKernel(0.7, 1.3)
    model = MultivariateHawkesModel(2, [1.0, 1.0], [[pl, ek], [ek, pl]])
    phi = branching_matrix(model).phi
    ref_pl, _ = integrate.quad(lambda s: float(pl.evaluate(s)), 0, np.inf)
    ref_ek, _ = integrate.quad(lambda s: float(ek.evaluate(s)), 0, np.inf)
    assert phi[0, 0] == pytest.approx(ref_pl, rel=1e-8)
    assert phi[0, 1] == pytest.approx(ref_ek, rel=1e-8)


def test_spectral_radius_diag_and_nilpotent():
    assert spectral_radius(np.diag([0.5, 0.3])) == pytest.approx(0.5, abs=1e-10)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == 0.0


def test_spectral_radius_closed_form_2x2():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a, b, c, d = rng.uniform(0, 1.5, size=4)
        m = np.array([[a, b], [c, d]])
        disc = ((a - d) ** 2 + 4 * b * c) ** 0.5
        rho = max(abs((a + d + disc) / 2), abs((a + d - disc) / 2))
        assert spectral_radius(m) == pytest.approx(rho, rel=1e-8)


def test_spectral_radius_matches_numpy_eig():
    rng = np.random.default_rng(8)
    for n in (2, 3, 5):
        m = rng.uniform(0, 1, size=(n, n))
        ref = float(np.max(np.abs(np.linalg.eigvals(m))))
        assert spectral_radius(m) == pytest.approx(ref, rel=1e-8)


def test_spectral_radius_defective_and_periodic():
    assert spectral_radius(np.array([[0.5, 0.4], [0.0, 0.5]])) == pytest.approx(
        0.5, rel=1e-9
    )
    assert spectral_radius(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(
        1.0, rel=1e-9
    )


def test_spectral_radius_transpose_and_scaling():
    rng = np.random.default_rng(10)
    m = rng.uniform(0, 1, size=(3, 3))
    assert spectral_radius(m) == pytest.approx(spectral_radius(m.T), rel=1e-8)
    assert spectral_radius(2.5 * m) == pytest.approx(
        2.5 * spectral_radius(m), rel=1e-8
    )


def test_is_stationary_mv():
    zero = _exp(0.0)
    model = MultivariateHawkesModel(2, [1.0, 1.0], [[zero, zero], [zero, zero]])
    assert is_stationary_mv(model) == (True, 0.0)

    boundary = MultivariateHawkesModel(1, 1.0, [[ExpKernel(1.0, 1.0)]])
    stat, rho = is_stationary_mv(boundary)
    assert not stat and rho == pytest.approx(1.0, abs=1e-9)

    tri = MultivariateHawkesModel(
        2, [1.0, 1.0], [[ExpKernel(0.5, 1.0), ExpKernel(0.4, 1.0)],
                        [zero, ExpKernel(0.5, 1.0)]]
    )
    stat, rho = is_stationary_mv(tri)
    assert stat and rho == pytest.approx(0.5, rel=1e-9)


def test_d1_radius_equals_branching_ratio():
    ker = ExpKernel(0.8, 1.7)
    model = MultivariateHawkesModel(1, 1.0, [[ker]])
    assert is_stationary_mv(model)[1] == pytest.approx(
        branching_ratio(ker), abs=1e-12
    )


def test_model_validation():
    with pytest.raises(ValueError):
        MultivariateHawkesModel(2, [1.0, 1.0], [[_exp(-0.5)] * 2] * 2)
    with pytest.raises(ValueError):
        MultivariateHawkesModel(2, [1.0], [[_exp(0.0)] * 2] * 2)
    with pytest.raises(ValueError):
        MultivariateHawkesModel(2, [1.0, 1.0], [[_exp(0.0)] * 2])
    with pytest.raises(ValueError):
        BranchingMatrix(np.array([[0.1, -0.2], [0.0, 0.1]]))
