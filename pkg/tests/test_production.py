import numpy as np
import pytest
from numpy.testing import assert_allclose

from stochlab.errors import GridOverflowError, InvalidInputError, OutOfRegimeError
from stochlab.models.production import NoiseSpec, ProductionModelSpec
from stochlab.production import (
    delta_cumulants,
    depreciation_volatility,
    depreciation_volatility_small_d,
    evolve_pdf,
    evolve_to,
    initial_state,
    kurtosis_diagnostic,
    log_production_moments,
    memoryless_slope,
    memoryless_variance,
    memoryless_variance_finite,
    moment_closed_forms,
    narrow_limit_check,
    production_tables,
    saddle_moments,
    simulate_memoryless,
    simulate_paths,
    softplus,
    softplus_inverse,
    volatility_map,
    volatility_moments,
    volatility_pdf,
    wright_price,
)

from conftest import gaussian_pdf


def _spec(g=0.2, sigma=0.1, d=0.0):
    return ProductionModelSpec(g=g, noise=NoiseSpec.gaussian(sigma), d=d)


def _ks_distance(cdf, samples):
    """Distancia sup entre una CDF y la CDF empírica de las muestras."""
    xs = np.sort(samples)
    model = cdf(xs)
    upper = np.arange(1, xs.size + 1) / xs.size
    lower = np.arange(0, xs.size) / xs.size
    return float(max(np.max(np.abs(model - upper)), np.max(np.abs(model - lower))))


# --- Mapas elementales ---
def test_softplus_inverse_roundtrip():
    w = np.array([-20.0, -1.0, 0.0, 3.0, 40.0])
    assert_allclose(softplus_inverse(softplus(w)), w, rtol=1e-9, atol=1e-9)
    assert softplus_inverse(np.array([0.0]))[0] == -np.inf


def test_volatility_map_is_involution():
    y = np.array([0.01, 0.5, 2.0, 7.0])
    assert_allclose(volatility_map(volatility_map(y)), y, rtol=1e-10)


# --- Simulación ---
def test_zero_noise_paths_are_geometric_sums():
    g, t = 0.2, 10
    sim = simulate_paths(ProductionModelSpec(g=g, noise=NoiseSpec.none()), t, 3, seed=0)
    log_z, _ = sim.at(t)
    assert_allclose(log_z, np.log((1 - np.exp(g * (t + 1))) / (1 - np.exp(g))), rtol=1e-12)


def test_zero_growth_zero_noise():
    sim = simulate_paths(ProductionModelSpec(g=0.0, noise=NoiseSpec.none()), 7, 2, seed=0)
    assert_allclose(np.exp(sim.at(7)[0]), 8.0)


def test_simulation_deterministic_under_seed():
    spec = _spec()
    a = simulate_paths(spec, 20, 1000, seed=5, times=[5, 20])
    b = simulate_paths(spec, 20, 1000, seed=5, times=[5, 20])
    np.testing.assert_array_equal(a.log_z, b.log_z)
    assert a.times == [5, 20]


def test_simulation_rejects_bad_times():
    with pytest.raises(InvalidInputError):
        simulate_paths(_spec(), 10, 10, seed=0, times=[11])
    with pytest.raises(InvalidInputError):
        simulate_paths(_spec(), 10, 0, seed=0)


def test_monte_carlo_tanh_law():
    spec = _spec(g=0.2, sigma=0.05)
    _, delta = simulate_paths(spec, 200, 100_000, seed=1).at(200)
    assert np.var(delta, ddof=1) == pytest.approx(0.0025 * np.tanh(0.1), rel=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("g", [0.1, 0.2, 0.3])
@pytest.mark.parametrize("sigma", [0.01, 0.05])
def test_tanh_law_grid(g, sigma):
    spec = _spec(g=g, sigma=sigma)
    expected = sigma ** 2 * np.tanh(g / 2)
    _, delta = simulate_paths(spec, 200, 100_000, seed=2).at(200)
    assert np.var(delta, ddof=1) == pytest.approx(expected, rel=0.05)
    state = evolve_to(spec, 200, track_z=False)[200]
    assert volatility_moments(state).c2 == pytest.approx(expected, rel=0.02)


# --- Recursión de densidades ---
def test_initial_state_is_delta_at_zero():
    state = initial_state(_spec())
    assert state.t == 0
    assert state.z.total() == pytest.approx(1.0)
    assert state.z.centers[0] == pytest.approx(0.0)


def test_one_deterministic_step():
    g = 0.3
    spec = ProductionModelSpec(g=g, noise=NoiseSpec.none())
    state = evolve_pdf(initial_state(spec), spec)
    peak = state.z.centers[int(np.argmax(state.z.masses))]
    assert peak == pytest.approx(np.log1p(np.exp(g)), abs=state.z.dx)
    assert state.t == 1


def test_recursion_keeps_normalization_and_support():
    states = evolve_to(_spec(sigma=0.5), 20, times=[1, 10, 20])
    for state in states.values():
        assert state.z.total() == pytest.approx(1.0, abs=1e-12)
        assert state.rho_z.mass() == pytest.approx(1.0, abs=1e-6)
        assert state.rho_y.mass() == pytest.approx(1.0, abs=1e-6)
        assert state.z.edges[0] >= 0.0


@pytest.mark.parametrize("noise", [NoiseSpec.gaussian(0.5), NoiseSpec.lorentzian(0.1)])
@pytest.mark.parametrize("t", [5, 20])
def test_recursion_matches_monte_carlo(noise, t):
    spec = ProductionModelSpec(g=0.2, noise=noise)
    state = evolve_to(spec, t)[t]
    log_z, delta = simulate_paths(spec, t, 200_000, seed=3).at(t)
    assert _ks_distance(state.z.cdf_at, log_z) < 0.01
    delta_cdf = lambda x: 1.0 - state.y.cdf_at(volatility_map(x))
    assert _ks_distance(delta_cdf, delta) < 0.01


def test_depreciation_recursion_matches_monte_carlo():
    spec = _spec(sigma=0.3, d=0.1)
    t = 10
    state = evolve_to(spec, t)[t]
    log_z, delta = simulate_paths(spec, t, 100_000, seed=4).at(t)
    shifted = log_production_moments(state).c1 + t * np.log1p(-spec.d)
    assert shifted == pytest.approx(log_z.mean(), abs=0.01)
    assert volatility_moments(state, spec).c1 == pytest.approx(delta.mean(), abs=0.005)


def test_custom_noise_matches_gaussian():
    gaussian = _spec(sigma=0.3)
    custom = ProductionModelSpec(g=0.2, noise=NoiseSpec.custom(gaussian_pdf(0.0, 0.3, dx=0.001)))
    a = log_production_moments(evolve_to(gaussian, 5)[5])
    b = log_production_moments(evolve_to(custom, 5)[5])
    assert b.c1 == pytest.approx(a.c1, abs=1e-3)
    assert b.c2 == pytest.approx(a.c2, rel=1e-2)


def test_grid_overflow_reports_suggestion():
    with pytest.raises(GridOverflowError) as info:
        evolve_to(_spec(sigma=0.3), 20, max_x=1.0)
    assert info.value.suggested_max > 1.0
    assert info.value.leaked_mass > 1e-4


# --- Densidad de la volatilidad ---
def test_zero_noise_volatility_concentrates_at_g():
    spec = ProductionModelSpec(g=0.2, noise=NoiseSpec.none())
    state = evolve_to(spec, 100, track_z=False)[100]
    pdf = volatility_pdf(state)
    assert pdf.mass() == pytest.approx(1.0, abs=1e-6)
    assert pdf.mean() == pytest.approx(0.2, abs=2 * state.y.dx)


def test_wide_noise_volatility_is_normalized():
    spec = _spec(g=0.2, sigma=1.0)
    state = evolve_to(spec, 30, track_z=False)[30]
    pdf = volatility_pdf(state)
    assert pdf.mass() == pytest.approx(1.0, abs=1e-6)
    assert pdf.x0 < 0.01


def test_volatility_pdf_on_explicit_grid():
    spec = _spec(g=0.2, sigma=0.1)
    state = evolve_to(spec, 50, track_z=False)[50]
    pdf = volatility_pdf(state, x_grid=np.arange(0.0005, 1.0, 0.001))
    assert pdf.density.sum() * pdf.dx == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(InvalidInputError):
        volatility_pdf(state, x_grid=[-0.1, 0.0, 0.1])
    with pytest.raises(InvalidInputError):
        volatility_pdf(state, x_grid=[0.1, 0.2, 0.4])


def test_narrow_limit_ratio_near_one():
    ratio = narrow_limit_check(_spec(g=0.1, sigma=0.01), 400)
    assert 0.98 <= ratio <= 1.02


@pytest.mark.slow
def test_narrow_limit_curve_falls_below_one():
    sigmas = [0.1, 0.5, 1.0, 2.0]
    ratios = [narrow_limit_check(_spec(g=0.1, sigma=s), 400) for s in sigmas]
    assert ratios[0] == pytest.approx(1.0, abs=1e-3)
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[2] == pytest.approx(0.976, abs=0.01)
    assert ratios[3] == pytest.approx(0.919, abs=0.015)


@pytest.mark.slow
def test_wide_noise_volatility_against_monte_carlo():
    spec = _spec(g=0.1, sigma=1.0)
    t = 400
    state = evolve_to(spec, t, track_z=False)[t]
    _, delta = simulate_paths(spec, t, 100_000, seed=19, times=[t]).at(t)
    assert np.sqrt(volatility_moments(state).c2) == pytest.approx(np.std(delta, ddof=1), rel=0.02)
    saddle = np.sqrt(np.tanh(0.05))
    assert np.std(delta, ddof=1) < 0.99 * saddle


# --- Fórmulas cerradas ---
def test_stationary_variance():
    assert saddle_moments(_spec(g=0.2, sigma=0.1), 10).sigma_inf_sq == pytest.approx(0.01 / np.expm1(0.4))
    assert saddle_moments(_spec(g=0.2, sigma=0.1), 10).sigma_inf_sq == pytest.approx(0.020333, abs=1e-6)


def test_saddle_finite_t_converges_to_limit():
    m = saddle_moments(_spec(g=0.2, sigma=0.1), 1000)
    assert m.var_delta == pytest.approx(m.var_delta_asymptotic, abs=1e-10)
    assert m.var_log_z == pytest.approx(m.var_log_z_asymptotic, rel=1e-8)
    assert m.mean_log_z == pytest.approx(m.mean_log_z_asymptotic, rel=1e-8)


def test_saddle_limits_in_g():
    assert saddle_moments(_spec(g=30.0, sigma=0.1), 50).var_delta_asymptotic == pytest.approx(0.01)
    assert saddle_moments(_spec(g=1e-6, sigma=0.1), 50).var_delta_asymptotic < 1e-8
    with pytest.raises(OutOfRegimeError):
        saddle_moments(_spec(g=0.0), 10)
    with pytest.raises(InvalidInputError):
        saddle_moments(ProductionModelSpec(g=0.2, noise=NoiseSpec.lorentzian(0.1)), 10)


def test_third_cumulant_formula():
    assert delta_cumulants(_spec(g=0.2, sigma=0.1)).c3 == pytest.approx(1.5e-5)
    assert delta_cumulants(_spec(g=1e-6, sigma=0.1)).c3 == pytest.approx(0.0, abs=1e-9)


def test_measured_third_cumulant_is_positive():
    spec = _spec(g=0.2, sigma=0.05)
    measured = volatility_moments(evolve_to(spec, 200, track_z=False)[200]).c3
    predicted = delta_cumulants(spec).c3
    assert measured > 0
    assert measured < 10 * predicted


@pytest.mark.parametrize("sigma", [0.05, 0.1, 0.2])
def test_kurtosis_follows_noise_cumulant(sigma):
    diag = kurtosis_diagnostic(_spec(g=0.2, sigma=sigma), 100)
    assert diag.c4_from_noise == 0.0
    assert diag.closer == "noise"
    assert abs(diag.measured_c4) < 0.1 * abs(diag.c4_alternative)


def test_memoryless_slope():
    assert memoryless_slope(0.1, 1.0) == pytest.approx(0.009508, abs=1e-6)
    v100 = memoryless_variance(0.1, 0.01, 100)
    v101 = memoryless_variance(0.1, 0.01, 101)
    assert v101 - v100 == pytest.approx(memoryless_slope(0.1, 0.01), rel=1e-12)


@pytest.mark.parametrize("t", [50, 100, 200])
def test_memoryless_monte_carlo(t):
    samples = simulate_memoryless(0.1, 0.01, t, 20_000, seed=t)
    assert np.var(samples, ddof=1) == pytest.approx(memoryless_variance(0.1, 0.01, t), rel=0.05)


def test_memoryless_finite_form_approaches_linear_law():
    assert memoryless_variance_finite(0.1, 0.01, 300) == pytest.approx(memoryless_variance(0.1, 0.01, 300), rel=1e-6)


def test_depreciation():
    assert depreciation_volatility(0.2, 0.1, 0.0) == pytest.approx(0.01 * np.tanh(0.1))
    assert depreciation_volatility(0.2, 1.0, 0.05) == pytest.approx(0.12499, abs=1e-5)
    d = 0.01
    gap = abs(depreciation_volatility(0.2, 1.0, d) - depreciation_volatility_small_d(0.2, 1.0, d))
    assert gap < d ** 2
    with pytest.raises(InvalidInputError):
        depreciation_volatility(0.2, 0.1, 1.0)


def test_moment_closed_forms_against_monte_carlo():
    spec = _spec(g=0.1, sigma=0.1)
    forms = moment_closed_forms(spec, 10)
    log_z, _ = simulate_paths(spec, 10, 100_000, seed=6).at(10)
    z = np.exp(log_z)
    assert z.mean() == pytest.approx(forms.mean_z, rel=5e-3)
    assert np.mean(z ** 2) == pytest.approx(forms.mean_z_sq, rel=1e-2)
    noiseless = moment_closed_forms(ProductionModelSpec(g=0.1, noise=NoiseSpec.none()), 10)
    assert noiseless.var_z == pytest.approx(0.0, abs=1e-9)


def test_wright_price():
    assert wright_price(10.0, 2, 1.0) == pytest.approx(5.0)
    assert_allclose(wright_price(1.0, [1, 4], 0.5), [1.0, 0.5])


def test_production_tables_columns():
    densities, table = production_tables(_spec(sigma=0.2), 10, times=[5, 10])
    assert list(table.columns) == ["t", "mean", "var", "c3", "c4", "var_delta"]
    assert list(table["t"]) == [5, 10]
    assert set(densities[10]) == {"z", "volatility"}
    assert (table["var"] > 0).all()
