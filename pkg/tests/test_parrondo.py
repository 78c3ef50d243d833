import numpy as np
import pytest
from numpy.testing import assert_allclose

from stochlab.errors import InvalidInputError, OutOfSupportError
from stochlab.models.games import GameSpec, HistoryGameSpec, LatticeDistribution
from stochlab.numerics import eigen_leading
from stochlab.parrondo import (
    asymptotic_profile,
    binary_rate_function,
    capital_dependent_game,
    chain_step,
    exact_pmf,
    history_rate_variance,
    ladder_evolve,
    ladder_step,
    mix_strategies,
    parity_class,
    q_matrix,
    rate_bounds,
    rate_triangle,
    rate_variance,
    rung_sum,
    simulate_history_game,
    uniform_game,
)

EPS = 0.005
GAME_A = capital_dependent_game(0.1 - EPS, 0.75 - EPS)
GAME_B = uniform_game(0.5 - EPS, M=3)


def _random_spec(rng, bipartite=False, max_m=5):
    M = int(rng.integers(1, max_m + 1))
    p = rng.uniform(0.05, 0.95, size=M)
    q = 1 - p if bipartite else (1 - p) * rng.uniform(0.1, 1.0, size=M)
    return GameSpec(M=M, p=list(p), q=list(q))


# --- Ecuación maestra ---
def test_single_chain_step():
    dist = chain_step(LatticeDistribution.delta(1), GameSpec(M=1, p=[0.6], q=[0.4]))
    assert dist.mass(1) == pytest.approx(0.6)
    assert dist.mass(-1) == pytest.approx(0.4)
    assert dist.mass(0) == 0.0


def test_chain_step_requires_scalar_chain():
    with pytest.raises(InvalidInputError):
        chain_step(LatticeDistribution.delta(3), GAME_B)


def test_pure_hold_is_frozen():
    dist = ladder_evolve(GameSpec(M=2, p=[0.0, 0.0], q=[0.0, 0.0]), 10)
    assert dist.mass(0, 0) == pytest.approx(1.0)


def test_rung_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        ladder_step(LatticeDistribution.delta(2), GAME_B)


def test_mass_conserved_over_many_steps():
    dist = ladder_evolve(mix_strategies(GAME_A, GAME_B), 300)
    assert dist.masses.sum() == pytest.approx(1.0, abs=1e-12)


def test_capital_moments_match_rates():
    spec = GameSpec(M=1, p=[0.6], q=[0.4])
    mean, var = ladder_evolve(spec, 100).capital_moments()
    assert mean == pytest.approx(20.0)
    assert var == pytest.approx(96.0)


# --- Matriz de transferencia ---
def test_scalar_transfer_matrix():
    spec = GameSpec(M=1, p=[0.5], q=[0.3])
    kappa = 0.3
    expected = 0.5 * np.exp(-kappa) + 0.3 * np.exp(kappa) + 0.2
    assert q_matrix(spec, kappa).entries[0, 0] == pytest.approx(expected)


def test_transfer_matrix_is_column_stochastic():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert_allclose(q_matrix(_random_spec(rng), 0.0).column_sums(), 1.0, atol=1e-14)


def test_even_ladder_has_plus_minus_pair():
    spec = GameSpec(M=2, p=[0.3, 0.8])
    eigenvalues = np.linalg.eigvals(q_matrix(spec, 0.0).entries)
    assert np.any(np.isclose(eigenvalues, 1.0))
    assert np.any(np.isclose(eigenvalues, -1.0))
    assert rate_variance(spec).degenerate


@pytest.mark.parametrize("M", [2, 4])
def test_bipartite_spectrum_is_symmetric(M):
    rng = np.random.default_rng(M)
    p = rng.uniform(0.1, 0.9, size=M)
    entries = q_matrix(GameSpec(M=M, p=list(p)), 0.0).entries
    w, v = np.linalg.eig(entries)
    signs = (-1.0) ** np.arange(M)
    for i in range(M):
        flipped = signs * v[:, i]
        assert_allclose(entries @ flipped, -w[i] * flipped, atol=1e-12)


def test_even_ladder_minus_one_vector_sums_to_zero():
    rng = np.random.default_rng(1)
    for _ in range(20):
        M = int(rng.choice([2, 4]))
        spec = GameSpec(M=M, p=list(rng.uniform(0.1, 0.9, size=M)))
        w, v = np.linalg.eig(q_matrix(spec, 0.0).entries)
        minus = v[:, int(np.argmin(np.abs(w + 1.0)))]
        assert abs(minus.sum()) < 1e-10


# --- Tasa y varianza ---
def test_scalar_rate_and_variance():
    rates = rate_variance(GameSpec(M=1, p=[0.6], q=[0.4]))
    assert rates.r == pytest.approx(0.2, abs=1e-12)
    assert rates.K == pytest.approx(0.96, abs=1e-9)


def test_scalar_variance_with_holding():
    p, q = 0.3, 0.5
    rates = rate_variance(GameSpec(M=1, p=[p], q=[q]))
    assert rates.r == pytest.approx(p - q, abs=1e-12)
    assert rates.K == pytest.approx(p + q - (p - q) ** 2, abs=1e-9)


@pytest.mark.parametrize("spec, r, curvature", [
    (GAME_A, -0.002898428905, 0.05281583411),
    (GAME_B, -0.0033333333, 0.1111111110),
    (mix_strategies(GAME_A, GAME_B), 0.005234741795, 0.09707276331),
])
def test_capital_dependent_rates(spec, r, curvature):
    rates = rate_variance(spec)
    assert rates.r == pytest.approx(r, abs=1e-9)
    assert rates.curvature == pytest.approx(curvature, abs=1e-9)
    assert rates.K >= 0
    assert rates.capital_rate == pytest.approx(3 * rates.r)


def test_parrondo_effect_on_ladder():
    assert rate_variance(GAME_A).r < 0
    assert rate_variance(GAME_B).r < 0
    assert rate_variance(mix_strategies(GAME_A, GAME_B)).r > 0


def test_fair_ladder_has_zero_rate():
    assert rate_variance(uniform_game(0.5, M=3)).r == pytest.approx(0.0, abs=1e-12)


def test_no_parrondo_effect_on_scalar_chain():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = GameSpec(M=1, p=[rng.uniform(0, 0.5)], q=[rng.uniform(0, 0.5)])
        b = GameSpec(M=1, p=[rng.uniform(0, 0.5)], q=[rng.uniform(0, 0.5)])
        mixed = rate_variance(mix_strategies(a, b)).r
        assert mixed == pytest.approx((rate_variance(a).r + rate_variance(b).r) / 2, abs=1e-12)


def test_mix_with_itself_is_identity():
    assert mix_strategies(GAME_A, GAME_A) == GAME_A


def test_mix_rejects_rung_mismatch():
    with pytest.raises(InvalidInputError):
        mix_strategies(GAME_A, uniform_game(0.5))


def test_rate_triangle_agrees():
    rng = np.random.default_rng(3)
    for _ in range(100):
        values = list(rate_triangle(_random_spec(rng)).values())
        assert max(values) - min(values) < 1e-10


def test_parity_classes():
    assert parity_class(GameSpec(M=2, p=[0.2, 0.2], q=[0.3, 0.3])) == "aperiodic"
    assert parity_class(GAME_A) == "odd"
    assert parity_class(uniform_game(0.4, M=2)) == "even"


# --- Distribución exacta ---
def test_exact_two_steps():
    dist = exact_pmf(GameSpec(M=1, p=[0.6], q=[0.4]), 2)
    assert dist.mass(2) == pytest.approx(0.36, abs=1e-12)
    assert dist.mass(0) == pytest.approx(0.48, abs=1e-12)
    assert dist.mass(-2) == pytest.approx(0.16, abs=1e-12)


def test_exact_matches_master_equation():
    rng = np.random.default_rng(4)
    for _ in range(10):
        spec = _random_spec(rng, bipartite=bool(rng.integers(0, 2)))
        a = exact_pmf(spec, 100)
        b = ladder_evolve(spec, 100)
        lo, hi = min(a.n_min, b.n_min), max(a.n_max, b.n_max)
        assert np.max(np.abs(a.aligned(lo, hi) - b.aligned(lo, hi))) < 1e-10


def test_exact_from_other_rung():
    spec = GameSpec(M=3, p=[0.3, 0.6, 0.5], q=[0.4, 0.3, 0.5])
    start = np.zeros((3, 1))
    start[2, 0] = 1.0
    b = ladder_evolve(spec, 40, LatticeDistribution(t=0, n_min=0, masses=start))
    a = exact_pmf(spec, 40, l0=2)
    lo, hi = min(a.n_min, b.n_min), max(a.n_max, b.n_max)
    assert np.max(np.abs(a.aligned(lo, hi) - b.aligned(lo, hi))) < 1e-10


def test_exact_input_checks():
    with pytest.raises(InvalidInputError):
        exact_pmf(GAME_A, 10_001)
    with pytest.raises(InvalidInputError):
        exact_pmf(GAME_A, 5, l0=3)


def test_parity_support_law():
    rng = np.random.default_rng(5)
    for _ in range(100):
        spec = _random_spec(rng, bipartite=True)
        t = int(rng.integers(1, 51))
        dist = ladder_evolve(spec, t)
        ll, nn = np.meshgrid(np.arange(spec.M), dist.ns, indexing="ij")
        forbidden = (ll + nn * spec.M + t) % 2 == 1
        assert np.all(dist.masses[forbidden] == 0.0)


@pytest.mark.parametrize("t", [100, 200])
def test_mixed_game_peak_drifts(t):
    ns, summed = rung_sum(exact_pmf(mix_strategies(GAME_A, GAME_B), t))
    peak = ns[int(np.argmax(summed))]
    assert abs(peak - 0.0052 * t) <= 2


def test_odd_ladder_rung_sum_oscillates():
    ns, summed = rung_sum(exact_pmf(mix_strategies(GAME_A, GAME_B), 200))
    i = int(np.argmax(summed))
    assert summed[i] / summed[i + 1] > 1.5
    assert summed[i] / summed[i - 1] > 1.5


def test_even_ladder_rung_sum_is_smooth():
    ns, summed = rung_sum(exact_pmf(GameSpec(M=2, p=[0.4, 0.55]), 200))
    i = int(np.argmax(summed))
    assert abs(summed[i + 1] / summed[i] - 1) < 0.1
    assert abs(summed[i - 1] / summed[i] - 1) < 0.1


# --- Perfil asintótico ---
def test_binary_profile_matches_closed_form():
    p = 0.6
    xs = np.linspace(-0.8, 0.8, 9)
    profile = asymptotic_profile(GameSpec(M=1, p=[p]), 100, xs)
    assert_allclose(profile.u, binary_rate_function(p, xs), atol=1e-10)


def test_profile_vanishes_at_the_rate():
    profile = asymptotic_profile(GameSpec(M=1, p=[0.6]), 100, [0.2])
    assert profile.u[0] == pytest.approx(0.0, abs=1e-12)


def test_profile_against_exact_at_peak():
    spec = GameSpec(M=1, p=[0.6])
    t = 400
    profile = asymptotic_profile(spec, t, [0.2])
    exact = exact_pmf(spec, t).mass(80)
    assert profile.summed[0] == pytest.approx(exact, rel=0.02)


def test_profile_outside_support():
    with pytest.raises(OutOfSupportError):
        asymptotic_profile(GameSpec(M=1, p=[0.6]), 100, [1.5])
    lo, hi = rate_bounds(mix_strategies(GAME_A, GAME_B))
    assert lo < 0.005234741795 < hi


def test_profile_starts_from_a_single_rung():
    spec = GameSpec(M=3, p=[0.3, 0.5, 0.6], q=[0.5, 0.3, 0.3])
    base = asymptotic_profile(spec, 200, [0.0, 0.1], l0=0)
    shifted = asymptotic_profile(spec, 200, [0.0, 0.1], l0=1)
    # el peldaño inicial solo reescala la columna por y_{l0}
    ratio = shifted.masses / base.masses
    assert_allclose(ratio, ratio[0], rtol=1e-10)
    assert_allclose(shifted.u, base.u)
    for l0 in (-1, 3):
        with pytest.raises(InvalidInputError):
            asymptotic_profile(spec, 200, [0.0], l0=l0)


def test_rate_bounds_from_extreme_paths():
    assert rate_bounds(mix_strategies(GAME_A, GAME_B)) == pytest.approx((-1 / 3, 1 / 3))
    assert rate_bounds(GameSpec(M=1, p=[0.6])) == pytest.approx((-1.0, 1.0))
    assert rate_bounds(GameSpec(M=2, p=[0.0, 0.5], q=[0.5, 0.5])) == pytest.approx((-0.5, 0.0))
    with pytest.raises(OutOfSupportError):
        asymptotic_profile(GameSpec(M=2, p=[0.0, 0.5], q=[0.5, 0.5]), 100, [0.1])


@pytest.mark.parametrize("kappa", [-40.0, 40.0])
def test_transfer_matrix_eigenpair_at_large_momentum(kappa):
    lead = eigen_leading(q_matrix(mix_strategies(GAME_A, GAME_B), kappa))
    assert (lead.left @ lead.right) == pytest.approx(1.0)
    assert lead.eigenvalue.real > 0


def test_ladder_profile_across_rate_range():
    spec = mix_strategies(GAME_A, GAME_B)
    xs = [-0.3, -0.1, 0.005, 0.1, 0.3]
    profile = asymptotic_profile(spec, 200, xs)
    assert np.all(np.isfinite(profile.u))
    assert np.all(profile.u <= 1e-12)
    assert np.argmax(profile.u) == 2


def test_ladder_profile_tracks_exact_shape():
    spec = mix_strategies(GAME_A, GAME_B)
    t = 1000
    ns, summed = rung_sum(exact_pmf(spec, t))
    n_peak = ns[int(np.argmax(summed))]
    profile = asymptotic_profile(spec, t, [n_peak / t])
    assert profile.summed[0] == pytest.approx(summed.max(), rel=0.05)


# --- Juego con memoria ---
def test_history_independent_reduces_to_chain():
    p = 0.65
    rates = history_rate_variance(HistoryGameSpec(p1=p, p2=p, p3=p, p4=p))
    assert rates.r == pytest.approx(2 * p - 1, abs=1e-10)
    fair = history_rate_variance(HistoryGameSpec(p1=0.5, p2=0.5, p3=0.5, p4=0.5))
    assert fair.r == pytest.approx(0.0, abs=1e-12)
    assert fair.K == pytest.approx(1.0, abs=1e-8)


def test_history_rate_against_monte_carlo():
    spec = HistoryGameSpec(p1=0.9, p2=0.1, p3=0.7, p4=0.3)
    steps = 2000
    rates = history_rate_variance(spec)
    mc = simulate_history_game(spec, steps, seed=7, walkers=500)
    assert abs(mc["drift"] - rates.r) < 3 * mc["stderr"] + 2.0 / steps
