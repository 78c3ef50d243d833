"""
Juegos de Parrondo: ecuación maestra sobre cadenas y escaleras de M
peldaños, matrices de transferencia Q̂(κ), tasa y varianza a partir del
autovalor dominante, distribuciones exactas a tiempo finito, perfiles
asintóticos de punto de silla y juegos dependientes de la historia.
"""
import logging
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import optimize

from stochlab.config import STENCIL_STEP
from stochlab.errors import InvalidInputError, NumericalFailureError, OutOfSupportError
from stochlab.models.games import (
    AsymptoticProfile,
    GameSpec,
    HistoryGameSpec,
    LatticeDistribution,
    RateVariance,
)
from stochlab.models.grids import ComplexMatrix
from stochlab.numerics import derivative, eigen_leading
from stochlab.utils.parallel import shard_generators, shard_sizes, thread_map

logger = logging.getLogger(__name__)

KAPPA_MAX = 40.0
KAPPA_STEPS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, KAPPA_MAX)
MAX_EXACT_T = 10_000
HISTORY_WALKERS_SHARD = 1000


# --- Constructores ---
def capital_dependent_game(p_rung0: float, p_other: float, M: int = 3) -> GameSpec:
    """Gana con p_rung0 si X mod M = 0 y con p_other en otro caso; nunca se mantiene."""
    p = [p_rung0] + [p_other] * (M - 1)
    return GameSpec(M=M, p=p, q=[1.0 - v for v in p])


def uniform_game(p: float, M: int = 1) -> GameSpec:
    return GameSpec(M=M, p=[p] * M, q=[1.0 - p] * M)


def mix_strategies(a: GameSpec, b: GameSpec) -> GameSpec:
    """Elegir al azar el juego en cada ronda: media peldaño a peldaño."""
    if a.M != b.M:
        raise InvalidInputError(f"M distintos: {a.M} vs {b.M}")
    return GameSpec(
        M=a.M,
        p=[(x + y) / 2 for x, y in zip(a.p, b.p)],
        q=[(x + y) / 2 for x, y in zip(a.q, b.q)],
    )


def parity_class(spec: GameSpec) -> str:
    """
    'aperiodic' si algún peldaño puede mantenerse; si no, 'odd' u 'even'
    según M. Con M impar la suma sobre peldaños oscila en n + t; con M par
    no oscila.
    """
    if not spec.is_bipartite:
        return "aperiodic"
    return "even" if spec.M % 2 == 0 else "odd"


# --- Ecuación maestra ---
def ladder_step(dist: LatticeDistribution, spec: GameSpec) -> LatticeDistribution:
    """
    Un paso de la ecuación maestra.

    Ganar desde el peldaño M-1 pasa al peldaño 0 de la celda n+1; perder desde
    el peldaño 0 pasa al peldaño M-1 de la celda n-1.
    """
    if dist.M != spec.M:
        raise InvalidInputError(f"la distribución tiene {dist.M} peldaños y el juego {spec.M}")
    M = spec.M
    P = dist.masses
    N = P.shape[1]
    new = np.zeros((M, N + 2))
    for l in range(M):
        new[l, 1:N + 1] += spec.hold[l] * P[l]
        win = 1 if l == M - 1 else 0
        new[(l + 1) % M, 1 + win:N + 1 + win] += spec.p[l] * P[l]
        loss = -1 if l == 0 else 0
        new[(l - 1) % M, 1 + loss:N + 1 + loss] += spec.q[l] * P[l]

    new = np.clip(new, 0.0, None)
    total = new.sum()
    if abs(total - 1.0) > 1e-10:
        raise NumericalFailureError(f"masa no conservada: {total:.15f}", residual=abs(total - 1.0))
    return LatticeDistribution(t=dist.t + 1, n_min=dist.n_min - 1, masses=new / total)


def chain_step(dist: LatticeDistribution, spec: GameSpec) -> LatticeDistribution:
    """Ecuación maestra de la cadena simple (M = 1)."""
    if spec.M != 1:
        raise InvalidInputError("chain_step requiere M = 1; use ladder_step")
    return ladder_step(dist, spec)


def ladder_evolve(spec: GameSpec, t: int, initial: Optional[LatticeDistribution] = None) -> LatticeDistribution:
    """Itera la ecuación maestra t pasos desde initial (δ en n = l = 0 por defecto)."""
    dist = initial or LatticeDistribution.delta(spec.M)
    for _ in range(t):
        dist = ladder_step(dist, spec)
    return dist


# --- Matrices de transferencia ---
def q_matrix(spec: GameSpec, kappa: complex) -> ComplexMatrix:
    """
    Q̂(κ)[destino, origen], con Σ_n P(n, t) e^{-κn} ≈ λ(κ)^t.

    Q̂(0) es estocástica por columnas.
    """
    M = spec.M
    q = np.zeros((M, M), dtype=complex)
    down, up = np.exp(-kappa), np.exp(kappa)
    for l in range(M):
        q[l, l] += spec.hold[l]
        q[(l + 1) % M, l] += spec.p[l] * (down if l == M - 1 else 1.0)
        q[(l - 1) % M, l] += spec.q[l] * (up if l == 0 else 1.0)
    return ComplexMatrix(entries=q)


def _q_matrix_slope(spec: GameSpec, kappa: float) -> np.ndarray:
    """dQ̂/dκ."""
    M = spec.M
    dq = np.zeros((M, M), dtype=complex)
    dq[0, M - 1] += -spec.p[M - 1] * np.exp(-kappa)
    dq[M - 1, 0] += spec.q[0] * np.exp(kappa)
    return dq


def history_q_matrix(spec: HistoryGameSpec, kappa: complex) -> ComplexMatrix:
    """Sistema 4×4 sobre las historias (-,-), (-,+), (+,-), (+,+)."""
    p1, p2, p3, p4 = spec.probabilities
    down, up = np.exp(-kappa), np.exp(kappa)
    return ComplexMatrix(entries=[
        [(1 - p1) * up, 0, (1 - p3) * up, 0],
        [p1 * down, 0, p3 * down, 0],
        [0, (1 - p2) * up, 0, (1 - p4) * up],
        [0, p2 * down, 0, p4 * down],
    ])


def _history_slope(spec: HistoryGameSpec, kappa: float) -> np.ndarray:
    p1, p2, p3, p4 = spec.probabilities
    down, up = np.exp(-kappa), np.exp(kappa)
    return np.array([
        [(1 - p1) * up, 0, (1 - p3) * up, 0],
        [-p1 * down, 0, -p3 * down, 0],
        [0, (1 - p2) * up, 0, (1 - p4) * up],
        [0, -p2 * down, 0, -p4 * down],
    ], dtype=complex)


# --- Tasa y varianza ---
def _log_lambda(builder):
    def V(kappa):
        lam = eigen_leading(builder(kappa)).eigenvalue
        if lam.real <= 0:
            raise NumericalFailureError(f"autovalor dominante no positivo en κ={kappa}: {lam}")
        return float(np.log(lam.real))
    return V


def _lambda(builder):
    return lambda kappa: float(eigen_leading(builder(kappa)).eigenvalue.real)


def _hellmann_feynman_slope(builder, slope, kappa: float) -> float:
    """V'(κ) = y·Q̂'(κ)·x / (λ y·x)."""
    lead = eigen_leading(builder(kappa))
    value = lead.left @ slope(kappa) @ lead.right / (lead.left @ lead.right)
    return float((value / lead.eigenvalue).real)


def _rate_variance(builder, slope, M: int, label: str) -> RateVariance:
    lead = eigen_leading(builder(0.0))
    if lead.degenerate:
        values = sorted(np.round([z.real for z in lead.maximal], 9))
        if values != [-1.0, 1.0]:
            logger.warning(f"⚠️ {label}: espectro degenerado más allá del par ±1: {lead.maximal}")
        else:
            logger.debug(f"{label}: par ±1 en κ=0, se sigue la rama +1")

    V = _log_lambda(builder)
    lam = _lambda(builder)
    r = -_hellmann_feynman_slope(builder, slope, 0.0)
    K = float(derivative(V, 0.0, 2, STENCIL_STEP))
    curvature = float(derivative(lam, 0.0, 2, STENCIL_STEP))
    if K < 0 and K > -1e-9:
        K = 0.0
    logger.info(f"✅ {label}: r={r:.12g}, K={K:.12g}, λ''(0)={curvature:.12g}")
    return RateVariance(
        M=M, r=r, K=K, curvature=curvature,
        capital_rate=M * r, capital_variance=M * M * K,
        degenerate=lead.degenerate,
        maximal=[(float(z.real), float(z.imag)) for z in lead.maximal],
    )


def rate_variance(spec: GameSpec) -> RateVariance:
    """
    r = -V'(0) por Hellmann-Feynman y K = V''(0) por stencil, V = ln λ(κ).

    Para M = 1: r = p - q y K = p + q - (p - q)².
    """
    return _rate_variance(lambda k: q_matrix(spec, k), lambda k: _q_matrix_slope(spec, k), spec.M, f"M={spec.M}")


def history_rate_variance(spec: HistoryGameSpec) -> RateVariance:
    return _rate_variance(lambda k: history_q_matrix(spec, k), lambda k: _history_slope(spec, k), 1, "historia")


def rate_triangle(spec: GameSpec) -> Dict[str, float]:
    """
    Tres expresiones de la tasa de red que deben coincidir:
    estado estacionario Σ(p_l - q_l)x_l / M, flujo de frontera
    p_{M-1}x_{M-1} - q_0x_0 y Hellmann-Feynman.
    """
    lead = eigen_leading(q_matrix(spec, 0.0))
    x = lead.right.real / lead.right.real.sum()
    stationary = float(np.dot(np.subtract(spec.p, spec.q), x)) / spec.M
    flux = float(spec.p[-1] * x[-1] - spec.q[0] * x[0])
    hf = -_hellmann_feynman_slope(lambda k: q_matrix(spec, k), lambda k: _q_matrix_slope(spec, k), 0.0)
    return {"stationary": stationary, "boundary_flux": flux, "hellmann_feynman": hf}


# --- Distribución exacta ---
def exact_pmf(spec: GameSpec, t: int, l0: int = 0) -> LatticeDistribution:
    """
    P_l(n, t) desde δ en (n=0, l0) por transformada discreta.

    Se evalúa Q̂(ik)^t en 2t+1 momentos equiespaciados y se invierte con la
    FFT; la normalización se fija para que la masa total sea 1.
    """
    if t < 0 or t > MAX_EXACT_T:
        raise InvalidInputError(f"t fuera de [0, {MAX_EXACT_T}]")
    if not 0 <= l0 < spec.M:
        raise InvalidInputError(f"peldaño inicial {l0} fuera de [0, {spec.M})")
    N = 2 * t + 1
    ks = 2.0 * np.pi * np.arange(N) / N
    stack = np.stack([q_matrix(spec, 1j * k).entries for k in ks])
    powers = np.linalg.matrix_power(stack, t)
    spectrum = powers[:, :, l0]
    values = np.fft.ifft(spectrum, axis=0).real
    # índice j <-> n = j mod N, con n en [-t, t]
    ns = np.arange(-t, t + 1)
    masses = np.clip(values[ns % N].T, 0.0, None)
    return LatticeDistribution(t=t, n_min=-t, masses=masses / masses.sum())


def rung_sum(dist: LatticeDistribution):
    """P̂(n, t) = Σ_l P_l(n, t)."""
    return dist.ns, dist.masses.sum(axis=0)


# --- Perfil asintótico ---
def _rate_at(spec: GameSpec, kappa: float) -> float:
    """-V'(κ)."""
    return -_hellmann_feynman_slope(lambda k: q_matrix(spec, k), lambda k: _q_matrix_slope(spec, k), kappa)


def rate_bounds(spec: GameSpec):
    """
    Intervalo abierto de tasas de red alcanzables por el perfil asintótico.

    Los extremos son los caminos que siempre ganan (+1/M celdas por paso) o
    siempre pierden (-1/M); un peldaño con p_l = 0 (q_l = 0) corta la subida
    (la bajada) y fija ese extremo en 0.
    """
    hi = 1.0 / spec.M if all(p > 0 for p in spec.p) else 0.0
    lo = -1.0 / spec.M if all(q > 0 for q in spec.q) else 0.0
    return lo, hi


def _saddle_bracket(spec: GameSpec, x: float):
    """Intervalo [-k, k] con -V'(-k) > x > -V'(k); k crece por duplicación hasta KAPPA_MAX."""
    for k in KAPPA_STEPS:
        if _rate_at(spec, -k) > x > _rate_at(spec, k):
            return -k, k
    raise OutOfSupportError(f"x = {x} demasiado cerca del borde del intervalo de tasas (|κ*| > {KAPPA_MAX})")


def _solve_saddle(spec: GameSpec, x: float) -> float:
    lo, hi = rate_bounds(spec)
    if not lo < x < hi:
        raise OutOfSupportError(f"x = {x} fuera del intervalo de tasas alcanzables ({lo:.6g}, {hi:.6g})")
    a, b = _saddle_bracket(spec, x)
    return optimize.brentq(lambda k: _rate_at(spec, k) - x, a, b, xtol=1e-14)


def asymptotic_profile(spec: GameSpec, t: int, xs: Sequence[float], l0: int = 0) -> AsymptoticProfile:
    """
    P_l(x·t, t) ≈ e^{t·u(x)} / √(2π t V''(κ*)) · x_l y_{l0} / (y·x).

    u(x) = V(κ*) + κ*·x es la transformada de Legendre, con κ* solución de
    -V'(κ*) = x. Si ningún peldaño puede mantenerse se aplica el factor
    [1 + (-1)^{l - l0 + nM + t}].

    Solo admite el estado inicial concentrado δ en (n = 0, peldaño l0): las
    amplitudes α y β de las dos subredes de paridad quedan fijadas por ese
    δ y son iguales. Otros estados iniciales no están soportados.
    """
    if t < 1:
        raise InvalidInputError("t debe ser >= 1")
    if not 0 <= l0 < spec.M:
        raise InvalidInputError(f"l0 = {l0} fuera de [0, {spec.M})")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    M = spec.M
    V = _log_lambda(lambda k: q_matrix(spec, k))
    u = np.empty(xs.size)
    masses = np.empty((M, xs.size))
    for i, x in enumerate(xs):
        kappa = _solve_saddle(spec, x)
        lead = eigen_leading(q_matrix(spec, kappa))
        v2 = float(derivative(V, kappa, 2, STENCIL_STEP))
        u[i] = float(np.log(lead.eigenvalue.real)) + kappa * x
        weight = (lead.right * lead.left[l0]).real / float((lead.left @ lead.right).real)
        masses[:, i] = np.exp(t * u[i]) / np.sqrt(2.0 * np.pi * t * v2) * weight

    if spec.is_bipartite:
        n = xs * t
        parity = np.arange(M)[:, None] - l0 + np.rint(n)[None, :] * M + t
        masses = masses * (1.0 + np.where(np.mod(parity, 2) == 0, 1.0, -1.0))
    return AsymptoticProfile(t=t, x=xs, u=u, masses=masses)


def binary_rate_function(p: float, x):
    """u(x) cerrada para M = 1 con p + q = 1."""
    x = np.asarray(x, dtype=float)
    q = 1.0 - p
    return -((1 + x) / 2 * np.log((1 + x) / (2 * p)) + (1 - x) / 2 * np.log((1 - x) / (2 * q)))


# --- Juego dependiente de la historia ---
def _history_shard(spec: HistoryGameSpec, steps: int, rng: np.random.Generator, walkers: int) -> np.ndarray:
    probs = np.array(spec.probabilities)
    history = rng.integers(0, 4, size=walkers)
    position = np.zeros(walkers, dtype=np.int64)
    for _ in range(steps):
        win = rng.random(walkers) < probs[history]
        position += np.where(win, 1, -1)
        history = 2 * (history % 2) + win
    return position


def simulate_history_game(spec: HistoryGameSpec, steps: int, seed: int, walkers: int = 1000) -> Dict[str, float]:
    """
    Monte-Carlo del paseo con memoria de dos pasos.

    Returns:
        dict con drift (media de X_T / T), su error estándar y la varianza por paso
    """
    if steps < 1 or walkers < 2:
        raise InvalidInputError("steps >= 1 y walkers >= 2")
    sizes = shard_sizes(walkers, HISTORY_WALKERS_SHARD)
    rngs = shard_generators(seed, len(sizes))
    final = np.concatenate(thread_map(lambda job: _history_shard(spec, steps, job[0], job[1]), list(zip(rngs, sizes))))
    drift = float(final.mean() / steps)
    stderr = float(final.std(ddof=1) / (steps * np.sqrt(walkers)))
    return {"drift": drift, "stderr": stderr, "variance_per_step": float(final.var(ddof=1) / steps)}
