"""
Problema de los dos sobres repetido con la función de cambio de Cover.

En cada ronda se ofrece el par (x, 2x) con x ~ ρ; se abre un sobre al azar
y se cambia con probabilidad P(valor visto). El incremento es x con
probabilidad (1 - P(x))/2 + P(2x)/2 y 2x con probabilidad P(x)/2 + (1 - P(2x))/2.
"""
import logging
from typing import Tuple

import numpy as np

from stochlab.errors import InvalidInputError
from stochlab.models.games import CapitalDistribution, EnvelopeMoments, EnvelopeSpec
from stochlab.numerics import fft_convolve

logger = logging.getLogger(__name__)


def _branch_probabilities(spec: EnvelopeSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """Probabilidades de ganar x y de ganar 2x cuando el par es (x, 2x)."""
    p_low = spec.switching(x)
    p_high = spec.switching(2 * np.asarray(x, dtype=float))
    return (1.0 - p_low) / 2 + p_high / 2, p_low / 2 + (1.0 - p_high) / 2


def _amount_law(spec: EnvelopeSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """(valores, pesos, paso de red) de la cantidad x."""
    if spec.amount is not None:
        return np.array([spec.amount]), np.array([1.0]), spec.amount
    pdf = spec.amount_pdf
    offset = pdf.x0 / pdf.dx
    if abs(offset - round(offset)) > 1e-9:
        raise InvalidInputError(f"x0 = {pdf.x0} no es múltiplo de dx = {pdf.dx}; la red del capital es k·dx")
    weights = pdf.density * pdf.dx
    return pdf.xs, weights / weights.sum(), pdf.dx


def envelope_increments(spec: EnvelopeSpec) -> CapitalDistribution:
    """Ley de un incremento sobre la red k·dx."""
    values, weights, dx = _amount_law(spec)
    low, high = _branch_probabilities(spec, values)
    k_low = np.rint(values / dx).astype(int)
    k_high = np.rint(2 * values / dx).astype(int)
    k0 = int(min(k_low.min(), k_high.min()))
    masses = np.zeros(int(max(k_low.max(), k_high.max())) - k0 + 1)
    np.add.at(masses, k_low - k0, weights * low)
    np.add.at(masses, k_high - k0, weights * high)
    return CapitalDistribution(dx=dx, k0=k0, masses=masses / masses.sum())


def envelope_evolve(spec: EnvelopeSpec, dist: CapitalDistribution) -> CapitalDistribution:
    """Distribución del capital tras una ronda más."""
    step = envelope_increments(spec)
    if not np.isclose(dist.dx, step.dx, rtol=1e-12, atol=0.0):
        raise InvalidInputError(f"la red del capital (dx={dist.dx}) no coincide con la de la cantidad (dx={step.dx})")
    masses = np.clip(fft_convolve(dist.masses, step.masses), 0.0, None)
    return CapitalDistribution(t=dist.t + 1, dx=dist.dx, k0=dist.k0 + step.k0, masses=masses / masses.sum())


def envelope_evolve_to(spec: EnvelopeSpec, t: int) -> CapitalDistribution:
    _, _, dx = _amount_law(spec)
    dist = CapitalDistribution.at_zero(dx)
    for _ in range(t):
        dist = envelope_evolve(spec, dist)
    return dist


def envelope_moments(spec: EnvelopeSpec) -> EnvelopeMoments:
    """
    Media r y varianza v de un incremento, de modo que ⟨z_t⟩ = r·t y Var z_t = v·t.

    Para ρ = δ(X): r = (1.5 - (p₂ - p₁)/2)·X y v = (0.25 - (p₂ - p₁)²/4)·X²,
    con p₁ = P(X) y p₂ = P(2X).
    """
    values, weights, _ = _amount_law(spec)
    low, high = _branch_probabilities(spec, values)
    first = float(np.sum(weights * (values * low + 2 * values * high)))
    second = float(np.sum(weights * (values ** 2 * low + 4 * values ** 2 * high)))
    if not np.isfinite(first) or not np.isfinite(second):
        raise InvalidInputError("momentos de la cantidad divergentes")
    logger.debug(f"Sobres: r={first:.10g}, v={second - first ** 2:.10g}")
    return EnvelopeMoments(r=first, v=second - first ** 2)
