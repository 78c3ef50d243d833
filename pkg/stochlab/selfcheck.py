"""
Batería de invariantes que ejecuta `stochlab selfcheck`.

Cada comprobación devuelve (ok, detalle); una excepción cuenta como fallo.
"""
import logging
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd

from stochlab.envelope import envelope_evolve_to, envelope_moments
from stochlab.infotheory import entropy, information_measures, kl_divergence
from stochlab.marketdata import close_to_close, ohlc_from_frame, rolling_volatility, session_returns, synthetic_ohlc
from stochlab.models.games import EnvelopeSpec, GameSpec
from stochlab.models.grids import GridPdf
from stochlab.models.info import DiscreteJoint
from stochlab.models.production import NoiseSpec, ProductionModelSpec
from stochlab.numerics import cumulants, grid_convolve
from stochlab.parrondo import (
    capital_dependent_game,
    exact_pmf,
    ladder_evolve,
    mix_strategies,
    rate_triangle,
    rate_variance,
    uniform_game,
)
from stochlab.production import depreciation_volatility, evolve_to, saddle_moments

logger = logging.getLogger(__name__)

Check = Tuple[str, Callable[[], Tuple[bool, str]]]


def _gaussian_grid(mean: float, sigma: float, dx: float = 0.01) -> GridPdf:
    xs = np.arange(mean - 10 * sigma, mean + 10 * sigma + dx / 2, dx)
    density = np.exp(-0.5 * ((xs - mean) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return GridPdf(x0=float(xs[0]), dx=dx, density=density).normalize()


def _convolution_additivity():
    a, b = _gaussian_grid(0.3, 0.5), _gaussian_grid(-1.0, 0.7)
    total = cumulants(grid_convolve(a, b))
    expected = cumulants(a) + cumulants(b)
    err = max(abs(total.c1 - expected.c1), abs(total.c2 - expected.c2))
    return err < 1e-6, f"error media/varianza {err:.2e}"


def _information_identities():
    rng = np.random.default_rng(7)
    joint = DiscreteJoint.from_counts(rng.integers(1, 20, size=(4, 5)))
    m = information_measures(joint)
    err = abs(m.mutual_information - (m.h_x + m.h_y - m.h_xy))
    p = rng.random(6)
    q = rng.random(6)
    kl = kl_divergence(p / p.sum(), q / q.sum())
    ok = err < 1e-12 and kl >= 0 and m.mutual_information >= -1e-12 and entropy(joint.p_x) <= np.log(4) + 1e-12
    return ok, f"|I - (H_x + H_y - H_xy)| = {err:.1e}, KL = {kl:.4f}"


def _session_decomposition():
    series = ohlc_from_frame(synthetic_ohlc(days=300, seed=3))
    sr = session_returns(series)
    err = float(np.max(np.abs(sr.d + sr.n - close_to_close(series))))
    shift = float(np.max(np.abs(rolling_volatility(sr.d + 0.01, 21) - rolling_volatility(sr.d, 21))))
    return err < 1e-12 and shift < 1e-9, f"d + n vs cierre-cierre {err:.1e}, desplazamiento {shift:.1e}"


def _production_normalization():
    spec = ProductionModelSpec(g=0.2, noise=NoiseSpec.gaussian(0.5))
    state = evolve_to(spec, 20)[20]
    err = max(abs(state.z.total() - 1.0), abs(state.y.total() - 1.0), abs(state.rho_z.mass() - 1.0))
    return err < 1e-6 and state.z.edges[0] >= 0, f"error de normalización {err:.1e}"


def _saddle_limits():
    spec = ProductionModelSpec(g=0.2, noise=NoiseSpec.gaussian(0.1))
    m = saddle_moments(spec, 2000)
    err = abs(m.var_delta - m.var_delta_asymptotic)
    dep = abs(depreciation_volatility(0.2, 0.1, 0.0) - m.var_delta_asymptotic)
    return err < 1e-10 and dep < 1e-15 and m.var_delta < 0.01, f"finito vs límite {err:.1e}"


def _rate_triangle():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        M = int(rng.integers(1, 6))
        p = rng.random(M)
        q = (1 - p) * rng.random(M)
        values = list(rate_triangle(GameSpec(M=M, p=list(p), q=list(q))).values())
        worst = max(worst, max(values) - min(values))
    return worst < 1e-10, f"máxima discrepancia {worst:.1e}"


def _exact_vs_master():
    worst = 0.0
    for spec in (uniform_game(0.6), capital_dependent_game(0.295, 0.62), GameSpec(M=2, p=[0.3, 0.5], q=[0.4, 0.2])):
        a = exact_pmf(spec, 60)
        b = ladder_evolve(spec, 60)
        lo, hi = min(a.n_min, b.n_min), max(a.n_max, b.n_max)
        worst = max(worst, float(np.max(np.abs(a.aligned(lo, hi) - b.aligned(lo, hi)))))
    return worst < 1e-10, f"máxima diferencia {worst:.1e}"


def _scalar_no_parrondo():
    a, b = uniform_game(0.45), uniform_game(0.52)
    mixed = rate_variance(mix_strategies(a, b)).r
    expected = (rate_variance(a).r + rate_variance(b).r) / 2
    ladder = rate_variance(mix_strategies(capital_dependent_game(0.095, 0.745), uniform_game(0.495, 3))).r
    ok = abs(mixed - expected) < 1e-12 and ladder > 0
    return ok, f"M=1 mezcla {mixed:.6f} vs {expected:.6f}; M=3 mezcla r={ladder:.6g}"


def _envelope_moments():
    spec = EnvelopeSpec.delta(1.0, [1.0, 2.0], [0.2, 0.3])
    m = envelope_moments(spec)
    dist = envelope_evolve_to(spec, 50)
    err = max(abs(m.r - 1.45), abs(m.v - 0.2475), abs(dist.mean() - 50 * m.r), abs(dist.variance() - 50 * m.v))
    return err < 1e-9, f"error {err:.1e}"


CHECKS: List[Check] = [
    ("numerics.convolution_additivity", _convolution_additivity),
    ("infotheory.identities", _information_identities),
    ("marketdata.session_decomposition", _session_decomposition),
    ("production.normalization", _production_normalization),
    ("production.saddle_limits", _saddle_limits),
    ("parrondo.rate_triangle", _rate_triangle),
    ("parrondo.exact_vs_master", _exact_vs_master),
    ("parrondo.scalar_no_parrondo", _scalar_no_parrondo),
    ("envelope.moments", _envelope_moments),
]


def run_checks(checks: List[Check] = None) -> pd.DataFrame:
    """Ejecuta la batería y devuelve una tabla name, passed, detail."""
    rows = []
    for name, check in checks or CHECKS:
        try:
            ok, detail = check()
        except Exception as e:
            logger.error(f"❌ {name}: {e}", exc_info=True)
            ok, detail = False, f"{type(e).__name__}: {e}"
        rows.append({"name": name, "passed": bool(ok), "detail": detail})
        logger.info(f"{'✅' if ok else '❌'} {name}: {detail}")
    return pd.DataFrame(rows, columns=["name", "passed", "detail"])
