import logging
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import Field

from stochlab.commands.common import float_list
from stochlab.errors import InvalidInputError
from stochlab.models.games import GameSpec, HistoryGameSpec
from stochlab.models.run import CommandParams
from stochlab.parrondo import (
    asymptotic_profile,
    exact_pmf,
    history_rate_variance,
    ladder_evolve,
    mix_strategies,
    parity_class,
    rate_triangle,
    rate_bounds,
    rate_variance,
    rung_sum,
    simulate_history_game,
)

logger = logging.getLogger(__name__)

NAME = "parrondo"
HELP = "Juegos de Parrondo: distribución exacta, tasa, varianza y perfil asintótico"


class Params(CommandParams):
    M: int = Field(default=1, ge=1)
    p: Optional[List[float]] = None
    q: Optional[List[float]] = None
    mix_p: Optional[List[float]] = None
    mix_q: Optional[List[float]] = None
    history: Optional[List[float]] = None
    t: int = Field(default=200, ge=0)
    method: str = "exact"
    profile_points: int = Field(default=0, ge=0)
    mc_steps: int = Field(default=0, ge=0)


def add_arguments(parser) -> None:
    parser.add_argument("--M", type=int, help="peldaños de la escalera")
    parser.add_argument("--p", type=float_list, help="probabilidades de ganar por peldaño")
    parser.add_argument("--q", type=float_list, help="probabilidades de perder por peldaño (por defecto 1-p)")
    parser.add_argument("--mix-p", dest="mix_p", type=float_list, help="segundo juego a mezclar al azar")
    parser.add_argument("--mix-q", dest="mix_q", type=float_list, help="pérdidas del segundo juego")
    parser.add_argument("--history", type=float_list, help="p1,p2,p3,p4 del juego con memoria")
    parser.add_argument("--t", type=int, help="pasos de tiempo")
    parser.add_argument("--method", choices=["exact", "master"], help="transformada discreta o ecuación maestra")
    parser.add_argument("--profile-points", dest="profile_points", type=int,
                        help="puntos del perfil asintótico (0 = no se calcula)")
    parser.add_argument("--mc-steps", dest="mc_steps", type=int, help="pasos Monte-Carlo del juego con memoria")


def _run_history(params: Params, config, writer) -> int:
    if len(params.history) != 4:
        raise InvalidInputError("--history necesita p1,p2,p3,p4")
    spec = HistoryGameSpec(p1=params.history[0], p2=params.history[1], p3=params.history[2], p4=params.history[3])
    rates = history_rate_variance(spec)
    summary = {"r": rates.r, "K": rates.K, "degenerate": rates.degenerate, "maximal": rates.maximal}
    if params.mc_steps > 0:
        summary["monte_carlo"] = simulate_history_game(spec, params.mc_steps, config.seed)
    writer.document("summary", summary)
    return 0


def run(params: Params, config, writer) -> int:
    if params.history is not None:
        return _run_history(params, config, writer)
    if params.p is None:
        raise InvalidInputError("indique --p (o --history)")
    if params.method not in ("exact", "master"):
        raise InvalidInputError(f"método desconocido: {params.method}")

    spec = GameSpec(M=params.M, p=params.p, q=params.q)
    if params.mix_p is not None:
        spec = mix_strategies(spec, GameSpec(M=params.M, p=params.mix_p, q=params.mix_q))
        logger.info(f"Juego mezclado: p={spec.p}, q={spec.q}")

    rates = rate_variance(spec)
    dist = exact_pmf(spec, params.t) if params.method == "exact" else ladder_evolve(spec, params.t)
    writer.table("pmf", dist.to_frame())
    ns, summed = rung_sum(dist)
    writer.table("rung_sum", pd.DataFrame({"n": ns, "mass": summed}))

    if params.profile_points > 0 and params.t > 0:
        lo, hi = rate_bounds(spec)
        # el intervalo de tasas alcanzables es abierto
        xs = np.linspace(lo, hi, params.profile_points + 2)[1:-1]
        writer.table("profile", asymptotic_profile(spec, params.t, xs).to_frame())

    summary = {
        "t": params.t,
        "M": spec.M,
        "r": rates.r,
        "K": rates.K,
        "curvature": rates.curvature,
        "capital_rate": rates.capital_rate,
        "capital_variance": rates.capital_variance,
        "degenerate": rates.degenerate,
        "parity_class": parity_class(spec),
        "rate_triangle": rate_triangle(spec),
        "peak_n": int(ns[int(np.argmax(summed))]),
    }
    logger.info(f"✅ r={rates.r:.12g}, K={rates.K:.12g}, pico en n={summary['peak_n']}")
    writer.document("summary", summary)
    return 0
