import logging
from typing import List

from pydantic import Field

from stochlab.commands.common import float_list
from stochlab.envelope import envelope_evolve_to, envelope_moments
from stochlab.models.games import EnvelopeSpec
from stochlab.models.run import CommandParams

logger = logging.getLogger(__name__)

NAME = "envelope"
HELP = "Problema de los dos sobres repetido con función de cambio tabulada"


class Params(CommandParams):
    amount: float = Field(default=1.0, gt=0)
    switch_x: List[float] = [1.0, 2.0]
    switch_p: List[float] = [0.2, 0.3]
    t: int = Field(default=100, ge=0)


def add_arguments(parser) -> None:
    parser.add_argument("--amount", type=float, help="cantidad X del par (X, 2X)")
    parser.add_argument("--switch-x", dest="switch_x", type=float_list, help="puntos de la tabla P(x)")
    parser.add_argument("--switch-p", dest="switch_p", type=float_list, help="valores P(x) en [0, 1]")
    parser.add_argument("--t", type=int, help="rondas")


def run(params: Params, config, writer) -> int:
    spec = EnvelopeSpec.delta(params.amount, params.switch_x, params.switch_p)
    moments = envelope_moments(spec)
    dist = envelope_evolve_to(spec, params.t)
    writer.table("capital", dist.to_frame())
    summary = {
        "t": params.t,
        "r": moments.r,
        "v": moments.v,
        "mean": dist.mean(),
        "variance": dist.variance(),
        "predicted_mean": moments.r * params.t,
        "predicted_variance": moments.v * params.t,
    }
    logger.info(f"✅ r={moments.r:.6g}, v={moments.v:.6g}; media tras {params.t} rondas = {summary['mean']:.6g}")
    writer.document("summary", summary)
    return 0
