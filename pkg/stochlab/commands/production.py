import logging
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import Field

from stochlab.commands.common import float_list, int_list
from stochlab.errors import InvalidInputError, OutOfRegimeError
from stochlab.models.production import NoiseSpec, ProductionModelSpec
from stochlab.models.run import CommandParams
from stochlab.production import (
    delta_cumulants,
    narrow_limit_check,
    production_tables,
    saddle_moments,
    simulate_paths,
)

logger = logging.getLogger(__name__)

NAME = "production"
HELP = "Producción acumulada: recursión de densidades, volatilidad y fórmulas cerradas"


class Params(CommandParams):
    g: float = 0.2
    noise: Literal["gaussian", "lorentzian", "none"] = "gaussian"
    sigma: Optional[float] = Field(default=None, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    d: float = Field(default=0.0, ge=0.0, lt=1.0)
    t: int = Field(default=100, ge=1)
    times: Optional[List[int]] = None
    dx: Optional[float] = Field(default=None, gt=0)
    max_x: Optional[float] = Field(default=None, gt=0)
    mc_paths: int = Field(default=0, ge=0)
    sigma_sweep: Optional[List[float]] = None


def add_arguments(parser) -> None:
    parser.add_argument("--g", type=float, help="deriva por periodo")
    parser.add_argument("--noise", choices=["gaussian", "lorentzian", "none"], help="ley del ruido")
    parser.add_argument("--sigma", type=float, help="σ_a del ruido gaussiano")
    parser.add_argument("--gamma", type=float, help="anchura γ del ruido lorentziano")
    parser.add_argument("--d", type=float, help="tasa de depreciación en [0, 1)")
    parser.add_argument("--t", type=int, help="horizonte de la recursión")
    parser.add_argument("--times", type=int_list, help="instantes a emitir, p. ej. 5,10,20")
    parser.add_argument("--dx", type=float, help="paso de la malla")
    parser.add_argument("--max-x", dest="max_x", type=float, help="límite superior de la malla")
    parser.add_argument("--mc-paths", dest="mc_paths", type=int, help="caminos Monte-Carlo de contraste")
    parser.add_argument("--sigma-sweep", dest="sigma_sweep", type=float_list,
                        help="barrido de σ_a para el cociente de límite estrecho")


def _noise(params: Params) -> NoiseSpec:
    if params.noise == "gaussian":
        if params.sigma is None:
            raise InvalidInputError("el ruido gaussiano necesita --sigma")
        return NoiseSpec.gaussian(params.sigma)
    if params.noise == "lorentzian":
        if params.gamma is None:
            raise InvalidInputError("el ruido lorentziano necesita --gamma")
        return NoiseSpec.lorentzian(params.gamma)
    return NoiseSpec.none()


def _long_frame(densities, key: str) -> pd.DataFrame:
    frames = []
    for t, pdfs in sorted(densities.items()):
        frame = pdfs[key].to_frame()
        frame.insert(0, "t", t)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def run(params: Params, config, writer) -> int:
    spec = ProductionModelSpec(g=params.g, noise=_noise(params), d=params.d)
    times = sorted(set(params.times or []) | {params.t})
    if spec.noise.kind == "lorentzian":
        logger.info(f"Ruido lorentziano truncado a ±{spec.noise.cutoff}γ, masa de cola descartada {spec.noise.tail_mass:.4e}")

    densities, table = production_tables(spec, params.t, times=times, dx=params.dx, max_x=params.max_x)
    writer.table("voldist", densities[params.t]["volatility"].to_frame())
    writer.table("zdist", densities[params.t]["z"].to_frame())
    writer.table("zdist_times", _long_frame(densities, "z"))
    writer.table("voldist_times", _long_frame(densities, "volatility"))
    writer.table("moments", table)

    final = table.iloc[-1]
    summary = {key: (int(final[key]) if key == "t" else float(final[key]))
               for key in ("t", "mean", "var", "c3", "c4", "var_delta")}
    summary["noise"] = spec.noise.kind
    summary["tail_mass"] = spec.noise.tail_mass
    logger.info(f"✅ t={params.t}: var_delta={summary['var_delta']:.6e}")

    if spec.noise.kind == "gaussian":
        try:
            summary["saddle"] = saddle_moments(spec, params.t).model_dump()
            summary["cumulants"] = delta_cumulants(spec).model_dump()
        except OutOfRegimeError as e:
            logger.warning(f"⚠️ Fórmulas cerradas omitidas: {e}")

    if params.mc_paths > 0:
        sim = simulate_paths(spec, params.t, params.mc_paths, config.seed)
        log_z, delta = sim.at(params.t)
        summary["monte_carlo"] = {"paths": params.mc_paths, "mean": float(np.mean(log_z)),
                                  "var": float(np.var(log_z, ddof=1)), "var_delta": float(np.var(delta, ddof=1))}

    if params.sigma_sweep:
        rows = []
        for sigma in params.sigma_sweep:
            swept = ProductionModelSpec(g=params.g, noise=NoiseSpec.gaussian(sigma), d=params.d)
            rows.append({"sigma": sigma, "ratio": narrow_limit_check(swept, params.t)})
        writer.table("narrow_limit", pd.DataFrame(rows))

    writer.document("summary", summary)
    return 0
