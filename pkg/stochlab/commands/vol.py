import logging
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import Field

from stochlab.marketdata import close_to_close, lead_lag_correlation, load_ohlc, rolling_volatility, sentiment_score
from stochlab.models.run import CommandParams

logger = logging.getLogger(__name__)

NAME = "vol"
HELP = "Volatilidad anualizada móvil, correlación con desfase y sentiment score"


class Params(CommandParams):
    input: str
    against: Optional[str] = None
    window: int = Field(default=21, ge=2)
    max_lag: int = Field(default=10, ge=0)
    calls: Optional[int] = Field(default=None, ge=0)
    puts: Optional[int] = Field(default=None, ge=0)
    date_format: Optional[str] = None


def add_arguments(parser) -> None:
    parser.add_argument("--input", help="CSV OHLC del activo")
    parser.add_argument("--against", help="CSV OHLC con el que correlacionar la volatilidad (p. ej. un índice de volatilidad)")
    parser.add_argument("--window", type=int, help="días por ventana")
    parser.add_argument("--max-lag", dest="max_lag", type=int, help="desfase máximo |τ|")
    parser.add_argument("--calls", type=int, help="órdenes call para el sentiment score")
    parser.add_argument("--puts", type=int, help="órdenes put para el sentiment score")
    parser.add_argument("--date-format", dest="date_format", help="formato de fecha explícito")


def run(params: Params, config, writer) -> int:
    series = load_ohlc(params.input, date_format=params.date_format)
    returns = close_to_close(series)
    vol = rolling_volatility(returns, params.window)
    dates = series.dates[1:][params.window - 1:]
    frame = pd.DataFrame({"date": pd.to_datetime(dates).strftime("%Y-%m-%d"), "volatility": vol})
    writer.table("volatility", frame)
    summary = {"label": series.label, "window": params.window, "last_volatility": float(vol[-1])}

    if params.against is not None:
        other = load_ohlc(params.against, date_format=params.date_format)
        joined = frame.merge(
            pd.DataFrame({"date": pd.to_datetime(other.dates).strftime("%Y-%m-%d"), "level": other.close}),
            on="date", how="inner")
        taus = np.arange(-params.max_lag, params.max_lag + 1)
        corr = [lead_lag_correlation(joined["level"], joined["volatility"], int(tau)) for tau in taus]
        writer.table("lead_lag", pd.DataFrame({"tau": taus, "correlation": corr}))
        best = int(taus[int(np.argmax(corr))])
        summary["lead_lag"] = {"against": other.label, "overlap": len(joined), "argmax_tau": best}
        logger.info(f"Correlación máxima con {other.label} en τ={best}")

    if params.calls is not None and params.puts is not None:
        summary["sentiment_score"] = sentiment_score(params.calls, params.puts)

    writer.document("summary", summary)
    return 0
