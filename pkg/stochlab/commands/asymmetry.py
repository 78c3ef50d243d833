import logging
from typing import List, Optional

from pydantic import Field

from stochlab.commands.common import str_list
from stochlab.errors import InvalidInputError
from stochlab.marketdata import ASYMMETRY_METHODS, asymmetry, asymmetry_table, load_ohlc, session_returns
from stochlab.models.run import CommandParams

logger = logging.getLogger(__name__)

NAME = "asymmetry"
HELP = "Asimetría temporal entre volatilidad intradía y nocturna"


class Params(CommandParams):
    inputs: List[str] = []
    methods: List[str] = list(ASYMMETRY_METHODS)
    knn_k: int = Field(default=5, ge=1)
    drop_outliers: bool = False
    date_format: Optional[str] = None


def add_arguments(parser) -> None:
    parser.add_argument("--input", dest="inputs", action="append", help="CSV OHLC (repetible, uno por activo)")
    parser.add_argument("--methods", type=str_list, help="pearson,spearman,mi_knn")
    parser.add_argument("--knn-k", dest="knn_k", type=int, help="K del estimador KNN")
    parser.add_argument("--drop-outliers", dest="drop_outliers", action="store_true",
                        help="descartar los días atípicos (análisis de sensibilidad)")
    parser.add_argument("--date-format", dest="date_format", help="formato de fecha explícito")


def run(params: Params, config, writer) -> int:
    if not params.inputs:
        raise InvalidInputError("indique al menos un --input")

    reports = []
    outliers = {}
    for path in params.inputs:
        series = load_ohlc(path, date_format=params.date_format, drop_outliers=params.drop_outliers)
        if series.outliers:
            logger.warning(f"⚠️ {series.label}: {len(series.outliers)} días atípicos conservados")
        outliers[series.label] = {"dropped_rows": series.dropped_rows, "outliers": series.outliers}
        report = asymmetry(session_returns(series), methods=params.methods, knn_k=params.knn_k)
        reports.append(report)

    writer.table("asymmetry", asymmetry_table(reports))
    writer.document("summary", {
        "reports": [report.model_dump() for report in reports],
        "cleaning": outliers,
    })
    return 0
