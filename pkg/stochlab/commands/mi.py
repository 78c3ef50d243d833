import logging
from typing import List, Literal, Optional

from pydantic import Field

from stochlab.commands.common import float_list
from stochlab.errors import InvalidInputError
from stochlab.infotheory import gaussian_mi, mi_histogram, mi_knn, mi_sweep, pearson, spearman
from stochlab.models.info import PairedSamples
from stochlab.models.run import CommandParams

logger = logging.getLogger(__name__)

NAME = "mi"
HELP = "Información mutua: barrido AR(1) o estimación sobre un CSV x,y"


class Params(CommandParams):
    ar1: Optional[List[float]] = None
    input: Optional[str] = None
    header: bool = True
    n: int = Field(default=1000, ge=10)
    k: int = Field(default=5, ge=1)
    bins: int = Field(default=10, ge=2)
    seeds: int = Field(default=20, ge=1)
    algorithm: Literal[1, 2] = 1


def add_arguments(parser) -> None:
    parser.add_argument("--ar1", type=float_list, help="acoplamientos AR(1), p. ej. a=0.8 o a=0.5,0.8")
    parser.add_argument("--input", help="CSV con dos columnas x,y")
    parser.add_argument("--no-header", dest="header", action="store_false", help="el CSV no tiene cabecera")
    parser.add_argument("--n", type=int, help="longitud de cada serie AR(1)")
    parser.add_argument("--k", type=int, help="vecinos de KNN")
    parser.add_argument("--bins", type=int, help="bins por eje del histograma")
    parser.add_argument("--seeds", type=int, help="repeticiones por acoplamiento")
    parser.add_argument("--algorithm", type=int, choices=[1, 2], help="variante KNN del resumen")


def run(params: Params, config, writer) -> int:
    if params.ar1 is None and params.input is None:
        raise InvalidInputError("indique --ar1 o --input")

    summary = {}
    if params.ar1 is not None:
        frame = mi_sweep(params.ar1, n=params.n, k=params.k, bins=params.bins, seeds=params.seeds,
                         base_seed=config.seed)
        writer.table("sweep", frame)
        chosen = f"knn{params.algorithm}_mean"
        summary["ar1"] = [
            {"a": row["a"], "analytic": row["analytic"], "estimate": row[chosen],
             "histogram": row["histogram_mean"], "knn1": row["knn1_mean"], "knn2": row["knn2_mean"]}
            for row in frame.to_dict("records")
        ]
        for entry in summary["ar1"]:
            logger.info(f"a={entry['a']}: analítica={entry['analytic']:.4f}, estimada={entry['estimate']:.4f}")

    if params.input is not None:
        pairs = PairedSamples.read_csv(params.input, header=params.header)
        knn = mi_knn(pairs, params.k, params.algorithm, seed=config.seed)
        summary["input"] = {
            "path": params.input,
            "N": pairs.n,
            "pearson": pearson(pairs),
            "spearman": spearman(pairs),
            "mi_histogram": mi_histogram(pairs, params.bins).value,
            "mi_knn": knn.value,
        }
        logger.info(f"MI KNN{params.algorithm} sobre {params.input}: {knn.value:.4f} nats")

    summary["reference"] = {"gaussian_mi": {str(a): gaussian_mi(a) for a in params.ar1 or []}}
    writer.document("summary", summary)
    return 0
