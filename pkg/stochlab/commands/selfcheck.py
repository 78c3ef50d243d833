import logging

from stochlab import selfcheck
from stochlab.models.run import CommandParams

logger = logging.getLogger(__name__)

NAME = "selfcheck"
HELP = "Ejecuta la batería de invariantes y muestra una tabla de aprobados/fallos"


class Params(CommandParams):
    pass


def add_arguments(parser) -> None:
    pass


def run(params: Params, config, writer) -> int:
    table = selfcheck.run_checks()
    writer.table("selfcheck", table)
    failed = int((~table["passed"]).sum())
    writer.document("summary", {"checks": len(table), "failed": failed,
                                "results": table.to_dict(orient="records")})

    width = max(len(name) for name in table["name"])
    for row in table.itertuples(index=False):
        print(f"{row.name:<{width}}  {'PASS' if row.passed else 'FAIL'}  {row.detail}")

    if failed:
        logger.error(f"❌ {failed} de {len(table)} comprobaciones fallidas")
        return 1
    logger.info(f"✅ {len(table)} comprobaciones superadas")
    return 0
