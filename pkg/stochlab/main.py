# stochlab/main.py
import argparse
import logging
import sys
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from stochlab import __version__
from stochlab.commands import COMMANDS
from stochlab.commands.common import str_list
from stochlab.config import setup_logging
from stochlab.errors import StochlabError
from stochlab.models.run import COMMON_KEYS, RunConfig
from stochlab.utils.io_utils import ArtifactWriter

logger = logging.getLogger("stochlab")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


# --- Parser ---
def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="semilla maestra (por defecto 0)")
    common.add_argument("--out-dir", dest="out_dir", help="directorio de salida")
    common.add_argument("--format", choices=["csv", "json"], help="formato de las tablas")
    common.add_argument("--config", help="fichero TOML con los parámetros")
    common.add_argument("--emit", type=str_list, help="artefactos a escribir, p. ej. voldist.csv,summary.json")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING o ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochlab",
        description="Dependencia no lineal, propagación exacta de distribuciones y juegos de Parrondo",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        child = sub.add_parser(command.NAME, help=command.HELP, parents=[common],
                               argument_default=argparse.SUPPRESS)
        command.add_arguments(child)
    return parser


# --- Configuración ---
def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """Lee el TOML de --config; las tablas [nombre] se aplanan sobre la raíz."""
    if path is None:
        return {}
    with Path(path).open("rb") as handle:
        data = tomllib.load(handle)
    flat = {key: value for key, value in data.items() if not isinstance(value, dict)}
    for value in data.values():
        if isinstance(value, dict):
            flat.update(value)
    return flat


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Combina valores por defecto, fichero TOML y flags, en ese orden de prioridad.

    Returns:
        RunConfig con las claves comunes separadas de los parámetros del subcomando
    """
    values = vars(args).copy()
    command = values.pop("command")
    merged = load_config_file(values.pop("config", None))
    merged.update(values)
    common = {key: merged.pop(key) for key in COMMON_KEYS if key in merged}
    return RunConfig(command=command, params=merged, **common)


# --- Ejecución ---
def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = next(c for c in COMMANDS if c.NAME == args.command)

    try:
        config = resolve_config(args)
        setup_logging(config.log_level)
        params = command.Params(**config.params)
    except (ValidationError, FileNotFoundError, tomllib.TOMLDecodeError) as e:
        setup_logging()
        logger.error(f"❌ Configuración inválida: {e}")
        return EXIT_INVALID

    logger.info(f"🔄 stochlab {__version__} - {command.NAME} (seed={config.seed})")
    try:
        writer = ArtifactWriter(Path(config.out_dir), config.format, config.emit)
        status = command.run(params, config, writer)
        writer.write_manifest(config.model_dump(), __version__)
    except (StochlabError, ValidationError, FileNotFoundError) as e:
        logger.error(f"❌ {command.NAME}: {e}")
        logger.debug("Detalle del error", exc_info=True)
        return EXIT_INVALID

    if status != EXIT_OK:
        return EXIT_FAILED
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
