# models/run.py
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from stochlab.config import OUT_DIR

COMMON_KEYS = ("seed", "out_dir", "format", "emit", "log_level")


class RunConfig(BaseModel):
    """Configuración resuelta de una ejecución: fichero TOML + flags."""
    model_config = ConfigDict(extra="forbid")

    command: Literal["mi", "asymmetry", "vol", "production", "parrondo", "envelope", "selfcheck"]
    seed: int = Field(default=0, ge=0)
    out_dir: str = OUT_DIR
    format: Literal["csv", "json"] = "csv"
    emit: Optional[List[str]] = None
    log_level: Optional[str] = None
    params: Dict[str, Any] = {}


class CommandParams(BaseModel):
    """Base de los parámetros de cada subcomando; las claves desconocidas se rechazan."""
    model_config = ConfigDict(extra="forbid")
