import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def sha256_of_file(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        while True:
            chunk = f.read(1024 * 1024)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()


def _to_builtin(value: Any):
    """Conversión de tipos numpy/pydantic para json.dumps."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "model_dump"):
        return value.model_dump()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"tipo no serializable: {type(value).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_to_builtin) + "\n"


def write_json(payload: Any, path: Path) -> Path:
    path = Path(path)
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    """CSV con cabecera, o JSON por registros si la extensión es .json."""
    path = Path(path)
    if path.suffix == ".json":
        records = json.loads(frame.to_json(orient="records", double_precision=15))
        path.write_text(dumps(records), encoding="utf-8")
    else:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


class ArtifactWriter:
    """
    Escribe los artefactos de una ejecución y el manifest.json final.

    Si emit no es None solo se escriben los nombres listados; las tablas
    usan la extensión de emit o, en su defecto, el formato de la ejecución.
    """

    def __init__(self, out_dir: Path, fmt: str = "csv", emit: Optional[Iterable[str]] = None):
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.emit = None if emit is None else [name.strip() for name in emit if name.strip()]
        self.artifacts: List[Path] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def _target(self, stem: str, extensions: Iterable[str]) -> Optional[Path]:
        if self.emit is None:
            return self.out_dir / f"{stem}.{next(iter(extensions))}"
        for ext in extensions:
            if f"{stem}.{ext}" in self.emit:
                return self.out_dir / f"{stem}.{ext}"
        return None

    def table(self, stem: str, frame: pd.DataFrame) -> Optional[Path]:
        order = [self.fmt] + [ext for ext in ("csv", "json") if ext != self.fmt]
        target = self._target(stem, order)
        if target is None:
            return None
        self.artifacts.append(write_table(frame, target))
        logger.debug(f"Tabla escrita: {target}")
        return target

    def document(self, stem: str, payload: Dict[str, Any]) -> Optional[Path]:
        target = self._target(stem, ["json"])
        if target is None:
            return None
        self.artifacts.append(write_json(payload, target))
        logger.debug(f"Documento escrito: {target}")
        return target

    def unused_requests(self) -> List[str]:
        if self.emit is None:
            return []
        written = {path.name for path in self.artifacts}
        return [name for name in self.emit if name not in written and name != "manifest.json"]

    def write_manifest(self, config: Dict[str, Any], version: str) -> Path:
        """manifest.json: configuración resuelta, versión y SHA-256 de cada artefacto."""
        for name in self.unused_requests():
            logger.warning(f"⚠️ Artefacto pedido en --emit y no producido por este comando: {name}")
        manifest = {
            "version": version,
            "config": config,
            "artifacts": [
                {"name": path.name, "sha256": sha256_of_file(path)} for path in self.artifacts
            ],
        }
        path = write_json(manifest, self.out_dir / "manifest.json")
        logger.info(f"✅ {len(self.artifacts)} artefactos y manifest en {self.out_dir}")
        return path
