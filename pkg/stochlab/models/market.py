# models/market.py
import json
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _frozen(v, dtype=float):
    arr = np.array(v, dtype=dtype).ravel()
    arr.flags.writeable = False
    return arr


# --- Serie OHLC limpia ---
class OhlcSeries(BaseModel):
    """Registros diarios (fecha, apertura, cierre); k cuenta días de negociación."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dates: np.ndarray
    open: np.ndarray
    close: np.ndarray
    dropped_rows: int = 0
    outliers: List[str] = []
    label: str = ""

    @field_validator("dates", mode="before")
    @classmethod
    def _dates(cls, v):
        return _frozen(v, dtype="datetime64[ns]")

    @field_validator("open", "close", mode="before")
    @classmethod
    def _prices(cls, v):
        return _frozen(v)

    @model_validator(mode="after")
    def _check(self):
        if not (self.dates.size == self.open.size == self.close.size):
            raise ValueError("fechas y precios con longitudes distintas")
        if np.any(~(self.open > 0)) or np.any(~(self.close > 0)):
            raise ValueError("precios de apertura/cierre no positivos")
        if self.dates.size > 1 and np.any(np.diff(self.dates) <= np.timedelta64(0, "ns")):
            raise ValueError("las fechas deben ser estrictamente crecientes")
        return self

    def __len__(self) -> int:
        return int(self.dates.size)


# --- Rendimientos por sesión ---
class SessionReturns(BaseModel):
    """d_k intradía y n_k nocturno, alineados: n_k = ln(o_k / c_{k-1})."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: np.ndarray
    n: np.ndarray
    label: str = ""

    @field_validator("d", "n", mode="before")
    @classmethod
    def _returns(cls, v):
        return _frozen(v)

    @model_validator(mode="after")
    def _aligned(self):
        if self.d.size != self.n.size:
            raise ValueError("d y n deben tener la misma longitud")
        return self

    @property
    def intraday_volatility(self) -> np.ndarray:
        return np.abs(self.d)

    @property
    def overnight_volatility(self) -> np.ndarray:
        return np.abs(self.n)


# --- Informe de asimetría ---
class AsymmetryEntry(BaseModel):
    c_nd: float
    c_dn: float
    ratio: Optional[float] = None


class AsymmetryReport(BaseModel):
    label: str = ""
    n_days: int = Field(..., ge=0)
    knn_k: int = 5
    results: Dict[str, AsymmetryEntry]

    def to_row(self) -> Dict[str, object]:
        """Fila plana por activo para las tablas multi-activo."""
        row: Dict[str, object] = {"label": self.label, "n_days": self.n_days}
        for method, entry in self.results.items():
            row[f"{method}_c_nd"] = entry.c_nd
            row[f"{method}_c_dn"] = entry.c_dn
            row[f"{method}_ratio"] = entry.ratio
        return row

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2)
