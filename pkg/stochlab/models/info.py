# models/info.py
import json
from typing import Dict, Literal, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# --- Muestras emparejadas ---
class PairedSamples(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    y: np.ndarray

    @field_validator("x", "y", mode="before")
    @classmethod
    def _as_vector(cls, v):
        arr = np.array(v, dtype=float).ravel()
        if np.any(np.isnan(arr)):
            raise ValueError("las muestras contienen NaN")
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _check_lengths(self):
        if self.x.size != self.y.size:
            raise ValueError(f"longitudes distintas: {self.x.size} vs {self.y.size}")
        if self.x.size < 2:
            raise ValueError("se necesitan al menos 2 pares")
        return self

    @property
    def n(self) -> int:
        return int(self.x.size)

    @classmethod
    def read_csv(cls, path, header: bool = True) -> "PairedSamples":
        """Lee un CSV de dos columnas x,y; las filas con NaN se descartan."""
        frame = pd.read_csv(path, header=0 if header else None)
        if frame.shape[1] < 2:
            raise ValueError(f"{path}: se esperan dos columnas")
        frame = frame.iloc[:, :2].apply(pd.to_numeric, errors="coerce").dropna()
        return cls(x=frame.iloc[:, 0].to_numpy(), y=frame.iloc[:, 1].to_numpy())


# --- Ley conjunta discreta ---
class DiscreteJoint(BaseModel):
    """Probabilidades conjuntas p(i, j) (o p(i, j, k) para la variante condicional)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: np.ndarray

    @field_validator("p", mode="before")
    @classmethod
    def _check_probabilities(cls, v):
        arr = np.array(v, dtype=float)
        if arr.ndim not in (2, 3) or arr.size == 0:
            raise ValueError("se espera una tabla de 2 o 3 dimensiones")
        if np.any(~np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("probabilidades negativas o no finitas")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError(f"las probabilidades suman {arr.sum():.15f}, no 1")
        arr.flags.writeable = False
        return arr

    @classmethod
    def from_counts(cls, counts) -> "DiscreteJoint":
        counts = np.asarray(counts, dtype=float)
        return cls(p=counts / counts.sum())

    @property
    def p_x(self) -> np.ndarray:
        return self.p.sum(axis=tuple(range(1, self.p.ndim)))

    @property
    def p_y(self) -> np.ndarray:
        axes = (0,) if self.p.ndim == 2 else (0, 2)
        return self.p.sum(axis=axes)


# --- Resultados ---
class InformationMeasures(BaseModel):
    h_x: float
    h_y: float
    h_xy: float
    h_x_given_y: float
    mutual_information: float
    kl_divergence: Union[float, None] = None
    conditional_mi: Union[float, None] = None


class MiEstimate(BaseModel):
    value: float
    method: Literal["histogram", "knn1", "knn2", "analytic"]
    params: Dict[str, Union[int, float, str]] = Field(default_factory=dict)
    N: int = Field(..., ge=0)

    def to_json(self) -> str:
        return json.dumps(self.model_dump())
