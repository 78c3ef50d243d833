# models/grids.py
import json
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from stochlab.config import NORMALIZATION_TOL


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


# --- Densidad sobre una malla uniforme ---
class GridPdf(BaseModel):
    """
    Densidad de probabilidad muestreada en los puntos x0 + i*dx.

    La masa se mide con la regla del trapecio. Los motores que trabajan con
    masas por celda exportan con una muestra nula en cada extremo, de modo
    que el trapecio coincide con la suma de masas.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x0: float
    dx: float = Field(..., gt=0)
    density: np.ndarray

    @field_validator("density", mode="before")
    @classmethod
    def _check_density(cls, v):
        arr = np.array(v, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("la densidad debe ser un vector no vacío")
        if not np.all(np.isfinite(arr)):
            raise ValueError("la densidad contiene valores no finitos")
        if np.any(arr < 0):
            raise ValueError("la densidad contiene valores negativos")
        arr.flags.writeable = False
        return arr

    @classmethod
    def from_masses(cls, edge0: float, dx: float, masses) -> "GridPdf":
        """Construye la densidad a partir de masas por celda [edge0 + k*dx, edge0 + (k+1)*dx)."""
        masses = np.clip(np.asarray(masses, dtype=float), 0.0, None)
        density = np.concatenate(([0.0], masses / dx, [0.0]))
        return cls(x0=edge0 - dx / 2.0, dx=dx, density=density)

    @property
    def n(self) -> int:
        return int(self.density.size)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def xmax(self) -> float:
        return self.x0 + self.dx * (self.n - 1)

    def mass(self) -> float:
        return float(np.trapz(self.density, dx=self.dx))

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.mass() - 1.0) <= tol

    def normalize(self) -> "GridPdf":
        total = self.mass()
        if total <= 0:
            raise ValueError("no se puede normalizar una densidad de masa nula")
        return GridPdf(x0=self.x0, dx=self.dx, density=self.density / total)

    def moment(self, k: int, center: float = 0.0) -> float:
        return float(np.trapz((self.xs - center) ** k * self.density, dx=self.dx))

    def mean(self) -> float:
        return self.moment(1) / self.mass()

    def variance(self) -> float:
        m = self.mean()
        return self.moment(2, center=m) / self.mass()

    def cdf(self) -> np.ndarray:
        """CDF acumulada por trapecios en los puntos de la malla."""
        increments = 0.5 * (self.density[1:] + self.density[:-1]) * self.dx
        return np.concatenate(([0.0], np.cumsum(increments)))

    def resample(self, dx: float, x0: float = None) -> "GridPdf":
        """Reinterpola linealmente sobre una malla de paso dx."""
        if dx <= 0:
            raise ValueError("dx debe ser positivo")
        start = self.x0 if x0 is None else x0
        count = int(np.floor((self.xmax - start) / dx + 1e-9)) + 1
        xs = start + dx * np.arange(max(count, 1))
        values = np.interp(xs, self.xs, self.density, left=0.0, right=0.0)
        return GridPdf(x0=start, dx=dx, density=values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.xs, "density": self.density})

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.12g")

    @classmethod
    def read_csv(cls, path) -> "GridPdf":
        frame = pd.read_csv(path)
        if list(frame.columns[:2]) != ["x", "density"]:
            raise ValueError(f"cabecera inesperada en {path}: se espera x,density")
        xs = frame["x"].to_numpy(dtype=float)
        if xs.size < 2:
            raise ValueError("la malla necesita al menos dos puntos")
        steps = np.diff(xs)
        dx = float(steps.mean())
        if not np.allclose(steps, dx, rtol=1e-6, atol=1e-12):
            raise ValueError("la malla del CSV no es uniforme")
        return cls(x0=float(xs[0]), dx=dx, density=frame["density"].to_numpy(dtype=float))


# --- Matriz compleja pequeña ---
class ComplexMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _check_entries(cls, v):
        arr = np.array(v, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError("se espera una matriz cuadrada de dimensión >= 1")
        arr.flags.writeable = False
        return arr

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def to_json(self) -> str:
        pairs = [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]
        return json.dumps(pairs)

    @classmethod
    def from_json(cls, text: str) -> "ComplexMatrix":
        rows = json.loads(text)
        return cls(entries=[[complex(re, im) for re, im in row] for row in rows])


# --- Cumulantes ---
class CumulantSet(BaseModel):
    c1: float
    c2: float = Field(..., ge=0)
    c3: float
    c4: float

    @computed_field
    @property
    def skewness(self) -> float:
        if self.c2 == 0:
            return 0.0
        return self.c3 / self.c2 ** 1.5

    @computed_field
    @property
    def excess_kurtosis(self) -> float:
        if self.c2 == 0:
            return 0.0
        return self.c4 / self.c2 ** 2

    def as_list(self) -> List[float]:
        return [self.c1, self.c2, self.c3, self.c4]

    def __add__(self, other: "CumulantSet") -> "CumulantSet":
        return CumulantSet(c1=self.c1 + other.c1, c2=self.c2 + other.c2,
                           c3=self.c3 + other.c3, c4=self.c4 + other.c4)


# --- Autovalor dominante ---
class LeadingEigen(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalue: complex
    right: np.ndarray
    left: np.ndarray
    degenerate: bool = False
    maximal: List[complex] = []
    spectrum: List[complex] = []
    residual: float = 0.0
