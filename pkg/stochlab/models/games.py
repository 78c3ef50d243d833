# models/games.py
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from stochlab.models.grids import GridPdf

MASS_TOL = 1e-12


# --- Juegos sobre la escalera ---
class GameSpec(BaseModel):
    """
    Juego dependiente del capital sobre una escalera de M peldaños.

    Capital X = n·M + l; en el peldaño l se gana con p_l, se pierde con q_l
    y se mantiene con 1 - p_l - q_l. Si q se omite, q_l = 1 - p_l.
    """
    model_config = ConfigDict(frozen=True)

    M: int = Field(..., ge=1)
    p: List[float]
    q: List[float]

    @model_validator(mode="before")
    @classmethod
    def _default_losses(cls, data):
        if isinstance(data, dict) and data.get("q") is None and data.get("p") is not None:
            data = dict(data)
            data["q"] = [1.0 - float(v) for v in data["p"]]
        return data

    @model_validator(mode="after")
    def _check(self):
        if len(self.p) != self.M or len(self.q) != self.M:
            raise ValueError(f"p y q deben tener M = {self.M} elementos")
        for l, (pl, ql) in enumerate(zip(self.p, self.q)):
            if pl < 0 or ql < 0 or pl + ql > 1 + 1e-12:
                raise ValueError(f"probabilidades inválidas en el peldaño {l}: p={pl}, q={ql}")
        return self

    @property
    def hold(self) -> List[float]:
        return [1.0 - pl - ql for pl, ql in zip(self.p, self.q)]

    @property
    def is_bipartite(self) -> bool:
        """Todas las probabilidades de mantener son nulas."""
        return all(abs(h) <= 1e-12 for h in self.hold)


class HistoryGameSpec(BaseModel):
    """Probabilidades de salto a la derecha tras las historias (-,-), (-,+), (+,-), (+,+)."""
    model_config = ConfigDict(frozen=True)

    p1: float = Field(..., ge=0, le=1)
    p2: float = Field(..., ge=0, le=1)
    p3: float = Field(..., ge=0, le=1)
    p4: float = Field(..., ge=0, le=1)

    @property
    def probabilities(self) -> Tuple[float, float, float, float]:
        return self.p1, self.p2, self.p3, self.p4


# --- Distribución sobre la red ---
class LatticeDistribution(BaseModel):
    """P_l(n, t) para n = n_min .. n_min + N - 1; masses tiene forma (M, N)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: int = Field(..., ge=0)
    n_min: int
    masses: np.ndarray

    @field_validator("masses", mode="before")
    @classmethod
    def _check_masses(cls, v):
        arr = np.array(v, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("se espera una matriz (M, N) no vacía")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("masas negativas o no finitas")
        if abs(arr.sum() - 1.0) > MASS_TOL * max(1, arr.size):
            raise ValueError(f"masa total {arr.sum():.15f} distinta de 1")
        arr.flags.writeable = False
        return arr

    @classmethod
    def delta(cls, M: int, l0: int = 0) -> "LatticeDistribution":
        masses = np.zeros((M, 1))
        masses[l0, 0] = 1.0
        return cls(t=0, n_min=0, masses=masses)

    @property
    def M(self) -> int:
        return int(self.masses.shape[0])

    @property
    def ns(self) -> np.ndarray:
        return self.n_min + np.arange(self.masses.shape[1])

    @property
    def n_max(self) -> int:
        return int(self.n_min + self.masses.shape[1] - 1)

    def mass(self, n: int, l: int = 0) -> float:
        i = n - self.n_min
        if i < 0 or i >= self.masses.shape[1]:
            return 0.0
        return float(self.masses[l, i])

    def aligned(self, n_lo: int, n_hi: int) -> np.ndarray:
        """Masas (M, n_hi - n_lo + 1) sobre la ventana pedida, con ceros fuera del soporte."""
        out = np.zeros((self.M, n_hi - n_lo + 1))
        lo = max(n_lo, self.n_min)
        hi = min(n_hi, self.n_max)
        if lo <= hi:
            out[:, lo - n_lo:hi - n_lo + 1] = self.masses[:, lo - self.n_min:hi - self.n_min + 1]
        return out

    def capital_moments(self) -> Tuple[float, float]:
        """Media y varianza del capital X = n·M + l."""
        capital = self.ns[None, :] * self.M + np.arange(self.M)[:, None]
        mean = float(np.sum(capital * self.masses))
        return mean, float(np.sum((capital - mean) ** 2 * self.masses))

    def to_frame(self) -> pd.DataFrame:
        ll, nn = np.meshgrid(np.arange(self.M), self.ns, indexing="ij")
        return pd.DataFrame({"n": nn.ravel(), "l": ll.ravel(), "mass": self.masses.ravel()}).sort_values(
            ["n", "l"], kind="stable").reset_index(drop=True)


# --- Resultados ---
class RateVariance(BaseModel):
    """
    Tasa y difusión del peldaño de la red por paso.

    r = -V'(0) y K = V''(0) con V = ln λ; curvature = λ''(0). En unidades
    de capital la tasa es M·r y la varianza M²·K.
    """
    M: int = 1
    r: float
    K: float
    curvature: float
    capital_rate: float
    capital_variance: float
    degenerate: bool = False
    maximal: List[Tuple[float, float]] = []


class AsymptoticProfile(BaseModel):
    """Perfil de punto de silla P_l(n = x·t, t) por peldaño."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: int
    x: np.ndarray
    u: np.ndarray
    masses: np.ndarray

    @property
    def summed(self) -> np.ndarray:
        return self.masses.sum(axis=0)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"x": self.x, "n": self.x * self.t, "u": self.u, "summed": self.summed})
        for l in range(self.masses.shape[0]):
            frame[f"rung_{l}"] = self.masses[l]
        return frame


# --- Problema de los dos sobres ---
class EnvelopeSpec(BaseModel):
    """
    Ley de la cantidad (δ en X o GridPdf) y función de cambio P(x) tabulada.

    P se interpola linealmente y se extiende constante fuera de la tabla.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amount: Optional[float] = Field(default=None, gt=0)
    amount_pdf: Optional[GridPdf] = None
    switch_x: List[float]
    switch_p: List[float]

    @model_validator(mode="after")
    def _check(self):
        if (self.amount is None) == (self.amount_pdf is None):
            raise ValueError("se necesita exactamente una ley: amount (δ) o amount_pdf")
        if self.amount_pdf is not None:
            if not self.amount_pdf.is_normalized():
                raise ValueError("la densidad de la cantidad no está normalizada")
            if self.amount_pdf.x0 < 0:
                raise ValueError("la cantidad debe ser no negativa")
        if len(self.switch_x) != len(self.switch_p) or len(self.switch_x) == 0:
            raise ValueError("tabla de cambio vacía o con longitudes distintas")
        if np.any(np.diff(self.switch_x) <= 0):
            raise ValueError("los puntos de la tabla de cambio deben ser crecientes")
        p = np.asarray(self.switch_p, dtype=float)
        if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
            raise ValueError("P(x) fuera de [0, 1]")
        return self

    @classmethod
    def delta(cls, amount: float, switch_x, switch_p) -> "EnvelopeSpec":
        return cls(amount=amount, switch_x=list(switch_x), switch_p=list(switch_p))

    @classmethod
    def constant(cls, amount: float, value: float) -> "EnvelopeSpec":
        return cls(amount=amount, switch_x=[amount], switch_p=[value])

    def switching(self, x) -> np.ndarray:
        return np.interp(x, self.switch_x, self.switch_p)


class EnvelopeMoments(BaseModel):
    r: float
    v: float


class CapitalDistribution(BaseModel):
    """Masas del capital sobre la red k·dx, k = k0 .. k0 + N - 1."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: int = Field(default=0, ge=0)
    dx: float = Field(..., gt=0)
    k0: int = 0
    masses: np.ndarray

    @field_validator("masses", mode="before")
    @classmethod
    def _check_masses(cls, v):
        arr = np.array(v, dtype=float).ravel()
        if arr.size == 0 or np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError("masas vacías, negativas o no normalizadas")
        arr.flags.writeable = False
        return arr

    @classmethod
    def at_zero(cls, dx: float) -> "CapitalDistribution":
        return cls(dx=dx, k0=0, masses=[1.0])

    @property
    def values(self) -> np.ndarray:
        return (self.k0 + np.arange(self.masses.size)) * self.dx

    def mean(self) -> float:
        return float(np.dot(self.values, self.masses))

    def variance(self) -> float:
        return float(np.dot((self.values - self.mean()) ** 2, self.masses))

    def mass_at(self, value: float) -> float:
        i = int(round(value / self.dx)) - self.k0
        return float(self.masses[i]) if 0 <= i < self.masses.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"z": self.values, "mass": self.masses})
