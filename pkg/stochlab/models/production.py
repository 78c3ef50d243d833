# models/production.py
from typing import Callable, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import integrate, stats

from stochlab.config import LORENTZ_CUTOFF
from stochlab.models.grids import GridPdf

GAUSS_TAIL_SIGMAS = 8.5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


# --- Ley del ruido ---
class NoiseSpec(BaseModel):
    """
    Ley i.i.d. de los ruidos a_i.

    La ley lorentziana es la de Cauchy truncada a ±cutoff·γ y renormalizada,
    tanto en la simulación como en la recursión.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: Literal["gaussian", "lorentzian", "custom", "none"]
    sigma: Optional[float] = Field(default=None, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    cutoff: float = Field(default=LORENTZ_CUTOFF, gt=0)
    pdf: Optional[GridPdf] = None

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind == "gaussian" and self.sigma is None:
            raise ValueError("el ruido gaussiano necesita sigma > 0")
        if self.kind == "lorentzian" and self.gamma is None:
            raise ValueError("el ruido lorentziano necesita gamma > 0")
        if self.kind == "custom":
            if self.pdf is None:
                raise ValueError("el ruido custom necesita una GridPdf")
            if not self.pdf.is_normalized():
                raise ValueError(f"la GridPdf del ruido no está normalizada (masa {self.pdf.mass():.8f})")
        return self

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseSpec":
        return cls(kind="gaussian", sigma=sigma)

    @classmethod
    def lorentzian(cls, gamma: float, cutoff: float = LORENTZ_CUTOFF) -> "NoiseSpec":
        return cls(kind="lorentzian", gamma=gamma, cutoff=cutoff)

    @classmethod
    def custom(cls, pdf: GridPdf) -> "NoiseSpec":
        return cls(kind="custom", pdf=pdf)

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(kind="none")

    @property
    def scale(self) -> float:
        if self.kind == "gaussian":
            return self.sigma
        if self.kind == "lorentzian":
            return self.gamma
        if self.kind == "custom":
            return float(np.sqrt(self.pdf.variance()))
        return 0.0

    @property
    def half_support(self) -> float:
        if self.kind == "gaussian":
            return GAUSS_TAIL_SIGMAS * self.sigma
        if self.kind == "lorentzian":
            return self.cutoff * self.gamma
        if self.kind == "custom":
            return float(max(abs(self.pdf.x0), abs(self.pdf.xmax)))
        return 0.0

    @property
    def tail_mass(self) -> float:
        """Masa descartada por el truncamiento (solo lorentziana)."""
        if self.kind == "lorentzian":
            return float(1.0 - 2.0 / np.pi * np.arctan(self.cutoff))
        return 0.0

    def cdf(self, x, reflected: bool = False) -> np.ndarray:
        """P(a <= x), o P(-a <= x) si reflected."""
        x = np.asarray(x, dtype=float)
        if reflected and self.kind == "custom":
            return 1.0 - self.cdf(-x)
        if self.kind == "gaussian":
            return stats.norm.cdf(x / self.sigma)
        if self.kind == "lorentzian":
            bound = np.arctan(self.cutoff)
            clipped = np.clip(x / self.gamma, -self.cutoff, self.cutoff)
            return (np.arctan(clipped) + bound) / (2.0 * bound)
        if self.kind == "custom":
            cum = self.pdf.cdf()
            return np.interp(x, self.pdf.xs, cum / cum[-1], left=0.0, right=1.0)
        return (x >= 0).astype(float)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size)
        if self.kind == "lorentzian":
            u = rng.random(size)
            return self.gamma * np.tan(np.arctan(self.cutoff) * (2.0 * u - 1.0))
        if self.kind == "custom":
            cum = self.pdf.cdf()
            return np.interp(rng.random(size), cum / cum[-1], self.pdf.xs)
        return np.zeros(size)

    def cell_masses(self, dx: float, reflected: bool = False):
        """
        Masas exactas por celda centradas en k·dx.

        Returns:
            (k0, masses): índice de la primera celda y masas normalizadas
        """
        reach = int(np.ceil(self.half_support / dx))
        if self.kind == "custom":
            lo = -reach if reflected else int(np.floor(self.pdf.x0 / dx))
            hi = reach if reflected else int(np.ceil(self.pdf.xmax / dx))
        else:
            lo, hi = -reach, reach
        ks = np.arange(lo, hi + 1)
        edges = np.concatenate((ks - 0.5, [hi + 0.5])) * dx
        masses = np.clip(np.diff(self.cdf(edges, reflected=reflected)), 0.0, None)
        return int(lo), masses / masses.sum()

    def exp_moment(self, k: float) -> float:
        """⟨exp(k·a)⟩."""
        if self.kind == "gaussian":
            return float(np.exp(0.5 * (k * self.sigma) ** 2))
        if self.kind == "lorentzian":
            bound = self.cutoff * self.gamma
            norm = 2.0 * np.arctan(self.cutoff) / np.pi
            dens = lambda a: np.exp(k * a) * self.gamma / (np.pi * (a * a + self.gamma ** 2)) / norm
            value, _ = integrate.quad(dens, -bound, bound, points=[0.0], limit=400)
            return float(value)
        if self.kind == "custom":
            return float(np.trapz(np.exp(k * self.pdf.xs) * self.pdf.density, dx=self.pdf.dx) / self.pdf.mass())
        return 1.0

    def fourth_cumulant(self) -> float:
        """c4 de la ley del ruido."""
        if self.kind in ("gaussian", "none"):
            return 0.0
        if self.kind == "lorentzian":
            bound = self.cutoff * self.gamma
            norm = 2.0 * np.arctan(self.cutoff) / np.pi
            moment = lambda p: integrate.quad(
                lambda a: a ** p * self.gamma / (np.pi * (a * a + self.gamma ** 2)) / norm,
                -bound, bound, limit=400)[0]
            m2, m4 = moment(2), moment(4)
            return float(m4 - 3.0 * m2 * m2)
        mean = self.pdf.mean()
        m2 = self.pdf.moment(2, mean)
        m4 = self.pdf.moment(4, mean)
        return float(m4 - 3.0 * m2 * m2)


# --- Modelo de producción ---
class ProductionModelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float
    noise: NoiseSpec
    d: float = Field(default=0.0, ge=0.0, lt=1.0)

    @property
    def effective_drift(self) -> float:
        """g̃ = g - ln(1 - d)."""
        return float(self.g - np.log1p(-self.d))


# --- Masas por celda ---
class MassGrid(BaseModel):
    """Masas sobre las celdas [edge0 + k·dx, edge0 + (k+1)·dx)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    edge0: float
    dx: float = Field(..., gt=0)
    masses: np.ndarray

    @field_validator("masses", mode="before")
    @classmethod
    def _check_masses(cls, v):
        arr = np.array(v, dtype=float).ravel()
        if arr.size == 0 or np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("masas vacías, negativas o no finitas")
        arr.flags.writeable = False
        return arr

    @property
    def edges(self) -> np.ndarray:
        return self.edge0 + self.dx * np.arange(self.masses.size + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.edge0 + self.dx * (np.arange(self.masses.size) + 0.5)

    def total(self) -> float:
        return float(self.masses.sum())

    def cdf_at(self, x) -> np.ndarray:
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        return np.interp(x, self.edges, cum, left=0.0, right=cum[-1])

    def quantile(self, q) -> np.ndarray:
        cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        return np.interp(q, cum, self.edges)

    def expectation(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[fn(X)] con densidad constante por celda (Gauss-Legendre de 4 puntos)."""
        nodes = self.centers[:, None] + 0.5 * self.dx * _GL_NODES[None, :]
        cell_means = (fn(nodes) * _GL_WEIGHTS[None, :]).sum(axis=1) / 2.0
        return float(np.dot(self.masses, cell_means))

    def to_grid_pdf(self) -> GridPdf:
        return GridPdf.from_masses(self.edge0, self.dx, self.masses)


class PdfState(BaseModel):
    """Estado de la recursión en el instante t: z_t = log Z_t (opcional) e y_t = log Y_t."""
    model_config = ConfigDict(frozen=True)

    t: int = Field(..., ge=0)
    z: Optional[MassGrid] = None
    y: MassGrid

    @property
    def rho_z(self) -> Optional[GridPdf]:
        return None if self.z is None else self.z.to_grid_pdf()

    @property
    def rho_y(self) -> GridPdf:
        return self.y.to_grid_pdf()


# --- Resultados ---
class SimulationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: List[int]
    log_z: np.ndarray
    delta: np.ndarray

    def at(self, t: int):
        i = self.times.index(t)
        return self.log_z[i], self.delta[i]


class SaddleMoments(BaseModel):
    t: int
    mean_log_z: float
    mean_log_z_asymptotic: float
    var_log_z: float
    var_log_z_asymptotic: float
    var_delta: float
    var_delta_asymptotic: float
    sigma_inf_sq: float


class DeltaCumulants(BaseModel):
    c3: float
    c4: float
    c3_stationary: float
    c4_noise: float
    c4_alternative: float


class KurtosisDiagnostic(BaseModel):
    t: int
    measured_c4: float
    c4_from_noise: float
    c4_alternative: float
    closer: Literal["noise", "alternative"]


class MomentClosedForms(BaseModel):
    t: int
    mean_z: float
    mean_z_sq: float

    @property
    def var_z(self) -> float:
        return self.mean_z_sq - self.mean_z ** 2
