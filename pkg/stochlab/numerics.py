"""
Núcleos numéricos compartidos: convolución sobre malla, cumulantes,
digamma, estimación de punto de silla, autovalor dominante de matrices
pequeñas y derivadas por stencil.
"""
import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, optimize, special, stats

from stochlab.config import DEGENERACY_RTOL, STENCIL_STEP
from stochlab.errors import (
    InvalidInputError,
    InvalidSaddleError,
    NumericalFailureError,
    SaddleNotFoundError,
)
from stochlab.models.grids import ComplexMatrix, CumulantSet, GridPdf, LeadingEigen

logger = logging.getLogger(__name__)

MAX_EIGEN_DIM = 8
RESIDUAL_TOL = 1e-10


# --- Convolución ---
def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


def fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolución lineal por FFT con relleno a potencia de dos; recorta negativos de redondeo."""
    size = a.size + b.size - 1
    nfft = _next_pow2(size)
    out = np.fft.irfft(np.fft.rfft(a, nfft) * np.fft.rfft(b, nfft), nfft)[:size]
    return np.clip(out, 0.0, None)


def grid_convolve(f: GridPdf, g: GridPdf, method: str = "fft", resample: bool = False) -> GridPdf:
    """
    Densidad de la suma de dos variables independientes.

    Args:
        f, g: densidades sobre mallas con el mismo dx
        method: 'fft' (por defecto) o 'direct'
        resample: si es True, la malla más gruesa se reinterpola al dx de la fina

    Returns:
        GridPdf: densidad normalizada sobre [f.x0 + g.x0, f.xmax + g.xmax]
    """
    if f.n == 0 or g.n == 0:
        raise InvalidInputError("malla vacía")
    if resample and not np.isclose(f.dx, g.dx, rtol=1e-12, atol=0.0):
        fine = min(f.dx, g.dx)
        f = f if np.isclose(f.dx, fine) else f.resample(fine)
        g = g if np.isclose(g.dx, fine) else g.resample(fine)
    if not np.isclose(f.dx, g.dx, rtol=1e-12, atol=0.0):
        raise InvalidInputError(f"dx distintos: {f.dx} vs {g.dx}")

    if method == "fft":
        values = fft_convolve(f.density, g.density)
    elif method == "direct":
        values = np.convolve(f.density, g.density)
    else:
        raise InvalidInputError(f"método de convolución desconocido: {method}")

    result = GridPdf(x0=f.x0 + g.x0, dx=f.dx, density=values * f.dx)
    return result.normalize()


def characteristic_function(pdf: GridPdf, k) -> np.ndarray:
    """⟨exp(ikX)⟩ por cuadratura trapezoidal."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    phases = np.exp(1j * np.outer(k, pdf.xs))
    return np.trapz(phases * pdf.density, dx=pdf.dx, axis=1) / pdf.mass()


# --- Cumulantes ---
def _from_central(mean: float, mu2: float, mu3: float, mu4: float) -> CumulantSet:
    return CumulantSet(c1=mean, c2=max(mu2, 0.0), c3=mu3, c4=mu4 - 3.0 * mu2 ** 2)


def cumulants(data: Union[GridPdf, Sequence[float], np.ndarray], weights=None) -> CumulantSet:
    """
    Primeros cuatro cumulantes.

    Acepta una GridPdf normalizada, una ley discreta (valores + pesos) o
    muestras (>= 4, estadísticos k insesgados).
    """
    if isinstance(data, GridPdf):
        if not data.is_normalized():
            raise InvalidInputError(f"GridPdf no normalizada (masa {data.mass():.8f})")
        mean = data.mean()
        return _from_central(mean, data.moment(2, mean), data.moment(3, mean), data.moment(4, mean))

    values = np.asarray(data, dtype=float).ravel()
    if weights is not None:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != values.shape:
            raise InvalidInputError("valores y pesos con longitudes distintas")
        if np.any(w < 0) or w.sum() <= 0:
            raise InvalidInputError("pesos negativos o de suma nula")
        w = w / w.sum()
        mean = float(np.dot(w, values))
        dev = values - mean
        return _from_central(mean, float(np.dot(w, dev ** 2)), float(np.dot(w, dev ** 3)), float(np.dot(w, dev ** 4)))

    if values.size < 4:
        raise InvalidInputError("se necesitan al menos 4 muestras")
    ks = [float(stats.kstat(values, n)) for n in (1, 2, 3, 4)]
    return CumulantSet(c1=ks[0], c2=max(ks[1], 0.0), c3=ks[2], c4=ks[3])


# --- Funciones especiales ---
def digamma(x):
    """ψ(x) para x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidInputError("digamma solo está definida aquí para x > 0")
    result = special.psi(arr)
    return float(result) if result.ndim == 0 else result


# --- Derivadas por stencil ---
def _stencil(f: Callable, x, order: int, h: float):
    if order == 1:
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)
    if order == 2:
        return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)
    raise InvalidInputError(f"orden de derivada no soportado: {order}")


def derivative(f: Callable, x, order: int = 1, h: float = STENCIL_STEP):
    """
    Stencil central de cinco puntos con un paso de Richardson (error O(h^6)).

    El paso por defecto es h = 1e-2 y no 1e-4: con h = 1e-4 el redondeo de
    una segunda diferencia (~eps/h² ≈ 1e-8 tras la cancelación) supera la
    precisión de 1e-9 que se pide a r y K, mientras que el truncamiento
    O(h^6) con h = 1e-2 queda en ~1e-12.
    """
    coarse = _stencil(f, x, order, h)
    fine = _stencil(f, x, order, h / 2)
    return (16 * fine - coarse) / 15


# --- Punto de silla ---
def saddle_point_estimate(phi: Callable[[float], float], k: float, bracket: Tuple[float, float] = (-10.0, 10.0),
                          log_f: Optional[Callable[[float], float]] = None, h: float = STENCIL_STEP) -> float:
    """
    Logaritmo de la aproximación de Laplace de ∫ f(z) exp(k φ(z)) dz.

    Args:
        phi: exponente, con dos derivadas (se evalúan por stencil)
        k: parámetro grande
        bracket: intervalo donde φ' cambia de signo
        log_f: logaritmo del prefactor (por defecto f = 1)

    Returns:
        float: log[ sqrt(2π / (-k φ''(z*))) f(z*) exp(k φ(z*)) ]
    """
    if k <= 0:
        raise InvalidInputError("k debe ser positivo")
    a, b = bracket
    dphi = lambda z: derivative(phi, z, 1, h)
    fa, fb = dphi(a), dphi(b)
    if not np.isfinite(fa) or not np.isfinite(fb) or np.sign(fa) == np.sign(fb):
        raise SaddleNotFoundError(f"φ' no cambia de signo en [{a}, {b}]: {fa:.3e}, {fb:.3e}")

    z_star = optimize.brentq(dphi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    slope = dphi(z_star)
    try:
        polished = optimize.newton(dphi, z_star, fprime=lambda z: derivative(phi, z, 2, h), tol=1e-15, maxiter=5)
        if a <= polished <= b and abs(dphi(polished)) < abs(slope):
            z_star, slope = polished, dphi(polished)
    except (RuntimeError, ZeroDivisionError):
        logger.debug("⚠️ Newton no mejoró la raíz de brentq, se mantiene")

    if abs(slope) > 1e-10:
        logger.warning(f"⚠️ |φ'(z*)| = {slope:.2e} por encima de 1e-10")
    curvature = derivative(phi, z_star, 2, h)
    if not curvature < 0:
        raise InvalidSaddleError(f"φ''(z*) = {curvature:.3e} no es negativa en z* = {z_star:.6g}")

    prefactor = 0.0 if log_f is None else float(log_f(z_star))
    value = 0.5 * np.log(2.0 * np.pi / (-k * curvature)) + prefactor + k * float(phi(z_star))
    logger.debug(f"Punto de silla z*={z_star:.10g}, φ''={curvature:.6g}, log I={value:.10g}")
    return float(value)


# --- Autovalor dominante ---
def eigen_leading(m: Union[ComplexMatrix, np.ndarray], rtol: float = DEGENERACY_RTOL) -> LeadingEigen:
    """
    Autovalor de mayor módulo con sus vectores derecho e izquierdo.

    Los empates en |λ| (tolerancia relativa rtol) marcan la degeneración; el
    autovalor principal es el empatado de mayor parte real. El vector
    derecho se normaliza a suma 1 cuando es posible y el izquierdo cumple
    y·x = 1.

    La matriz se equilibra (matrix_balance, solo escalado diagonal) antes de
    eig: Q̂(κ) mezcla entradas e^{±κ} y sin equilibrar los vectores izquierdo
    y derecho salen numéricamente ortogonales para |κ| grande.
    """
    matrix = m if isinstance(m, ComplexMatrix) else ComplexMatrix(entries=m)
    if matrix.dim > MAX_EIGEN_DIM:
        raise InvalidInputError(f"dimensión {matrix.dim} mayor que {MAX_EIGEN_DIM}")
    a = np.array(matrix.entries, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("la matriz contiene valores no finitos")

    try:
        balanced, (scale, _) = linalg.matrix_balance(a, permute=False, separate=True)
        w, vl, vr = linalg.eig(balanced, left=True, right=True)
    except linalg.LinAlgError as e:
        raise NumericalFailureError(f"eig no convergió: {e}") from e
    # balanced = D⁻¹·a·D con D = diag(scale)
    vr = vr * scale[:, None]
    vl = vl / scale[:, None].conj()

    moduli = np.abs(w)
    top = moduli.max()
    tied = np.flatnonzero(moduli >= top * (1.0 - rtol)) if top > 0 else np.arange(w.size)
    order = sorted(tied, key=lambda i: (-w[i].real, abs(w[i].imag)))
    i = order[0]
    lam = w[i]

    x = vr[:, i].copy()
    total = x.sum()
    x = x / total if abs(total) > 1e-12 else x / np.linalg.norm(x)
    y = vl[:, i].conj()
    overlap = y @ x
    if abs(overlap) < 1e-14:
        raise NumericalFailureError("vectores izquierdo y derecho ortogonales (matriz defectiva)", residual=float("nan"))
    y = y / overlap

    residual = float(max(np.linalg.norm(a @ x - lam * x), np.linalg.norm(y @ a - lam * y)))
    scale = max(1.0, np.linalg.norm(a), np.linalg.norm(x), np.linalg.norm(y))
    if residual > RESIDUAL_TOL * scale:
        raise NumericalFailureError(f"residuo {residual:.3e} por encima de la tolerancia", residual=residual)

    return LeadingEigen(
        eigenvalue=complex(lam),
        right=x,
        left=y,
        degenerate=bool(tied.size > 1),
        maximal=[complex(w[j]) for j in order],
        spectrum=[complex(v) for v in w],
        residual=residual,
    )
