"""
Medidas de dependencia e información: Pearson, Spearman, autocorrelación,
familia de entropías discretas, información mutua por histograma y por
vecinos más cercanos (dos algoritmos), oráculo gaussiano y generador AR(1).

Todas las cantidades se expresan en nats.
"""
import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import signal, special, stats
from scipy.spatial import cKDTree

from stochlab.errors import DivergenceError, InvalidInputError, UndefinedCorrelationError
from stochlab.models.info import DiscreteJoint, InformationMeasures, MiEstimate, PairedSamples
from stochlab.utils.parallel import thread_map

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_N = 5000
_CHUNK_CELLS = 4_000_000


def _as_pairs(s: Union[PairedSamples, Tuple[Sequence[float], Sequence[float]]]) -> PairedSamples:
    if isinstance(s, PairedSamples):
        return s
    x, y = s
    return PairedSamples(x=x, y=y)


def to_bits(nats: float) -> float:
    """Conversión de visualización nats -> bits."""
    return nats / np.log(2.0)


# --- Correlaciones ---
def pearson(s) -> float:
    s = _as_pairs(s)
    if np.ptp(s.x) == 0 or np.ptp(s.y) == 0:
        raise UndefinedCorrelationError("varianza nula en una de las variables")
    r = stats.pearsonr(s.x, s.y)[0]
    return float(np.clip(r, -1.0, 1.0))


def spearman(s) -> float:
    """Pearson sobre rangos promediados (los empates reciben el rango medio)."""
    s = _as_pairs(s)
    ranks = PairedSamples(x=stats.rankdata(s.x), y=stats.rankdata(s.y))
    return pearson(ranks)


def autocorrelation(series, lag: int) -> float:
    x = np.asarray(series, dtype=float).ravel()
    if lag < 0 or lag >= x.size:
        raise InvalidInputError(f"lag {lag} fuera de rango para una serie de longitud {x.size}")
    dev = x - x.mean()
    denominator = np.dot(dev, dev)
    if denominator == 0:
        raise UndefinedCorrelationError("serie constante")
    return float(np.dot(dev[: x.size - lag], dev[lag:]) / denominator)


# --- Entropías discretas ---
def entropy(p) -> float:
    """H = -Σ p ln p, con 0·ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    return float(-special.xlogy(p, p).sum())


def _mi_from_table(p2: np.ndarray) -> float:
    h_x = entropy(p2.sum(axis=1))
    h_y = entropy(p2.sum(axis=0))
    return max(h_x + h_y - entropy(p2), 0.0)


def kl_divergence(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InvalidInputError("p y q con formas distintas")
    if np.any((q == 0) & (p > 0)):
        return float("inf")
    return float((special.xlogy(p, p) - special.xlogy(p, q)).sum())


def conditional_mutual_information(p_xyz) -> float:
    """I(X;Y|Z) = I(X;Y,Z) - I(X;Z) para una tabla p(x, y, z)."""
    p = p_xyz.p if isinstance(p_xyz, DiscreteJoint) else DiscreteJoint(p=p_xyz).p
    if p.ndim != 3:
        raise InvalidInputError("se espera una tabla de tres dimensiones")
    i_x_yz = _mi_from_table(p.reshape(p.shape[0], -1))
    i_x_z = _mi_from_table(p.sum(axis=1))
    return max(i_x_yz - i_x_z, 0.0)


def information_measures(j: DiscreteJoint, q=None) -> InformationMeasures:
    """
    Familia de entropías de una ley conjunta discreta.

    Args:
        j: ley conjunta p(x, y) o p(x, y, z)
        q: ley de referencia opcional (misma forma) para la divergencia KL

    Returns:
        InformationMeasures con H(X), H(Y), H(X,Y), H(X|Y), I(X,Y), D(p||q)
        y, para tablas de tres dimensiones, I(X;Y|Z)
    """
    if not isinstance(j, DiscreteJoint):
        j = DiscreteJoint(p=j)
    p_xy = j.p if j.p.ndim == 2 else j.p.sum(axis=2)
    h_x = entropy(p_xy.sum(axis=1))
    h_y = entropy(p_xy.sum(axis=0))
    h_xy = entropy(p_xy)

    kl = None
    if q is not None:
        q_arr = q.p if isinstance(q, DiscreteJoint) else np.asarray(q, dtype=float)
        kl = kl_divergence(j.p, q_arr)

    return InformationMeasures(
        h_x=h_x,
        h_y=h_y,
        h_xy=h_xy,
        h_x_given_y=h_xy - h_y,
        mutual_information=max(h_x + h_y - h_xy, 0.0),
        kl_divergence=kl,
        conditional_mi=conditional_mutual_information(j) if j.p.ndim == 3 else None,
    )


# --- Información mutua por histograma ---
def histogram_joint(s, bins: int) -> DiscreteJoint:
    """Ley conjunta empírica con bins de igual anchura sobre [min, max] de cada margen."""
    s = _as_pairs(s)
    if bins < 2:
        raise InvalidInputError("se necesitan al menos 2 bins")
    if np.ptp(s.x) == 0 or np.ptp(s.y) == 0:
        raise InvalidInputError("margen degenerado (min = max)")
    counts, _, _ = np.histogram2d(
        s.x, s.y, bins=bins, range=[[s.x.min(), s.x.max()], [s.y.min(), s.y.max()]]
    )
    return DiscreteJoint.from_counts(counts)


def mi_histogram(s, bins: int) -> MiEstimate:
    s = _as_pairs(s)
    value = information_measures(histogram_joint(s, bins)).mutual_information
    return MiEstimate(value=value, method="histogram", params={"bins": int(bins)}, N=s.n)


# --- Información mutua por K vecinos ---
def _jitter(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    span = np.ptp(values)
    scale = 1e-10 * (span if span > 0 else 1.0)
    return values + rng.uniform(-scale, scale, size=values.size)


def _neighbours_brute(x: np.ndarray, y: np.ndarray, K: int):
    """Distancia max-norm al K-ésimo vecino y proyecciones por eje, en bloques."""
    n = x.size
    eps = np.empty(n)
    eps_x = np.empty(n)
    eps_y = np.empty(n)
    chunk = max(1, _CHUNK_CELLS // n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        rows = np.arange(start, stop)
        dxm = np.abs(x[rows, None] - x[None, :])
        dym = np.abs(y[rows, None] - y[None, :])
        dz = np.maximum(dxm, dym)
        dz[rows - start, rows] = np.inf
        idx = np.argpartition(dz, K - 1, axis=1)[:, :K]
        eps[start:stop] = np.take_along_axis(dz, idx, axis=1).max(axis=1)
        eps_x[start:stop] = np.take_along_axis(dxm, idx, axis=1).max(axis=1)
        eps_y[start:stop] = np.take_along_axis(dym, idx, axis=1).max(axis=1)
    return eps, eps_x, eps_y


def _neighbours_tree(x: np.ndarray, y: np.ndarray, K: int):
    points = np.column_stack([x, y])
    tree = cKDTree(points)
    _, idx = tree.query(points, k=K + 1, p=np.inf)
    idx = idx[:, 1:]
    dxm = np.abs(x[idx] - x[:, None])
    dym = np.abs(y[idx] - y[:, None])
    eps_x = dxm.max(axis=1)
    eps_y = dym.max(axis=1)
    return np.maximum(eps_x, eps_y), eps_x, eps_y


def _count_brute(values: np.ndarray, radius: np.ndarray, strict: bool) -> np.ndarray:
    n = values.size
    counts = np.empty(n, dtype=np.int64)
    chunk = max(1, _CHUNK_CELLS // n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d = np.abs(values[start:stop, None] - values[None, :])
        r = radius[start:stop, None]
        inside = d < r if strict else d <= r
        counts[start:stop] = inside.sum(axis=1) - 1
    return counts


def _count_tree(values: np.ndarray, radius: np.ndarray, strict: bool) -> np.ndarray:
    tree = cKDTree(values[:, None])
    r = np.nextafter(radius, 0.0) if strict else radius
    return np.asarray(tree.query_ball_point(values[:, None], r=r, p=np.inf, return_length=True)) - 1


def mi_knn(s, K: int = 5, algorithm: int = 1, neighbor_search: str = "auto", seed: int = 0) -> MiEstimate:
    """
    Estimador de información mutua por K vecinos más cercanos (norma máximo).

    Args:
        s: muestras emparejadas
        K: número de vecinos
        algorithm: 1 (conteos estrictos dentro de ε/2) o 2 (conteos no
            estrictos dentro de las proyecciones por eje)
        neighbor_search: 'brute', 'kdtree' o 'auto' (brute hasta 5000 puntos)
        seed: semilla del jitter que deshace puntos duplicados

    Returns:
        MiEstimate en nats
    """
    s = _as_pairs(s)
    n = s.n
    if K < 1 or n <= K + 1:
        raise InvalidInputError(f"se requiere K >= 1 y N > K + 1 (K={K}, N={n})")
    if algorithm not in (1, 2):
        raise InvalidInputError(f"algoritmo desconocido: {algorithm}")
    if neighbor_search == "auto":
        neighbor_search = "brute" if n <= BRUTE_FORCE_MAX_N else "kdtree"
    if neighbor_search not in ("brute", "kdtree"):
        raise InvalidInputError(f"búsqueda de vecinos desconocida: {neighbor_search}")

    rng = np.random.default_rng(seed)
    x = _jitter(np.asarray(s.x, dtype=float), rng)
    y = _jitter(np.asarray(s.y, dtype=float), rng)

    find = _neighbours_brute if neighbor_search == "brute" else _neighbours_tree
    count = _count_brute if neighbor_search == "brute" else _count_tree
    eps, eps_x, eps_y = find(x, y, K)

    if algorithm == 1:
        n_x = count(x, eps, strict=True)
        n_y = count(y, eps, strict=True)
        value = special.psi(K) - np.mean(special.psi(n_x + 1) + special.psi(n_y + 1)) + special.psi(n)
    else:
        n_x = np.maximum(count(x, eps_x, strict=False), 1)
        n_y = np.maximum(count(y, eps_y, strict=False), 1)
        value = special.psi(K) - 1.0 / K - np.mean(special.psi(n_x) + special.psi(n_y)) + special.psi(n)

    logger.debug(f"MI KNN{algorithm} K={K} N={n} ({neighbor_search}): {value:.6f} nats")
    return MiEstimate(value=float(value), method=f"knn{algorithm}", params={"K": int(K)}, N=n)


# --- Oráculos gaussianos ---
def gaussian_mi(a: float) -> float:
    """I = -½ ln(1 - a²) para el par (X_t, a X_{t-1}) de un AR(1) estacionario."""
    if abs(a) >= 1:
        raise DivergenceError(f"la información mutua diverge para |a| >= 1 (a={a})")
    return float(-0.5 * np.log1p(-a * a))


def gaussian_mi_from_covariance(cov, n_x: int) -> float:
    """I = ½ ln(det Σ_X det Σ_Y / det Σ) para un vector gaussiano partido en (X, Y)."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or not 0 < n_x < cov.shape[0]:
        raise InvalidInputError("covarianza o partición inválida")
    signs_logdets = [np.linalg.slogdet(m) for m in (cov[:n_x, :n_x], cov[n_x:, n_x:], cov)]
    if any(sign <= 0 for sign, _ in signs_logdets):
        raise InvalidInputError("la covarianza no es definida positiva")
    (_, ld_x), (_, ld_y), (_, ld) = signs_logdets
    return float(0.5 * (ld_x + ld_y - ld))


def ar1_generate(a: float, c: float, sigma: float, N: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Serie AR(1) x_t = c + a x_{t-1} + η_t desde el estado estacionario.

    Returns:
        (x, y): x_1..x_N y el par y_t = a·x_{t-1}
    """
    if abs(a) >= 1:
        raise InvalidInputError(f"AR(1) no estacionario para |a| >= 1 (a={a})")
    if N < 2 or sigma < 0:
        raise InvalidInputError("se requiere N >= 2 y sigma >= 0")
    rng = np.random.default_rng(seed)
    mu = c / (1.0 - a)
    x0 = rng.normal(mu, sigma / np.sqrt(1.0 - a * a)) if sigma > 0 else mu
    drive = c + sigma * rng.standard_normal(N)
    x, _ = signal.lfilter([1.0], [1.0, -a], drive, zi=[a * x0])
    previous = np.concatenate(([x0], x[:-1]))
    return x, a * previous


def mi_sweep(a_values: Iterable[float], n: int = 1000, k: int = 5, bins: int = 10,
             seeds: int = 20, base_seed: int = 0) -> pd.DataFrame:
    """
    Tabla de estimaciones de MI sobre pares AR(1) para varios acoplamientos.

    Cada fila resume `seeds` repeticiones: media y desviación absoluta media
    respecto al valor analítico para histograma, KNN1 y KNN2.
    """
    a_values = [float(a) for a in a_values]
    jobs = [(a, base_seed + i) for a in a_values for i in range(seeds)]

    def run(job):
        a, seed = job
        x, y = ar1_generate(a, 0.0, 1.0, n, seed)
        pairs = PairedSamples(x=x, y=y)
        return {
            "a": a,
            "seed": seed,
            "histogram": mi_histogram(pairs, bins).value,
            "knn1": mi_knn(pairs, k, 1, seed=seed).value,
            "knn2": mi_knn(pairs, k, 2, seed=seed).value,
        }

    logger.info(f"🔄 Barrido MI: {len(a_values)} valores de a x {seeds} semillas (N={n}, K={k}, bins={bins})")
    raw = pd.DataFrame(thread_map(run, jobs))
    raw["analytic"] = raw["a"].map(gaussian_mi)
    rows = []
    for a, group in raw.groupby("a", sort=True):
        exact = group["analytic"].iloc[0]
        row = {"a": a, "analytic": exact}
        for method in ("histogram", "knn1", "knn2"):
            row[f"{method}_mean"] = group[method].mean()
            row[f"{method}_std"] = group[method].std(ddof=1) if len(group) > 1 else 0.0
            row[f"{method}_mad"] = (group[method] - exact).abs().mean()
        rows.append(row)
    logger.info("✅ Barrido MI completado")
    return pd.DataFrame(rows)
