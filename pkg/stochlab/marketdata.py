"""
Ingesta OHLC y análisis empírico: rendimientos intradía/nocturnos,
asimetría temporal de la volatilidad, volatilidad anualizada móvil,
correlación con desfase y sentiment score.
"""
import logging
import re
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from stochlab.errors import (
    InsufficientDataError,
    InvalidInputError,
    OhlcFormatError,
    UndefinedScoreError,
)
from stochlab.infotheory import mi_knn, pearson, spearman
from stochlab.models.info import PairedSamples
from stochlab.models.market import AsymmetryEntry, AsymmetryReport, OhlcSeries, SessionReturns

logger = logging.getLogger(__name__)

TRADING_DAYS = 252
OUTLIER_SIGMAS = 5.0
MIN_ASYMMETRY_DAYS = 30
MIN_OVERLAP = 30
DEFAULT_COLUMNS = {"date": "date", "open": "open", "high": "high", "low": "low", "close": "close"}
ASYMMETRY_METHODS = ("pearson", "spearman", "mi_knn")


# --- Ingesta ---
def _parser_line(error: Exception) -> Optional[int]:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def _resolve_columns(frame: pd.DataFrame, columns: Optional[Dict[str, str]]) -> Dict[str, str]:
    mapping = dict(DEFAULT_COLUMNS)
    mapping.update(columns or {})
    lookup = {str(c).strip().lower(): c for c in frame.columns}
    resolved = {}
    for field in ("date", "open", "close"):
        wanted = mapping[field].strip().lower()
        if wanted not in lookup:
            raise OhlcFormatError(f"falta la columna '{mapping[field]}'", line=1)
        resolved[field] = lookup[wanted]
    return resolved


def _flag_outliers(frame: pd.DataFrame, sigmas: float) -> np.ndarray:
    """Marca los días cuyo rendimiento intradía o nocturno supera sigmas·σ."""
    flags = np.zeros(len(frame), dtype=bool)
    if len(frame) < 3:
        return flags
    o = frame["open"].to_numpy()
    c = frame["close"].to_numpy()
    d = np.log(c[1:] / o[1:])
    n = np.log(o[1:] / c[:-1])
    for series in (d, n):
        sd = series.std(ddof=1)
        if sd > 0:
            flags[1:] |= np.abs(series - series.mean()) > sigmas * sd
    return flags


def ohlc_from_frame(frame: pd.DataFrame, columns: Optional[Dict[str, str]] = None, date_format: Optional[str] = None,
                    drop_outliers: bool = False, outlier_sigmas: float = OUTLIER_SIGMAS, label: str = "") -> OhlcSeries:
    """
    Limpia un DataFrame OHLC.

    Las filas con apertura o cierre ausentes o no positivos se descartan y
    se cuentan. Los saltos de más de outlier_sigmas·σ se marcan pero no se
    eliminan salvo con drop_outliers.
    """
    cols = _resolve_columns(frame, columns)
    data = pd.DataFrame({
        "date": frame[cols["date"]],
        "open": pd.to_numeric(frame[cols["open"]], errors="coerce"),
        "close": pd.to_numeric(frame[cols["close"]], errors="coerce"),
    })
    data["line"] = np.arange(len(data)) + 2

    parsed = pd.to_datetime(data["date"], format=date_format or "ISO8601", errors="coerce")
    bad_dates = parsed.isna() & data["date"].notna()
    if bad_dates.any():
        line = int(data.loc[bad_dates, "line"].iloc[0])
        raise OhlcFormatError(f"fecha no interpretable: {data.loc[bad_dates, 'date'].iloc[0]!r}", line=line)
    data["date"] = parsed

    usable = data["date"].notna() & (data["open"] > 0) & (data["close"] > 0)
    dropped = int((~usable).sum())
    if dropped:
        logger.warning(f"⚠️ {dropped} filas descartadas por precios ausentes o no positivos")
    data = data[usable]

    if not data["date"].is_monotonic_increasing:
        logger.warning("⚠️ Fechas desordenadas, se ordenan")
        data = data.sort_values("date", kind="mergesort")
    duplicated = data["date"].duplicated()
    if duplicated.any():
        raise OhlcFormatError("fecha duplicada", line=int(data.loc[duplicated, "line"].iloc[0]))
    if len(data) < 2:
        raise InsufficientDataError(f"solo {len(data)} filas utilizables")

    data = data.reset_index(drop=True)
    flags = _flag_outliers(data, outlier_sigmas)
    outliers = [ts.date().isoformat() for ts in data.loc[flags, "date"]]
    if outliers:
        logger.warning(f"⚠️ {len(outliers)} días marcados como atípicos: {', '.join(outliers[:5])}")
    if drop_outliers and flags.any():
        data = data[~flags].reset_index(drop=True)
        if len(data) < 2:
            raise InsufficientDataError("sin datos tras eliminar atípicos")

    return OhlcSeries(
        dates=data["date"].to_numpy(dtype="datetime64[ns]"),
        open=data["open"].to_numpy(),
        close=data["close"].to_numpy(),
        dropped_rows=dropped,
        outliers=outliers,
        label=label,
    )


def load_ohlc(path, columns: Optional[Dict[str, str]] = None, date_format: Optional[str] = None,
              drop_outliers: bool = False, outlier_sigmas: float = OUTLIER_SIGMAS) -> OhlcSeries:
    """
    Lee un CSV date,open,high,low,close (high/low se aceptan y se ignoran).

    Args:
        path: ruta del CSV
        columns: renombrado opcional, p. ej. {'close': 'Adj Close'}
        date_format: formato explícito; por defecto ISO-8601
        drop_outliers: eliminar los días marcados (análisis de sensibilidad)

    Returns:
        OhlcSeries con el recuento de filas descartadas y los días atípicos
    """
    logger.info(f"🔄 Cargando OHLC desde {path}")
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise OhlcFormatError(f"CSV no interpretable: {e}", line=_parser_line(e)) from e
    except pd.errors.EmptyDataError as e:
        raise InsufficientDataError(f"{path} está vacío") from e
    label = getattr(path, "stem", None) or str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    series = ohlc_from_frame(frame, columns, date_format, drop_outliers, outlier_sigmas, label=label)
    logger.info(f"✅ {len(series)} días cargados ({series.dropped_rows} descartados)")
    return series


# --- Rendimientos ---
def session_returns(s: OhlcSeries) -> SessionReturns:
    """d_k = ln(c_k/o_k), n_k = ln(o_k/c_{k-1}) para k = 1..T-1."""
    if len(s) < 2:
        raise InsufficientDataError("se necesitan al menos dos días")
    d = np.log(s.close[1:] / s.open[1:])
    n = np.log(s.open[1:] / s.close[:-1])
    return SessionReturns(d=d, n=n, label=s.label)


def close_to_close(s: OhlcSeries) -> np.ndarray:
    return np.log(s.close[1:] / s.close[:-1])


# --- Asimetría ---
def _measure(method: str, a: np.ndarray, b: np.ndarray, knn_k: int) -> float:
    pairs = PairedSamples(x=a, y=b)
    if method == "pearson":
        return pearson(pairs)
    if method == "spearman":
        return spearman(pairs)
    if method == "mi_knn":
        if pairs.n < 3 * knn_k:
            raise InvalidInputError(f"MI con N={pairs.n} < 3K={3 * knn_k}")
        return mi_knn(pairs, knn_k, algorithm=2).value
    raise InvalidInputError(f"método desconocido: {method}")


def asymmetry(sr: SessionReturns, methods: Iterable[str] = ASYMMETRY_METHODS, knn_k: int = 5) -> AsymmetryReport:
    """
    C_nd (|d_k| con la noche previa |n_k|) y C_dn (|d_k| con la noche
    siguiente |n_{k+1}|) para cada medida, sobre toda la muestra.
    """
    days = sr.d.size
    if days < MIN_ASYMMETRY_DAYS:
        raise InsufficientDataError(f"asimetría con {days} días alineados (< {MIN_ASYMMETRY_DAYS})")
    vol_d = sr.intraday_volatility
    vol_n = sr.overnight_volatility

    results = {}
    for method in methods:
        c_nd = _measure(method, vol_d, vol_n, knn_k)
        c_dn = _measure(method, vol_d[:-1], vol_n[1:], knn_k)
        if method == "mi_knn":
            ratio = c_nd / c_dn if c_nd > 0 and c_dn > 0 else None
        else:
            ratio = c_nd / c_dn if c_dn != 0 else None
        results[method] = AsymmetryEntry(c_nd=c_nd, c_dn=c_dn, ratio=ratio)
        logger.debug(f"{sr.label or 'serie'} {method}: C_nd={c_nd:.4f} C_dn={c_dn:.4f} ratio={ratio}")

    return AsymmetryReport(label=sr.label, n_days=days, knn_k=knn_k, results=results)


def asymmetry_table(reports: Sequence[AsymmetryReport]) -> pd.DataFrame:
    return pd.DataFrame([report.to_row() for report in reports])


# --- Volatilidad y correlaciones ---
def rolling_volatility(returns, n: int = 21) -> np.ndarray:
    """Desviación típica muestral (n-1) sobre ventanas de n días × √252 × 100."""
    if n < 2:
        raise InvalidInputError("la ventana debe tener al menos 2 días")
    r = np.asarray(returns, dtype=float).ravel()
    if r.size < n:
        raise InvalidInputError(f"serie de {r.size} valores más corta que la ventana {n}")
    windows = sliding_window_view(r, n)
    return windows.std(axis=1, ddof=1) * np.sqrt(TRADING_DAYS) * 100.0


def lead_lag_correlation(a, b, tau: int, min_overlap: int = MIN_OVERLAP) -> float:
    """Correlación de Pearson entre a_t y b_{t+tau}."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    length = min(a.size, b.size)
    overlap = length - abs(tau)
    if overlap < min_overlap:
        raise InvalidInputError(f"solapamiento {overlap} menor que {min_overlap}")
    if tau >= 0:
        left, right = a[: length - tau], b[tau:length]
    else:
        left, right = a[-tau:length], b[: length + tau]
    return pearson(PairedSamples(x=left, y=right))


def sentiment_score(calls: int, puts: int) -> float:
    if calls < 0 or puts < 0:
        raise InvalidInputError("los recuentos de órdenes no pueden ser negativos")
    total = calls + puts
    if total == 0:
        raise UndefinedScoreError("sin órdenes call ni put")
    return 100.0 * (calls - puts) / total


# --- Datos sintéticos ---
def synthetic_ohlc(days: int = 1000, coupling: str = "none", seed: int = 0,
                   crash_day: Optional[int] = None, crash: float = -0.2, start: str = "2020-01-02") -> pd.DataFrame:
    """
    OHLC sintético con acoplamiento conocido entre volatilidades.

    Args:
        coupling: 'none' (i.i.d.), 'night_to_day' (|d_k| sigue a |n_k|) o
            'day_to_night' (|n_{k+1}| sigue a |d_k|)
        crash_day: índice de un día con salto nocturno de rendimiento `crash`
    """
    if coupling not in ("none", "night_to_day", "day_to_night"):
        raise InvalidInputError(f"acoplamiento desconocido: {coupling}")
    rng = np.random.default_rng(seed)

    if coupling == "none":
        level = np.full(days, 0.01)
    else:
        # volatilidad agrupada: log-nivel AR(1)
        h = np.zeros(days)
        xi = rng.standard_normal(days)
        for k in range(1, days):
            h[k] = 0.95 * h[k - 1] + 0.1 * xi[k]
        level = 0.01 * np.exp(h)

    shock_n = rng.standard_normal(days)
    shock_d = rng.standard_normal(days)
    small = rng.standard_normal(days)
    signs = rng.choice([-1.0, 1.0], size=days)

    n = 0.6 * level * shock_n
    d = level * shock_d
    if coupling == "night_to_day":
        d = signs * level * (0.9 * np.abs(shock_n) + 0.1 * np.abs(small))
    elif coupling == "day_to_night":
        n[1:] = 0.6 * signs[1:] * level[1:] * (0.9 * np.abs(shock_d[:-1]) + 0.1 * np.abs(small[1:]))
    if crash_day is not None:
        n[crash_day] = np.log1p(crash)

    opens = np.empty(days)
    closes = np.empty(days)
    price = 100.0
    for k in range(days):
        opens[k] = price * np.exp(n[k]) if k > 0 else price
        closes[k] = opens[k] * np.exp(d[k])
        price = closes[k]

    dates = pd.bdate_range(start=start, periods=days)
    return pd.DataFrame({
        "date": dates.strftime("%Y-%m-%d"),
        "open": opens,
        "high": np.maximum(opens, closes) * 1.001,
        "low": np.minimum(opens, closes) * 0.999,
        "close": closes,
    })
