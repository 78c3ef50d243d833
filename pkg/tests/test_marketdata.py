import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from stochlab.errors import InsufficientDataError, InvalidInputError, OhlcFormatError, UndefinedScoreError
from stochlab.marketdata import (
    asymmetry,
    asymmetry_table,
    close_to_close,
    lead_lag_correlation,
    load_ohlc,
    ohlc_from_frame,
    rolling_volatility,
    sentiment_score,
    session_returns,
    synthetic_ohlc,
)

CSV_HEADER = "date,open,high,low,close\n"


def _write(tmp_path, body, name="prices.csv"):
    path = tmp_path / name
    path.write_text(CSV_HEADER + body)
    return path


# --- Ingesta ---
def test_load_valid_file(tmp_path):
    path = _write(tmp_path, "2024-01-02,100,106,99,105\n2024-01-03,102,103,100,101\n2024-01-04,101,102,98,99\n")
    series = load_ohlc(path)
    assert len(series) == 3
    assert series.dropped_rows == 0
    assert series.label == "prices"


def test_non_positive_close_dropped(tmp_path):
    path = _write(tmp_path, "2024-01-02,100,106,99,105\n2024-01-03,102,103,100,0\n2024-01-04,101,102,98,99\n")
    series = load_ohlc(path)
    assert len(series) == 2
    assert series.dropped_rows == 1


def test_bad_date_reports_line(tmp_path):
    path = _write(tmp_path, "2024-01-02,100,106,99,105\nnot-a-date,102,103,100,101\n")
    with pytest.raises(OhlcFormatError) as info:
        load_ohlc(path)
    assert info.value.line == 3


def test_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("date,open\n2024-01-02,100\n2024-01-03,101\n")
    with pytest.raises(OhlcFormatError):
        load_ohlc(path)


def test_too_few_rows(tmp_path):
    path = _write(tmp_path, "2024-01-02,100,106,99,105\n")
    with pytest.raises(InsufficientDataError):
        load_ohlc(path)


def test_explicit_date_format(tmp_path):
    path = _write(tmp_path, "02/01/2024,100,106,99,105\n03/01/2024,102,103,100,101\n")
    series = load_ohlc(path, date_format="%d/%m/%Y")
    assert str(series.dates[1])[:10] == "2024-01-03"


def test_crash_day_flagged_not_removed():
    frame = synthetic_ohlc(days=500, seed=1, crash_day=250)
    series = ohlc_from_frame(frame)
    assert len(series) == 500
    assert frame["date"].iloc[250] in series.outliers
    cleaned = ohlc_from_frame(frame, drop_outliers=True)
    assert len(cleaned) < 500


# --- Rendimientos ---
def _series(opens, closes):
    dates = pd.bdate_range("2024-01-01", periods=len(opens)).strftime("%Y-%m-%d")
    return ohlc_from_frame(pd.DataFrame({"date": dates, "open": opens, "close": closes}))


def test_session_returns_values():
    sr = session_returns(_series([90.0, 100.0], [100.0, 105.0]))
    assert sr.d[0] == pytest.approx(np.log(1.05))
    sr = session_returns(_series([90.0, 102.0], [100.0, 101.0]))
    assert sr.n[0] == pytest.approx(np.log(1.02))


def test_flat_days_have_zero_intraday_return():
    sr = session_returns(_series([100.0, 101.0, 99.0], [100.0, 101.0, 99.0]))
    assert_allclose(sr.d, 0.0)


def test_close_to_close_decomposition():
    series = ohlc_from_frame(synthetic_ohlc(days=400, coupling="night_to_day", seed=2))
    sr = session_returns(series)
    assert_allclose(sr.d + sr.n, close_to_close(series), atol=1e-12)


# --- Asimetría ---
def test_night_to_day_coupling_detected():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=2000, coupling="night_to_day", seed=3)))
    report = asymmetry(sr, methods=["spearman"])
    entry = report.results["spearman"]
    assert entry.c_nd > 0.8
    assert entry.ratio > 2


def test_day_to_night_coupling_mirrored():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=2000, coupling="day_to_night", seed=4)))
    entry = asymmetry(sr, methods=["spearman"]).results["spearman"]
    assert entry.ratio < 0.5


def test_iid_returns_have_no_asymmetry():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=3000, seed=5)))
    entry = asymmetry(sr, methods=["spearman", "pearson"]).results["spearman"]
    bound = 3 / np.sqrt(sr.d.size)
    assert abs(entry.c_nd) < bound
    assert abs(entry.c_dn) < bound


def test_spearman_invariant_under_monotone_transform():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=600, coupling="night_to_day", seed=6)))
    base = asymmetry(sr, methods=["spearman"]).results["spearman"]
    # mismo signo para que |d| se transforme monótonamente
    transformed = type(sr)(d=np.sign(sr.d) * np.abs(sr.d) ** 3, n=sr.n)
    other = asymmetry(transformed, methods=["spearman"]).results["spearman"]
    assert other.c_nd == pytest.approx(base.c_nd, abs=1e-12)
    assert other.c_dn == pytest.approx(base.c_dn, abs=1e-12)


def test_asymmetry_needs_enough_days():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=20, seed=7)))
    with pytest.raises(InsufficientDataError):
        asymmetry(sr)


def test_asymmetry_table_row_per_report():
    reports = [asymmetry(session_returns(ohlc_from_frame(synthetic_ohlc(days=300, seed=s))), methods=["pearson"])
               for s in (8, 9)]
    table = asymmetry_table(reports)
    assert len(table) == 2
    assert {"pearson_c_nd", "pearson_c_dn", "pearson_ratio"} <= set(table.columns)


def test_mi_method_runs():
    sr = session_returns(ohlc_from_frame(synthetic_ohlc(days=500, coupling="night_to_day", seed=10)))
    entry = asymmetry(sr, methods=["mi_knn"]).results["mi_knn"]
    assert entry.c_nd > entry.c_dn


# --- Volatilidad ---
def test_rolling_volatility_constant_returns():
    assert_allclose(rolling_volatility(np.full(50, 0.003), 10), 0.0, atol=1e-10)


def test_rolling_volatility_annualization():
    returns = np.array([0.01, -0.01] * 20)
    sd = np.std(returns[:21], ddof=1)
    assert rolling_volatility(returns, 21)[0] == pytest.approx(sd * np.sqrt(252) * 100)
    unit = np.array([1.0, -1.0]) * 0.01 / np.std([1.0, -1.0], ddof=1)
    assert rolling_volatility(unit, 2)[0] == pytest.approx(15.8745, abs=1e-4)


def test_rolling_volatility_full_window_and_shift():
    rng = np.random.default_rng(11)
    returns = rng.normal(0, 0.01, size=60)
    full = rolling_volatility(returns, 60)
    assert full.size == 1
    assert full[0] == pytest.approx(np.std(returns, ddof=1) * np.sqrt(252) * 100)
    assert_allclose(rolling_volatility(returns + 0.05, 21), rolling_volatility(returns, 21), atol=1e-9)


def test_rolling_volatility_window_checks():
    with pytest.raises(InvalidInputError):
        rolling_volatility([0.1, 0.2], 1)


def test_lead_lag():
    rng = np.random.default_rng(12)
    a = rng.normal(size=2000)
    b = np.concatenate((rng.normal(size=5), a[:-5])) + 0.3 * rng.normal(size=2000)
    assert lead_lag_correlation(a, a, 0) == pytest.approx(1.0)
    taus = list(range(-10, 11))
    values = [lead_lag_correlation(a, b, tau) for tau in taus]
    assert taus[int(np.argmax(values))] == 5
    assert lead_lag_correlation(a, b, 3) == pytest.approx(lead_lag_correlation(b, a, -3))
    independent = rng.normal(size=2000)
    assert abs(lead_lag_correlation(a, independent, 2)) < 3 / np.sqrt(2000)


def test_lead_lag_overlap():
    with pytest.raises(InvalidInputError):
        lead_lag_correlation(np.arange(40.0), np.arange(40.0), 15)


# --- Sentiment ---
def test_sentiment_score():
    assert sentiment_score(150, 50) == pytest.approx(50.0)
    assert sentiment_score(7, 7) == 0.0
    assert sentiment_score(0, 9) == -100.0
    with pytest.raises(UndefinedScoreError):
        sentiment_score(0, 0)
