import numpy as np
import pytest

from stochlab.marketdata import synthetic_ohlc
from stochlab.models.grids import GridPdf


def gaussian_pdf(mean: float, sigma: float, dx: float = 0.01, width: float = 10.0) -> GridPdf:
    xs = np.arange(mean - width * sigma, mean + width * sigma + dx / 2, dx)
    density = np.exp(-0.5 * ((xs - mean) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    return GridPdf(x0=float(xs[0]), dx=dx, density=density).normalize()


@pytest.fixture
def standard_normal():
    return gaussian_pdf(0.0, 1.0)


@pytest.fixture
def ohlc_csv(tmp_path):
    """Escribe un CSV OHLC sintético y devuelve su ruta."""
    def _write(name="equity", **kwargs):
        path = tmp_path / f"{name}.csv"
        synthetic_ohlc(**kwargs).to_csv(path, index=False)
        return path
    return _write


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "out"
