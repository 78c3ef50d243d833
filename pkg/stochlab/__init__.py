"""stochlab: dependencia no lineal, producción acumulada y juegos de Parrondo."""
__version__ = "1.0.0"

from stochlab.errors import InvalidInputError, StochlabError  # noqa: E402

__all__ = ["__version__", "StochlabError", "InvalidInputError"]
