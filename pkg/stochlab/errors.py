"""Jerarquía de excepciones de stochlab."""


class StochlabError(Exception):
    """Error base de la librería."""


class InvalidInputError(StochlabError, ValueError):
    """Entrada, parámetros, modelo o malla rechazados."""


class UndefinedCorrelationError(StochlabError):
    """Correlación sin definir (varianza nula)."""


class UndefinedScoreError(StochlabError):
    """Sentiment score sin órdenes."""


class DivergenceError(StochlabError):
    """Cantidad analítica divergente."""


class SaddleNotFoundError(StochlabError):
    """φ' no cambia de signo en el intervalo de búsqueda."""


class InvalidSaddleError(StochlabError):
    """El punto estacionario no es un máximo (φ'' >= 0)."""


class NumericalFailureError(StochlabError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OhlcFormatError(StochlabError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (línea {line})"
        super().__init__(message)
        self.line = line


class InsufficientDataError(StochlabError):
    """Menos datos utilizables de los necesarios."""


class GridOverflowError(StochlabError):
    def __init__(self, message, leaked_mass, suggested_max):
        super().__init__(f"{message}: masa perdida {leaked_mass:.3e}, extender la malla hasta {suggested_max:.4f}")
        self.leaked_mass = leaked_mass
        self.suggested_max = suggested_max


class OutOfRegimeError(StochlabError):
    """Parámetros fuera del régimen de validez de la fórmula cerrada."""


class OutOfSupportError(StochlabError):
    """Valor fuera del intervalo alcanzable."""
