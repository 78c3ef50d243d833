import os
import logging
from dotenv import load_dotenv

# Cargar variables de entorno
load_dotenv()


# Detección del entorno
def get_environment():
    """
    Detecta el entorno de ejecución.
    Returns:
        str: 'production' si STOCHLAB_ENV lo indica, 'development' en otro caso
    """
    env = os.getenv("STOCHLAB_ENV", "development").strip().lower()
    if env == "production":
        return "production"
    return "development"


ENVIRONMENT = get_environment()
IS_PRODUCTION = ENVIRONMENT == "production"

# Nivel de logging explícito (opcional)
LOG_LEVEL = os.getenv("STOCHLAB_LOG_LEVEL")


def get_thread_cap():
    """Número máximo de hilos para shards de Monte-Carlo y barridos de parámetros"""
    raw = os.getenv("STOCHLAB_THREADS")
    if raw is None or raw.strip() == "":
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"⚠️ STOCHLAB_THREADS inválido ({raw!r}), se usa 1")
        return 1
    return max(1, value)


# Configuración de paralelismo
THREADS = get_thread_cap()
MC_SHARD_SIZE = int(os.getenv("STOCHLAB_MC_SHARD", "50000"))

# Configuración de la malla de producción
GRID_DX = float(os.getenv("STOCHLAB_GRID_DX", "0.005"))
TAIL_TOL = float(os.getenv("STOCHLAB_TAIL_TOL", "1e-14"))
LORENTZ_CUTOFF = float(os.getenv("STOCHLAB_LORENTZ_CUTOFF", "50"))

# Configuración de salida
OUT_DIR = os.getenv("STOCHLAB_OUT_DIR", "out")

# Tolerancias compartidas
NORMALIZATION_TOL = 1e-6
DEGENERACY_RTOL = 1e-9
# h = 1e-4 deja la segunda derivada dominada por redondeo; ver numerics.derivative
STENCIL_STEP = 1e-2
LEAK_TOL = 1e-4

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level=None):
    """
    Configura el logging de la aplicación con el formato estándar.

    Args:
        level: nivel explícito (nombre o entero); si es None se usa
            STOCHLAB_LOG_LEVEL o el nivel del entorno
    """
    if level is None:
        level = LOG_LEVEL or (logging.INFO if IS_PRODUCTION else logging.DEBUG)
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[
            logging.StreamHandler()
        ],
        force=True,
    )

    # Silenciar módulos ruidosos
    for noisy_logger in ['numexpr', 'matplotlib', 'PIL']:
        logging.getLogger(noisy_logger).setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Entorno: {ENVIRONMENT}")
    logger.debug(f"Hilos máximos: {THREADS}")
    logger.debug(f"Tamaño de shard Monte-Carlo: {MC_SHARD_SIZE}")
    return logger
