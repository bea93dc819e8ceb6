import logging
import os

from pydantic import PositiveInt, TypeAdapter, ValidationError
from rich.console import Console
from rich.logging import RichHandler

logger = logging.getLogger(__name__)

_POSITIVE_INT = TypeAdapter(PositiveInt)


def env_positive_int(name, default):
    """Positive integer from the environment; malformed values fall back to default."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return _POSITIVE_INT.validate_python(raw.strip())
    except ValidationError:
        logger.warning("ignoring %s=%r, expected a positive integer; using %d", name, raw, default)
        return default


def env_log_level(name, default):
    raw = os.getenv(name, default).strip().upper()
    if isinstance(logging.getLevelName(raw), int):
        return raw
    logger.warning("ignoring %s=%r, not a logging level; using %s", name, raw, default)
    return default


# Parallelism
CURSEKIT_THREADS = env_positive_int("CURSEKIT_THREADS", 1)
LOG_LEVEL = env_log_level("CURSEKIT_LOG_LEVEL", "WARNING")

# Quadrature
ABS_TOL = 1e-10
REL_TOL = 1e-10
MAX_SUBDIVISIONS = 10_000
TAIL_CUTOFF = 12.0

# 1-D maximization
GRID_POINTS = 2001
REFINE_TOL = 1e-12
SUP_GRID_POINTS = 10_001

# Weighted integration over the real line
WEIGHTED_GRID_POINTS = 4097
STABILITY_RTOL = 1e-3

# Discrepancy
GENERALIZED_D_MAX = 16
BOX_BUDGET = 2_000_000
BOX_SUBDIVISIONS = 200
MC_SAMPLES = 100_000
MC_CHUNK = 1 << 15
# sample-by-node cells held in memory at once (Monte Carlo chunks, p = 2 pair sums)
CELL_BUDGET = 1 << 24

# Fooling-function certificates
BOUNDARY_BUDGET = 1_000_000
BRUTE_FORCE_D_MAX = 20
THM3_D_MAX = 20
CERTIFY_D_MAX = 1000
CURSE_SAFETY_DELTA = 1e-6

# Point sets
GRID_MAX_POINTS = 10_000_000


def configure_logging(verbose=False):
    level = logging.DEBUG if verbose else LOG_LEVEL
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True, show_path=False)],
        force=True,
    )
