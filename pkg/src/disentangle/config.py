import os
from dotenv import load_dotenv

# Load environment overrides
for dotenv_file in (".env.local", ".env"):
    load_dotenv(dotenv_path=dotenv_file, override=False)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return default


# Dimension caps
MAX_STATE_DIMENSION = _env_int("DISENTANGLE_MAX_STATE_DIMENSION", 2**15)
MAX_DENSITY_DIMENSION = _env_int("DISENTANGLE_MAX_DENSITY_DIMENSION", 2**11)

# Numerical tolerances
NORM_TOL = 1e-12
TRACE_TOL = 1e-12
HERMITIAN_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
UNITARY_TOL = 1e-10
FACTORIZATION_TOL = 1e-10
FIDELITY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-12
PROBABILITY_CLAMP = 1e-14
DISTRIBUTION_SUM_TOL = 1e-10
PATH_AGREEMENT_TOL = 1e-10
SINGULAR_SIN_THRESHOLD = 1e-12

# Experiment defaults
DEFAULT_SEED = _env_int("DISENTANGLE_DEFAULT_SEED", 1)
DEFAULT_SAMPLES = 32
DEFAULT_TRIALS = 100
DEFAULT_ENV_DIM = 4
SPOT_CHECK_POINTS = 8

# Logging
LOG_LEVEL = os.getenv("DISENTANGLE_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("DISENTANGLE_LOG_FILE") or None

# Optional run ledger
SQLITE_DB_PATH = os.getenv("DISENTANGLE_DB_PATH") or None
