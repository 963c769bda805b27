"""
Settings for the CircLang project.

Numerical defaults, tolerances and file locations shared by the langevin app,
the services layer and the command line.
"""
import os
from pathlib import Path
from typing import Optional

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

secrets_file_path = os.path.join(BASE_DIR, 'secrets.json')

VERSION = "1.0.0"

# Monte-Carlo defaults.
DEFAULT_N_STEPS = 1024
DEFAULT_N_PATHS = 200_000
DEFAULT_WORKERS = 1

# Paths per RNG substream. Changing it changes every Monte-Carlo result.
PATH_BLOCK_SIZE = 4096

# Quadrature and series.
DEFAULT_TOL = 1e-9
SERIES_CUTOFF = 1e-2
MALLIAVIN_SERIES_CUTOFF = 2.0
RICCATI_NODES = 4096
LIFT_QUAD_TOL = 1e-10
WSTAR_SWITCH = 0.8
WSTAR_TAIL_TOL = 1e-15
CANCELLATION_LIMIT = 1e8
POLE_TOL = 1e-10

# Export grids: ε for the kernel sweep (geometric), x for the Φ table (linear).
EXPORT_EPS_RANGE = (1e-3, 0.5)
EXPORT_X_RANGE = (0.05, 40.0)
EXPORT_POINTS = 64

# Output formatting.
DEFAULT_OUTPUT_DIR = "circlang_runs"
JSON_SIGNIFICANT_DIGITS = 17
TABLE_SIGNIFICANT_DIGITS = 9

# Seeds.
DEFAULT_SEED = 0
SEED_ENV_VAR = "CIRCLANG_SEED"


def resolve_seed(flag_value: Optional[int] = None) -> int:
    """
    Resolve the seed used by a run.

    The command-line flag wins over the CIRCLANG_SEED environment variable,
    which wins over DEFAULT_SEED.

    Args:
        flag_value (Optional[int]): The value given with --seed, if any.

    Returns:
        int: A seed in the unsigned 64-bit range.

    Raises:
        ValueError: If the environment variable is not an integer.
    """
    if flag_value is not None:
        seed = int(flag_value)
    else:
        env_value = os.environ.get(SEED_ENV_VAR)
        if env_value is not None and env_value.strip() != "":
            try:
                seed = int(env_value)
            except ValueError as e:
                raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {env_value!r}") from e
        else:
            seed = DEFAULT_SEED

    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"Seed {seed} is outside the unsigned 64-bit range.")
    return seed
