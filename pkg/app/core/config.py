import os
from dotenv import load_dotenv

# Load .env file and override existing environment variables
load_dotenv(override=True)


def _positive_int(name: str, default: str) -> int:
    value = int(os.getenv(name, default))
    if value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return value


def _positive_float(name: str, default: str) -> float:
    value = float(os.getenv(name, default))
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


class Config:
    # Register settings
    # 2^20 complex amplitudes is about 16 MB
    MAX_SPINS = _positive_int("ZIPPER_MAX_SPINS", "20")
    DENSE_MAX_SPINS = _positive_int("ZIPPER_DENSE_MAX_SPINS", "12")
    if DENSE_MAX_SPINS > MAX_SPINS:
        raise ValueError("ZIPPER_DENSE_MAX_SPINS cannot exceed ZIPPER_MAX_SPINS")

    # Chiral coupling used by the CLI when --kappa is not given (hbar = 1)
    KAPPA = _positive_float("ZIPPER_KAPPA", "1.0")

    # Floquet settings
    PHOTON_CUTOFF = _positive_int("FLOQUET_PHOTON_CUTOFF", "4")
    if PHOTON_CUTOFF < 2:
        raise ValueError("FLOQUET_PHOTON_CUTOFF must be at least 2")
    STEPS_PER_PERIOD = _positive_int("FLOQUET_STEPS_PER_PERIOD", "800")
    N_MAX = _positive_int("FLOQUET_N_MAX", "25")
    SATURATION_LIMIT = _positive_float("FLOQUET_SATURATION_LIMIT", "1e-6")

    # Logging
    LOG_LEVEL = os.getenv("ZIPPER_LOG_LEVEL", "WARNING").upper()

config = Config()
