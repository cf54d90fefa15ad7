from __future__ import annotations
import os

# ------------- Config -------------

THREADS     = int(os.environ.get("KSAT_LAB_THREADS", "1"))
ENUM_CAP    = int(os.environ.get("KSAT_LAB_ENUM_CAP", "16"))
BRUTE_CAP   = int(os.environ.get("KSAT_LAB_BRUTE_CAP", "25"))

TOL      = float(os.environ.get("KSAT_LAB_TOL", "1e-12"))
MAX_ITER = int(os.environ.get("KSAT_LAB_MAX_ITER", "10000"))
DAMPING  = float(os.environ.get("KSAT_LAB_DAMPING", "0.5"))

# eps_k = EPS_C * 2^(-k/3)
EPS_C = float(os.environ.get("KSAT_LAB_EPS_C", "1.0"))

ENSEMBLE_SAMPLES = int(os.environ.get("KSAT_LAB_ENSEMBLE_SAMPLES", "20000"))
ENSEMBLE_SIGMAS  = float(os.environ.get("KSAT_LAB_ENSEMBLE_SIGMAS", "6"))

DPLL_TIMEOUT = float(os.environ.get("KSAT_LAB_DPLL_TIMEOUT", "0"))

LOG_LEVEL = os.environ.get("KSAT_LAB_LOG_LEVEL", "INFO").upper()

SCHEMA = "ksat-lab/1"

if THREADS <= 0:
    THREADS = 1
if ENUM_CAP <= 0:
    ENUM_CAP = 16
if not (0.0 < DAMPING <= 1.0):
    DAMPING = 0.5


def eps_k(k: int) -> float:
    return EPS_C * 2.0 ** (-k / 3.0)
