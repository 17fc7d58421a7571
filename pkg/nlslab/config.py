"""
Configuration module for the NLS soliton laboratory.

This module contains the experiment defaults, numerical tolerances, fit policies
and output settings used across the solver, the spectral transforms and the
asymptotics harness.
"""

import os
from enum import Enum, IntEnum
from typing import Dict, Tuple

from dotenv import load_dotenv

load_dotenv()  # Load NLSLAB_* overrides from .env file


class PerturbationKind(Enum):
    """Shape of the radiation added to the initial soliton."""
    GAUSSIAN = "gaussian"
    NONE = "none"


class Command(Enum):
    """Commands exposed by the command line surface."""
    SIMULATE = "simulate"
    FIT_MODULATION = "fit-modulation"
    VERIFY_IDENTITIES = "verify-identities"
    VERIFY_DFT = "verify-dft"
    DECAY_REPORT = "decay-report"


class ExitCode(IntEnum):
    """Process exit codes of nls_lab.py."""
    PASS = 0
    CHECK_FAILURE = 1
    CONFIG_ERROR = 2
    NUMERICAL_FAILURE = 3


# Experiment defaults (mirrored by configs/reference.cfg)
DEFAULT_EXPERIMENT: Dict[str, Dict[str, object]] = {
    "grid": {
        "n": 8192,
        "L": 200.0,
    },
    "time": {
        "dt": 1e-3,
        "T": 80.0,
        "store_every": 100,  # solver steps between stored frames
    },
    "soliton": {
        "omega0": 1.0,
        "gamma0": 0.0,
        "p0": 0.0,
        "sigma0": 0.0,
    },
    "perturbation": {
        "kind": "gaussian",
        "amplitude": 0.05,
        "width": 4.0,  # radiation stays off the boundary strip through T=80 at L=200
        "center": 0.0,
        "phase": 0.0,
    },
    "frozen": {
        "xi_max": 12.0,
        "n_xi": 2049,
        "spectrum_stride": 10,  # stored frames between distorted-FT analyses
    },
    "tolerances": {
        "newton": 1e-10,
        "boundary_monitor": 1e-6,  # relative to M(0)
    },
    "analysis": {
        "t_min": 10.0,
        "t_fit_max": None,  # None means time.T
    },
    "seed": 0,
}


# Key path -> expected type for the strict config parser
CONFIG_SCHEMA: Dict[str, type] = {
    "grid.n": int,
    "grid.L": float,
    "time.dt": float,
    "time.T": float,
    "time.store_every": int,
    "soliton.omega0": float,
    "soliton.gamma0": float,
    "soliton.p0": float,
    "soliton.sigma0": float,
    "perturbation.kind": str,
    "perturbation.amplitude": float,
    "perturbation.width": float,
    "perturbation.center": float,
    "perturbation.phase": float,
    "frozen.xi_max": float,
    "frozen.n_xi": int,
    "frozen.spectrum_stride": int,
    "tolerances.newton": float,
    "tolerances.boundary_monitor": float,
    "analysis.t_min": float,
    "analysis.t_fit_max": float,
    "seed": int,
}


# Numerical acceptance thresholds
TOLERANCES = {
    # Solver
    "mass_drift": 1e-12,
    "energy_drift": 1e-6,
    "boundary_fraction": 0.9,  # boundary mass integrates |x| > 0.9 L

    # Spectral structure
    "eigen_relation": 1e-7,
    "resonance_window": 0.8,  # Phi eigen-relations checked on |x| < 0.8 L
    "pairing_floor": 1e-12,  # smallest admissible |<Y_i, sigma_2 Y_j>| denominator

    # Distorted Fourier transform
    "boundary_decay": 1e-8,
    "spectrum_edge_decay": 1e-6,
    "dft_annihilation": 1e-6,
    "scattering_relation": 1e-8,
    "dft_roundtrip": 1e-4,
    "dft_identity": 1e-7,

    # Identity suite
    "identity_rel": 1e-6,
    "identity_abs": 1e-8,
    "kappa_rel": 1e-8,
    "symbol": 1e-12,
    "resonance_band": 1e-3,  # |xi -+ sqrt(omega)| excluded from relative errors
    "tanh_transform": 1e-3,

    # Modulation
    "orthogonality": 1e-10,

    # Asymptotics
    "w_stability": 1.0,  # multiple of eps^2 t_a^{-0.05} between extraction times
    "w_stability_floor": 1e-8,
    "drift_floor": 1e-9,  # parameter drifts below this are roundoff, not decay
    "spectrum_growth": 3.0,
}


# Newton and decay-fit policy
FIT_CONFIG = {
    "newton_max_iter": 50,
    "newton_max_halvings": 8,
    "jacobian": "analytic",  # or "finite-difference"
    "fd_step": 1e-6,
    "drift_window_fraction": 0.5,  # omega/p drift fits stop at this fraction of the fit end
    "asymptotic_t_min": 20.0,
    "w_extraction_count": 3,
    "w_extraction_span": 0.5,  # extraction times spread over [span * t_max, t_max]
}


# Predicted exponents and pass bands of every decay quantity (delta taken as <= 0.1)
DECAY_CHECKS: Dict[str, Dict[str, object]] = {
    "u_linf": {"predicted": -0.5, "band": (-0.65, -0.35)},
    "omega_drift": {"predicted": -1.0, "band": (float("-inf"), -0.6)},
    "p_drift": {"predicted": -1.0, "band": (float("-inf"), -0.6)},
    "h1": {"predicted": -0.5, "band": (-0.65, -0.35)},
    "h2": {"predicted": -0.5, "band": (-0.65, -0.35)},
    "h1_filtered_dt": {"predicted": -1.0, "band": (float("-inf"), -0.8)},
    "h2_filtered_dt": {"predicted": -1.0, "band": (float("-inf"), -0.8)},
    "remainder_local": {"predicted": -1.0, "band": (float("-inf"), -0.8)},
    "discrete_coefficients": {"predicted": -1.5, "band": (float("-inf"), -1.1)},
    "normal_form_B": {"predicted": -1.0, "band": (float("-inf"), -0.8)},
    "asymptotic_error": {"predicted": -0.6, "band": (float("-inf"), -0.55)},
}


# Resolution used by the closed-form vs quadrature identity suite
IDENTITY_GRID = {
    "n_points": 8192,
    "half_width": 40.0,
    "omega": 1.0,
    "xi_range": (-5.0, 5.0),
    "xi_count": 101,
    "pair_range": (-3.0, 3.0),
    "pair_count": 9,
    "kappa_zetas": (0.3, 1.0, 2.7),
}


# Output layout
FILE_CONFIG = {
    "output_dir": os.getenv("NLSLAB_OUTPUT_DIR", "output"),
    "series_dir": "series",
    "reports_dir": "reports",
    "float_precision": 16,  # scientific notation, 17 significant digits
    "float_scientific": True,
    "reference_config": "configs/reference.cfg",
}


# Logging Configuration
LOG_CONFIG = {
    "log_format": "%(asctime)s [%(levelname)8s] %(name)s:%(lineno)s %(message)s",
    "date_format": "%Y-%m-%d %H:%M:%S",
    "default_level": os.getenv("NLSLAB_LOG_LEVEL", "INFO"),
    "logfile": os.getenv("NLSLAB_LOG_FILE"),
}


# Runtime knobs set by the command line
RUNTIME_CONFIG = {
    "threads": int(os.getenv("NLSLAB_THREADS", "1")),
    "xi_chunk": 256,
}


def is_power_of_two(n: int) -> bool:
    """
    Check whether an integer is a positive power of two.

    Args:
        n: Candidate grid size

    Returns:
        True if n is 1, 2, 4, 8, ...
    """
    return n > 0 and (n & (n - 1)) == 0


def decay_band(quantity: str) -> Tuple[float, float]:
    """
    Get the admissible slope interval of a decay quantity.

    Args:
        quantity: Key of DECAY_CHECKS

    Returns:
        (lower, upper) slope bounds
    """
    return DECAY_CHECKS[quantity]["band"]


def set_threads(threads: int) -> None:
    """Set the worker count used by FFTs and xi-chunk pools."""
    RUNTIME_CONFIG["threads"] = max(1, int(threads))
