"""Random walks on randomly oriented 2d lattices generated by dynamical systems."""

from .dynsys import (
    OrientationField,
    ShiftPoint,
    SystemSpec,
    admissibility,
    char_modulus_squared,
    correlation_estimate,
    covariance_identity_check,
    iterate,
    make_system,
    sample_point,
)
from .embedding import embed, local_times, reconstruct_full_walk, vertical_walk
from .lattice import Vertex, WalkPath, neighbors, run_walk, step
from .scenery import FLT_CONSTANT, scenery_walk, simulate_delta
from .stats import exponent_fit, ks_two_sample, speed_check

__version__ = "0.1.0"
