"""Quantized output feedback with zoom quantizers centered on an observer.

The plant output is encoded in a hypercube around the observer's predicted
output; the hypercube shrinks along a bound schedule that is certified to
decay whenever enough quantization levels are used.
"""

from .design import GainPair, deadbeat_observer_gain, kalman_gain, lqr_gain
from .numerics import induced_max_norm, mat_exp, solve_dare, spectral_radius
from .plant import ContinuousPlant, DiscretePlant, benchmark, discretize
from .quantizer import HypercubeQuantizer
from .schedule import (
    BoundSchedule,
    bound_sequence_deadbeat,
    bound_sequence_full,
    bound_sequence_general,
    decay_certificate,
    min_levels_deadbeat,
    min_levels_full,
    min_levels_general,
)
from .simulator import SimConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "BoundSchedule",
    "ContinuousPlant",
    "DiscretePlant",
    "GainPair",
    "HypercubeQuantizer",
    "SimConfig",
    "benchmark",
    "bound_sequence_deadbeat",
    "bound_sequence_full",
    "bound_sequence_general",
    "deadbeat_observer_gain",
    "decay_certificate",
    "discretize",
    "induced_max_norm",
    "kalman_gain",
    "lqr_gain",
    "mat_exp",
    "min_levels_deadbeat",
    "min_levels_full",
    "min_levels_general",
    "simulate",
    "solve_dare",
    "spectral_radius",
]
