"""Numerical laboratory for critical circle map renormalization.

Double-precision bindings over the C++ core.  The extended-precision
backend is reachable through the ``renormlab`` command-line tool
(``--precision ext``).
"""

from renormlab._renormlab import (  # noqa: F401
    BoundsStats,
    CircleMap,
    ContinuedFraction,
    DeepPointProfile,
    DeltaEstimate,
    DynamicalPartition,
    MapFamily,
    PartitionAtom,
    Raster,
    RenormConvergence,
    RotationNumber,
    ScalingRatios,
    arnold_cubic,
    bounds_stats,
    cf_value,
    convergent,
    critical_cycle_parameter,
    deep_point_profile,
    delta_estimate,
    gauss_expand,
    julia_raster,
    partition,
    renorm_convergence,
    rotation_number,
    scaling_ratios,
    tune_to_rotation,
    two_harmonic,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
