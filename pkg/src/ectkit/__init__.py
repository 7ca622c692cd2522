"""Exact and differentiable Euler characteristic transforms of geometric simplicial complexes."""

from .complex import (
    ComplexStats,
    GeometricSimplicialComplex,
    InvalidComplexError,
    Violation,
    euler_characteristic,
    from_point_cloud,
    from_triangle_mesh,
    normalize_to_unit_ball,
    validate,
)
from .ect_diff import GradientBundle, SmoothEctMatrix, sigmoid, soft_ecc, soft_ect, soft_ect_backward
from .ect_exact import EctMatrix, ThresholdGrid, ecc, ect, ect_distance, per_direction_grid
from .filtration import DirectionSet, filtration_values, sorted_dimension_values, sublevel_complex
from .optimize import (
    DivergenceError,
    OptimizeConfig,
    OptimizeTrace,
    learn_coordinates,
    learn_directions,
    mse_loss,
)
from .sampling import (
    generate_double_annulus,
    generate_noisy_circle,
    sample_angles_normal,
    sample_directions_uniform,
)

__version__ = "0.1.0"
