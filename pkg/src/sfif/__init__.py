"""Super fractal interpolation functions: construction, evaluation, analysis and calculus."""

from .analysis import (
    DimensionReport,
    SmoothnessClass,
    SmoothnessReport,
    avg_fractal_distance,
    box_dimension,
    modulus_of_continuity,
    moran_dimension,
    moran_dimension_periodic,
    smoothness_classify,
)
from .attractor import (
    SampledGraph,
    address_value,
    convergence_profile,
    evaluate,
    forward_attractor,
    sample_uniform,
)
from .calculus import (
    DerivativeSifs,
    IntegralSifs,
    check_derivative_condition,
    check_integral_condition,
    differentiate_sifs,
    integrate_sifs,
)
from .core import (
    CodeString,
    HorizontalMap,
    InterpolationData,
    Sifs,
    VerticalMap,
    code_metric,
    load_sifs,
    solve_maps,
    validate_sifs,
)
from .errors import ComputationError, SfifError, ValidationError

__version__ = "0.1.0"
