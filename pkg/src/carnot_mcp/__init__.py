"""Invariants of Carnot groups and measure contraction checks for corank-1 groups."""
from .corank1 import (
    Corank1Group,
    Covector,
    GroupPoint,
    canonicalize,
    distance,
    exp,
    from_blocks,
    g_contraction_check,
    homothety,
    jacobian,
    log,
)
from .errors import *  # noqa: F401,F403
from .formats import LoadedSpec, RunReport, dump_spec, load_spec, parse_spec, render_report
from .library import engel, heisenberg, kernel_group
from .lie import (
    StratifiedLieAlgebra,
    abnormal_line_direction,
    geodesic_dimension,
    growth_vector,
    has_abnormal_line,
    hausdorff_dimension,
    is_fat,
    is_ideal,
    line_geodesic_growth,
    max_geodesic_growth,
    rifford_bound,
    validate_algebra,
)
from .mcp import (
    McpReport,
    OmegaSpec,
    contraction_fit,
    dilation_consistency_check,
    estimate_curvature_exponent,
    find_violation,
    mcp_check,
    pointwise_contraction_check,
    s_K,
)

__version__ = "0.1.0"
