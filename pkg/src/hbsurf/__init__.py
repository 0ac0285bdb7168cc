"""Hermite-Birkhoff interpolation of scattered data on parametric surfaces."""

from .basis import BasisConfig, alpha, cardinal_weights, tau
from .geodesics import (
    BvpSettings,
    GeodesicPath,
    analytic_distance,
    euclid_geodesic_convert,
    geodesic_bvp,
    geodesic_ivp,
    sphere_distance,
)
from .geometry import (
    Chart,
    MetricData,
    RevolutionProfile,
    chart_forward,
    chart_hessian,
    chart_jacobian,
    cone,
    curve_length,
    cylinder,
    metric_data,
    pushforward_derivatives,
    revolution,
    sphere_cap,
    sphere_polar,
    torus,
)
from .harness import (
    ErrorReport,
    ExperimentConfig,
    build_samples,
    convergence_slope,
    emit,
    run_experiment,
    test_function,
)
from .interpolant import (
    InterpolantConfig,
    SampleSite,
    derivative_match_check,
    hb_eval,
    hb_eval_basis_form,
    interpolant_config,
    taylor_eval,
)
from .pointsets import (
    CellIndex,
    PointSetStats,
    eval_points,
    fill_distance,
    halton,
    neighbors_within,
    nodes_on_surface,
    point_set_stats,
    separation_distance,
)

__version__ = "0.1.0"
