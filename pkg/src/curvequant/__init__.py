"""Optimal quantization of uniform distributions on planar curves."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticSeries,
    Estimate,
    circle_series,
    estimate_coefficient,
    estimate_dimension,
    segment_series,
    triangle_series,
)
from .closedform import (
    ClosedFormResult,
    affine_transform,
    circle_codebook,
    segment_codebook,
    trapezoid_ratio,
    triangle_3k3_codebook,
    triangle_codebook,
    triangle_small_n,
)
from .codebook import Codebook, codebook_from_json, codebook_to_json, load_codebook, save_codebook
from .curve import (
    ArcPiece,
    CurveDistribution,
    DomainError,
    LinePiece,
    ParametricCurve,
    curve_from_json,
    make_segment,
    make_unit_circle,
    make_unit_triangle_boundary,
    mean_and_variance,
    point_at,
    uniform_distribution,
)
from .oracles import oracle_circle_offset, oracle_segment_dp
from .solver import (
    EmptyCellError,
    QuantizationResult,
    SolverConfig,
    canonical_residuals,
    centroids,
    distortion,
    lloyd_solve,
    verify_centroid_condition,
    voronoi_assign,
)

__all__ = [name for name in dir() if not name.startswith("_")]
