"""Hilbert, Morton and Zigzag flattening of 2-D grids and locality metrics."""

from .curves import (
    CurveKind,
    CurveMap,
    GrayImage,
    GridPoint,
    build_map,
    flatten,
    fold,
    generalized_hilbert,
    hilbert_d2xy,
    hilbert_xy2d,
    morton_d2xy,
    morton_xy2d,
    patch_order,
    square_map,
    zigzag_d2xy,
    zigzag_xy2d,
)
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    SFCError,
)
from .metrics import (
    DeGridField,
    DilationReport,
    ScaleTrace,
    degrid,
    dilation,
    hierarchy_check,
    pair_family_trace,
    preservation_sweep,
    scale_trace,
)
from .toyset import DtwResult, ShapeSpec, dtw, dtw_table, generate_shape

__version__ = "0.1.0"
