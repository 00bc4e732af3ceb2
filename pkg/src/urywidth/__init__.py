"""urywidth: estimation and certification of 1-Uryson width.

The package computes sweep quotients, tree maps, and diameter-bounded
separators on piecewise-Euclidean complexes; builds truncated covering
patches; and certifies the width transfer bounds between a space and its
covers, including the iterated strip-insertion pipeline for surfaces.
"""

from .complexes import (
    Component,
    DistanceField,
    MetricComplex,
    PointOnComplex,
    build_complex,
    complex_diameter,
    components,
    distance_field,
    point_distance,
    shortest_path,
    steiner_refine,
    subset_diameter,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Component",
    "DistanceField",
    "MetricComplex",
    "PointOnComplex",
    "build_complex",
    "complex_diameter",
    "components",
    "distance_field",
    "point_distance",
    "shortest_path",
    "steiner_refine",
    "subset_diameter",
    "errors",
]
