"""Exception types raised by the width machinery.

Every error carries enough payload (offending cell ids, measured values,
required thresholds) that a caller can either fix the input or report a
useful diagnostic without re-running the computation.
"""

from __future__ import annotations


class UryWidthError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------- complexes


class NonPositiveLength(UryWidthError):
    def __init__(self, edge_id: int, length: float):
        self.edge_id = edge_id
        self.length = length
        super().__init__(f"edge {edge_id} has non-positive length {length!r}")


class TriangleInequalityViolated(UryWidthError):
    def __init__(self, triangle_id: int, lengths):
        self.triangle_id = triangle_id
        self.lengths = tuple(lengths)
        super().__init__(
            f"triangle {triangle_id} side lengths {self.lengths} violate the "
            "strict triangle inequality"
        )


class Disconnected1Skeleton(UryWidthError):
    def __init__(self, n_components: int):
        self.n_components = n_components
        super().__init__(f"1-skeleton has {n_components} connected components")


class BadParam(UryWidthError):
    """Malformed generator or operation parameter."""


# ---------------------------------------------------------------- covers


class TruncationTooSmall(UryWidthError):
    def __init__(self, given: float, required: float, why: str = ""):
        self.given = given
        self.required = required
        msg = f"truncation radius {given} too small, need >= {required}"
        if why:
            msg += f" ({why})"
        super().__init__(msg)


class NonNormalSubgroup(UryWidthError):
    """Quotient subgroup is not normal (only regular covers are supported)."""


class LiftLeavesTruncation(UryWidthError):
    def __init__(self, step_index: int):
        self.step_index = step_index
        super().__init__(
            f"path lift leaves the truncated patch at step {step_index}"
        )


class NotGridSurface(UryWidthError):
    """Input complex does not carry grid-surface provenance."""


class NotVirtuallyCyclic(UryWidthError):
    """Deck group spec declares neither a finite nor a virtually cyclic group."""


# ---------------------------------------------------------------- sweep / maps


class InvalidPolygon(UryWidthError):
    """Polygon-to-tree map data is inconsistent (edge count or corner mismatch)."""


class PreconditionUnmet(UryWidthError):
    def __init__(self, check: str, detail: str = ""):
        self.check = check
        msg = f"precondition failed: {check}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SimplexTooLarge(UryWidthError):
    def __init__(self, cell: int, diameter: float, bound: float):
        self.cell = cell
        self.diameter = diameter
        self.bound = bound
        super().__init__(
            f"simplex {cell} has diameter {diameter:.6g} > allowed {bound:.6g}"
        )


# ---------------------------------------------------------------- separators


class FiberBoundViolated(UryWidthError):
    def __init__(self, node, diameter: float, bound: float):
        self.node = node
        self.diameter = diameter
        self.bound = bound
        super().__init__(
            f"fiber over {node} has diameter {diameter:.6g} > bound {bound:.6g}"
        )


# ---------------------------------------------------------------- surgery


class IsDisk(UryWidthError):
    """Surface is simply connected: it has no essential arc."""


class ArcNotSimple(UryWidthError):
    """Cut path revisits a vertex; strips can only be inserted along simple arcs."""


class ArcsIntersect(UryWidthError):
    def __init__(self, detail: str, required_m: float | None = None):
        self.required_m = required_m
        msg = detail
        if required_m is not None:
            msg += f"; re-run with half-width M > {required_m:.6g}"
        super().__init__(msg)


class InfiniteIntersection(UryWidthError):
    """Separator trace along the arc could not be resolved into intervals."""


class CaseDetectionAmbiguous(UryWidthError):
    """Rewiring could not decide between the special and non-special case."""


class UnsupportedTopology(UryWidthError):
    """Closed non-spherical surfaces (and similar) are outside the certified scope."""
