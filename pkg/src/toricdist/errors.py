"""Exception hierarchy shared by all toricdist modules."""


class ToricDistError(Exception):
    """Base class for all package-specific errors."""


class PolytopeDataError(ToricDistError):
    """Polytope input is inconsistent (facets vs vertices, non-integer data, empty interior)."""


class NotDelzant(ToricDistError):
    """A vertex fails the smoothness test (edge count != dim or edge basis not unimodular)."""

    def __init__(self, vertex, det, message=None):
        self.vertex = tuple(int(v) for v in vertex)
        self.det = det
        super().__init__(
            message
            or f"vertex {self.vertex} is not Delzant (edge-basis determinant {det})"
        )


class PointOutsidePolytope(ToricDistError):
    """A queried point violates some facet inequality."""


class VertexNotOnFace(ToricDistError):
    """Chart construction asked for a vertex not on the closure of the target face."""


class NotAVertex(ToricDistError):
    """Vertex-specific operation called on a non-vertex lattice point."""


class PointNotInterior(ToricDistError):
    """Moment-map inversion requires a point strictly inside the polytope."""


class EmptyFaceLattice(ToricDistError):
    """A face carries too few weighted lattice points for its character to be non-degenerate."""


class NoConvergence(ToricDistError):
    """An iterative procedure exhausted its budget before reaching tolerance."""

    def __init__(self, what, iterations, residual):
        self.what = what
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"{what}: no convergence after {iterations} iterations/levels "
            f"(last residual {residual:.3e})"
        )


class MarginTooSmall(ToricDistError):
    """Tail-bound margin is non-positive: the point set is too close to the boundary."""


class RegionTouchesBoundary(ToricDistError):
    """An indicator region reaches the integration box; the box must be enlarged."""
