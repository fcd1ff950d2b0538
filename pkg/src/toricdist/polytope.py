"""Delzant polytopes: facet data, lattice points, faces, and vertex charts.

A polytope is stored by its facet inequalities ``<u_i, x> >= lambda_i``
together with its vertex list; both are integer data and are cross-validated
instead of running a convex-hull computation (desk scale is dim <= 3).
Lattice points are enumerated over the integer bounding box of the vertices
and kept in lexicographic order, which every other module relies on.

Vertex charts implement the unimodular change of coordinates that
straightens the facets through a chosen vertex: the edge basis at the vertex
is inverted over the integers, the lattice is mapped into the nonnegative
orthant, and the facets cutting out a chosen face come first so that the
face becomes ``{first r coordinates = 0}``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    NotDelzant,
    PointOutsidePolytope,
    PolytopeDataError,
    VertexNotOnFace,
)

__all__ = [
    "Polytope",
    "Face",
    "VertexChart",
    "DelzantReport",
    "parse_polytope",
    "enumerate_lattice_points",
    "validate_delzant",
    "face_of",
    "codim_and_d",
    "build_vertex_chart",
    "dilate",
    "standard_simplex",
    "unit_box",
]


# ---------------------------------------------------------------------------
# exact integer linear algebra (matrices are small: dim <= 4)
# ---------------------------------------------------------------------------

def _int_det(mat):
    """Determinant of a small integer matrix via cofactor expansion."""
    n = len(mat)
    if n == 0:
        return 1
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        sign = -1 if j % 2 else 1
        total += sign * mat[0][j] * _int_det(minor)
    return total


def _int_adjugate(mat):
    """Adjugate (transposed cofactor matrix) of a small integer matrix."""
    n = len(mat)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1 :] for k, row in enumerate(mat) if k != j]
            sign = -1 if (i + j) % 2 else 1
            adj[i][j] = sign * _int_det(minor)
    return adj


def _int_inverse_unimodular(mat):
    """Inverse of an integer matrix with determinant +-1."""
    det = _int_det(mat)
    if det not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det {det})")
    adj = _int_adjugate(mat)
    return [[det * adj[i][j] for j in range(len(mat))] for i in range(len(mat))]


def _null_direction(rows, m):
    """Primitive integer generator of the null space of (m-1) x m integer rows.

    Uses the generalized cross product: component k is (-1)**k times the
    minor obtained by deleting column k.  Requires the rows to have rank m-1.
    """
    if m == 1:
        return [1]
    comps = []
    for k in range(m):
        minor = [[row[c] for c in range(m) if c != k] for row in rows]
        sign = -1 if k % 2 else 1
        comps.append(int(sign * _int_det(minor)))
    g = 0
    for c in comps:
        g = math.gcd(g, abs(c))
    if g == 0:
        raise ValueError("facet normals are degenerate at a vertex")
    return [c // g for c in comps]


def _as_int_array(data, name):
    arr = np.asarray(data)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise PolytopeDataError(f"{name} must have integer entries")
        arr = rounded
    return arr.astype(np.int64)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Face:
    """An open face, identified by the facets active on it (codim = #active)."""

    active_facets: tuple[int, ...]
    codim: int
    dim_face: int
    is_interior: bool


@dataclass(frozen=True)
class Polytope:
    """Facet inequalities {<u_i, x> >= lambda_i}, vertices, lattice points."""

    dim: int
    normals: np.ndarray        # (n_facets, dim) int64
    offsets: np.ndarray        # (n_facets,) int64
    vertices: np.ndarray       # (n_vertices, dim) int64
    lattice_points: np.ndarray # (n_points, dim) int64, lexicographic

    def __post_init__(self):
        for arr in (self.normals, self.offsets, self.vertices, self.lattice_points):
            arr.setflags(write=False)

    @property
    def n_facets(self) -> int:
        return len(self.normals)

    def slacks(self, x) -> np.ndarray:
        """<u_i, x> - lambda_i for each facet; >= 0 on the polytope."""
        x = np.asarray(x, dtype=np.float64)
        return self.normals @ x - self.offsets

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.slacks(x) >= -tol))

    def active_facets_at(self, x, *, denom: int = 1) -> tuple[int, ...]:
        """Facets with <u_i, x> = lambda_i for rational x given as x = point/denom."""
        point = _as_int_array(x, "point")
        lhs = self.normals @ point
        return tuple(int(i) for i in np.nonzero(lhs == denom * self.offsets)[0])

    def volume(self) -> float:
        """Euclidean volume, exact over the rationals.

        Recursive divergence-theorem decomposition: vol = (1/m) sum over
        facets of dist(centroid, facet) * vol_{m-1}(facet).
        """
        return _euclidean_volume(self)

    def __repr__(self):
        return (
            f"Polytope(dim={self.dim}, facets={self.n_facets}, "
            f"vertices={len(self.vertices)}, lattice_points={len(self.lattice_points)})"
        )


@dataclass(frozen=True)
class VertexChart:
    """Unimodular coordinates at a vertex, adapted to a face through it.

    ``gamma`` inverts the edge basis (columns are the primitive edge
    directions ordered so the facets cutting out the face come first);
    ``Q_points[i]`` is the image of ``source_points[i]`` under
    u -> gamma @ u - gamma @ v0, so weights transport by index.
    """

    v0: np.ndarray             # (m,) int64
    edge_basis: np.ndarray     # (m, m) int64, column j = primitive direction
    gamma: np.ndarray          # (m, m) int64, gamma @ edge_basis = I
    Q_points: np.ndarray       # (n_points, m) int64, in the nonnegative orthant
    split_r: int
    source_points: np.ndarray  # (n_points, m) int64, parallel to Q_points
    facet_order: tuple[int, ...]

    def __post_init__(self):
        for arr in (self.v0, self.edge_basis, self.gamma, self.Q_points,
                    self.source_points):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.v0)

    def transform(self, u) -> np.ndarray:
        """Apply the affine lattice map u -> gamma @ u - gamma @ v0."""
        u = np.asarray(u)
        return u @ self.gamma.T - self.gamma @ self.v0


@dataclass(frozen=True)
class DelzantReport:
    """Per-vertex edge bases and determinants from the smoothness check."""

    entries: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return all(e["ok"] for e in self.entries)


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def enumerate_lattice_points(normals, offsets, vertices) -> np.ndarray:
    """All integer points of the polytope, lexicographically sorted.

    Scans the integer bounding box of the vertices and keeps points passing
    every facet inequality.
    """
    vertices = np.asarray(vertices, dtype=np.int64)
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    ranges = [range(int(a), int(b) + 1) for a, b in zip(lo, hi)]
    pts = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    if pts.size == 0:
        return pts.reshape(0, vertices.shape[1])
    keep = np.all(pts @ np.asarray(normals, dtype=np.int64).T
                  >= np.asarray(offsets, dtype=np.int64), axis=1)
    return pts[keep]


def _euclidean_volume(P: Polytope) -> float:
    """Volume of P by recursive facet decomposition (exact over rationals)."""

    def vol(normals, offsets, vertices, m):
        if m == 0:
            return Fraction(1)
        if m == 1:
            los = [Fraction(int(o), int(n[0])) for n, o in zip(normals, offsets) if n[0] > 0]
            his = [Fraction(int(o), int(n[0])) for n, o in zip(normals, offsets) if n[0] < 0]
            return max(Fraction(0), min(his) - max(los))
        # divergence theorem relative to the vertex centroid c:
        # vol = (1/m) * sum_i dist(c, facet_i) * vol_{m-1}(facet_i)
        verts = [tuple(Fraction(int(x)) for x in v) for v in vertices]
        c = [sum(v[j] for v in verts) / len(verts) for j in range(m)]
        total = Fraction(0)
        for i, (n, o) in enumerate(zip(normals, offsets)):
            onfac = [v for v in vertices
                     if sum(int(n[j]) * int(v[j]) for j in range(m)) == int(o)]
            if len(onfac) < m:
                continue
            # project the facet onto the coordinate hyperplane dropping the
            # axis where the normal is largest; correct by |n| / |n_axis|
            ax = int(np.argmax(np.abs(n)))
            nn2 = sum(int(x) * int(x) for x in n)
            sub_vertices = np.array([[v[j] for j in range(m) if j != ax] for v in onfac],
                                    dtype=np.int64)
            sub_norm, sub_off = _project_facet(normals, offsets, n, o, ax, m)
            fvol = vol(sub_norm, sub_off, sub_vertices, m - 1)
            # dist(c, facet) = (<n, c> - o) / |n|; area scales by |n|/|n_ax|
            dist_num = sum(Fraction(int(n[j])) * c[j] for j in range(m)) - int(o)
            total += dist_num * fvol / Fraction(abs(int(n[ax])))
            _ = nn2
        return total / m

    def _project_facet(normals, offsets, n, o, ax, m):
        # substitute x_ax from <n, x> = o into every other inequality and
        # clear denominators to stay in integers
        n = [int(v) for v in n]
        o = int(o)
        sub_norm, sub_off = [], []
        for nn, oo in zip(normals, offsets):
            nn = [int(v) for v in nn]
            oo = int(oo)
            if nn == n and oo == o:
                continue
            coef = [n[ax] * nn[j] - nn[ax] * n[j] for j in range(m) if j != ax]
            rhs = n[ax] * oo - nn[ax] * o
            if n[ax] < 0:
                coef = [-c for c in coef]
                rhs = -rhs
            if any(coef):
                sub_norm.append(coef)
                sub_off.append(rhs)
        return np.array(sub_norm, dtype=np.int64), np.array(sub_off, dtype=np.int64)

    return float(vol(P.normals, P.offsets, P.vertices, P.dim))


def parse_polytope(spec) -> Polytope:
    """Build a validated Polytope from a JSON document, path, or dict.

    Schema: {"dim": m, "facets": [{"normal": [ints], "offset": int}],
    "vertices": [[ints]]}.
    """
    if isinstance(spec, (str, bytes)):
        text = spec
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            with open(spec) as fh:
                data = json.load(fh)
    else:
        data = spec
    try:
        dim = int(data["dim"])
        normals = _as_int_array([f["normal"] for f in data["facets"]], "facet normals")
        offsets = _as_int_array([f["offset"] for f in data["facets"]], "facet offsets")
        vertices = _as_int_array(data["vertices"], "vertices")
    except (KeyError, TypeError) as exc:
        raise PolytopeDataError(f"malformed polytope document: {exc}") from exc
    return make_polytope(dim, normals, offsets, vertices)


def make_polytope(dim, normals, offsets, vertices) -> Polytope:
    """Validate facet/vertex consistency and enumerate lattice points."""
    normals = _as_int_array(normals, "normals")
    offsets = _as_int_array(offsets, "offsets")
    vertices = _as_int_array(vertices, "vertices")
    if normals.ndim != 2 or normals.shape[1] != dim:
        raise PolytopeDataError("facet normals must be vectors of length dim")
    if vertices.ndim != 2 or vertices.shape[1] != dim:
        raise PolytopeDataError("vertices must be vectors of length dim")
    if len(offsets) != len(normals):
        raise PolytopeDataError("one offset per facet normal required")

    slx = vertices @ normals.T - offsets  # (n_vertices, n_facets)
    if (slx < 0).any():
        bad = np.argwhere(slx < 0)[0]
        raise PolytopeDataError(
            f"vertex {tuple(vertices[bad[0]])} violates facet {bad[1]}"
        )
    active_counts = (slx == 0).sum(axis=1)
    if (active_counts != dim).any():
        i = int(np.argmax(active_counts != dim))
        raise PolytopeDataError(
            f"vertex {tuple(vertices[i])} lies on {int(active_counts[i])} facets, "
            f"expected exactly {dim} (simple polytope)"
        )
    # every facet must support a (dim-1)-face: at least dim incident vertices
    per_facet = (slx == 0).sum(axis=0)
    if (per_facet < dim).any():
        i = int(np.argmax(per_facet < dim))
        raise PolytopeDataError(f"facet {i} touches fewer than {dim} vertices")
    # nonempty interior: some vertex strictly off each facet
    if (per_facet == len(vertices)).any():
        raise PolytopeDataError("empty interior: a facet contains every vertex")
    # vertex set must be exactly the feasible intersections of dim facets
    expected = _vertices_from_facets(dim, normals, offsets)
    got = {tuple(v) for v in vertices}
    if expected != got:
        raise PolytopeDataError(
            f"vertex list inconsistent with facets: facets determine {sorted(expected)}"
        )

    lattice = enumerate_lattice_points(normals, offsets, vertices)
    if len(lattice) < dim + 1:
        raise PolytopeDataError("polytope has fewer than dim+1 lattice points")
    span = lattice[1:] - lattice[0]
    if np.linalg.matrix_rank(span) < dim:
        raise PolytopeDataError("lattice points do not affinely span")
    return Polytope(dim, normals, offsets, vertices, lattice)


def _vertices_from_facets(dim, normals, offsets) -> set[tuple[int, ...]]:
    """Feasible integer intersection points of dim-subsets of facets."""
    found = set()
    for idx in itertools.combinations(range(len(normals)), dim):
        mat = [[int(normals[i][j]) for j in range(dim)] for i in idx]
        det = _int_det(mat)
        if det == 0:
            continue
        adj = _int_adjugate(mat)
        rhs = [int(offsets[i]) for i in idx]
        num = [sum(adj[i][j] * rhs[j] for j in range(dim)) for i in range(dim)]
        if any(n % det for n in num):
            continue  # non-integer intersection cannot be a lattice vertex
        pt = tuple(n // det for n in num)
        if all(
            sum(int(normals[i][j]) * pt[j] for j in range(dim)) >= int(offsets[i])
            for i in range(len(normals))
        ):
            found.add(pt)
    return found


# ---------------------------------------------------------------------------
# faces
# ---------------------------------------------------------------------------

def face_of(P: Polytope, alpha) -> Face:
    """The unique open face containing a lattice point of P."""
    alpha = _as_int_array(alpha, "lattice point")
    return face_of_rational(P, alpha, 1)


def face_of_rational(P: Polytope, numerator, denom: int) -> Face:
    """Open face containing the rational point numerator/denom (exact test)."""
    numerator = _as_int_array(numerator, "point")
    lhs = P.normals @ numerator
    rhs = denom * P.offsets
    if (lhs < rhs).any():
        raise PointOutsidePolytope(
            f"point {tuple(numerator)}/{denom} violates facet "
            f"{int(np.argmax(lhs < rhs))}"
        )
    active = tuple(int(i) for i in np.nonzero(lhs == rhs)[0])
    r = len(active)
    return Face(active, r, P.dim - r, r == 0)


def codim_and_d(P: Polytope, alpha) -> tuple[int, int]:
    """(codim r of the face through alpha, d = m + r)."""
    face = face_of(P, alpha)
    return face.codim, P.dim + face.codim


# ---------------------------------------------------------------------------
# Delzant validation and charts
# ---------------------------------------------------------------------------

def _edge_directions(P: Polytope, v0) -> tuple[list[list[int]], list[int]]:
    """Primitive edge directions at a vertex, one per omitted active facet.

    Direction k solves the equalities of all active facets except facet
    ``active[k]`` and points into the polytope (positive slack on the
    omitted facet).  Returns (directions, active_facet_indices).
    """
    v0 = _as_int_array(v0, "vertex")
    active = [i for i in range(P.n_facets)
              if int(P.normals[i] @ v0) == int(P.offsets[i])]
    m = P.dim
    dirs = []
    for i in active:
        rows = [[int(P.normals[j][c]) for c in range(m)] for j in active if j != i]
        d = _null_direction(rows, m)
        s = sum(int(P.normals[i][c]) * d[c] for c in range(m))
        if s == 0:
            raise PolytopeDataError(
                f"degenerate facet normals at vertex {tuple(v0)}"
            )
        if s < 0:
            d = [-c for c in d]
        dirs.append(d)
    return dirs, active


def validate_delzant(P: Polytope, *, strict: bool = True) -> DelzantReport:
    """Check that every vertex has m edges with a unimodular edge basis.

    With ``strict`` a failing vertex raises :class:`NotDelzant`; otherwise
    the report carries per-vertex results.
    """
    entries = []
    for v in P.vertices:
        dirs, active = _edge_directions(P, v)
        det = _int_det([[dirs[j][i] for j in range(P.dim)] for i in range(P.dim)]) \
            if len(dirs) == P.dim else 0
        ok = len(dirs) == P.dim and det in (1, -1)
        entries.append({
            "vertex": tuple(int(x) for x in v),
            "edge_basis": tuple(tuple(d) for d in dirs),
            "active_facets": tuple(active),
            "det": int(det),
            "ok": ok,
        })
        if strict and not ok:
            raise NotDelzant(v, det)
    return DelzantReport(tuple(entries))


def default_vertex_for_face(P: Polytope, face: Face) -> np.ndarray:
    """Lexicographically smallest vertex on the closure of the face."""
    candidates = []
    for v in P.vertices:
        slack = P.normals @ v - P.offsets
        if all(slack[i] == 0 for i in face.active_facets):
            candidates.append(tuple(int(x) for x in v))
    if not candidates:
        raise VertexNotOnFace("no vertex lies on the closure of the face")
    return np.array(min(candidates), dtype=np.int64)


def build_vertex_chart(P: Polytope, face: Face, v0=None) -> VertexChart:
    """Chart at v0 adapted to ``face``: its cutting facets come first.

    The columns of the edge basis are the primitive directions at v0 ordered
    so that coordinates 1..r vanish exactly on the closed face; gamma is the
    integer inverse of that basis.
    """
    if v0 is None:
        v0 = default_vertex_for_face(P, face)
    v0 = _as_int_array(v0, "vertex")
    if not any(np.array_equal(v0, v) for v in P.vertices):
        raise VertexNotOnFace(f"{tuple(v0)} is not a vertex of the polytope")
    slack = P.normals @ v0 - P.offsets
    if any(slack[i] != 0 for i in face.active_facets):
        raise VertexNotOnFace(
            f"vertex {tuple(v0)} is not on the closure of the face"
        )

    dirs, active = _edge_directions(P, v0)
    if len(dirs) != P.dim:
        raise NotDelzant(v0, 0, "vertex is not simple")
    by_facet = dict(zip(active, dirs))
    order = list(face.active_facets) + [i for i in active
                                        if i not in face.active_facets]
    basis_cols = [by_facet[i] for i in order]
    basis = [[basis_cols[j][i] for j in range(P.dim)] for i in range(P.dim)]
    det = _int_det(basis)
    if det not in (1, -1):
        raise NotDelzant(v0, det)
    gamma = np.array(_int_inverse_unimodular(basis), dtype=np.int64)
    edge_basis = np.array(basis, dtype=np.int64)

    shift = gamma @ v0
    Q = P.lattice_points @ gamma.T - shift
    if (Q < 0).any():
        raise NotDelzant(v0, det, "chart image leaves the nonnegative orthant")
    return VertexChart(
        v0=v0,
        edge_basis=edge_basis,
        gamma=gamma,
        Q_points=Q,
        split_r=face.codim,
        source_points=P.lattice_points,
        facet_order=tuple(order),
    )


# ---------------------------------------------------------------------------
# dilation and stock polytopes
# ---------------------------------------------------------------------------

def dilate(P: Polytope, N: int) -> Polytope:
    """The polytope N*P (offsets and vertices scaled, lattice re-enumerated)."""
    if N < 1 or int(N) != N:
        raise ValueError("dilation factor must be a positive integer")
    N = int(N)
    if N == 1:
        return P
    return make_polytope(P.dim, P.normals, N * P.offsets, N * P.vertices)


def standard_simplex(m: int, scale: int = 1) -> Polytope:
    """p * Sigma = {x >= 0, sum x <= p} in R^m."""
    normals = np.vstack([np.eye(m, dtype=np.int64), -np.ones((1, m), dtype=np.int64)])
    offsets = np.array([0] * m + [-scale], dtype=np.int64)
    vertices = np.vstack([np.zeros((1, m), dtype=np.int64),
                          scale * np.eye(m, dtype=np.int64)])
    return make_polytope(m, normals, offsets, vertices)


def unit_box(m: int, side: int = 1) -> Polytope:
    """[0, side]^m."""
    normals = np.vstack([np.eye(m, dtype=np.int64), -np.eye(m, dtype=np.int64)])
    offsets = np.array([0] * m + [-side] * m, dtype=np.int64)
    vertices = np.array(list(itertools.product([0, side], repeat=m)), dtype=np.int64)
    return make_polytope(m, normals, offsets, vertices)
