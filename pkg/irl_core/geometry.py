"""
Spherical codes, facet structures and the rotation between the zero-sum
hyperplane H_n and R^{n-1}.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from irl_core import GEOMETRY_TOL
from irl_core.exceptions import DegenerateFacet, UnsupportedCode

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2


@dataclass(frozen=True, eq=False)
class RotationMap:
    """Orthogonal Pi with det +1 sending 1/sqrt(n) to e_n"""
    n: int
    matrix: np.ndarray

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def to_plane(self, x) -> np.ndarray:
        """First n-1 coordinates of Pi x"""
        return self.apply(x)[: self.n - 1]

    def from_plane(self, y) -> np.ndarray:
        """Pi^T [y; 0], a zero-sum vector of R^n"""
        padded = np.append(np.asarray(y, dtype=float), 0.0)
        return self.matrix.T @ padded


@dataclass(frozen=True, eq=False)
class SphericalCode:
    """Unit vectors in R^dim with maximum pairwise inner product cos_theta"""
    dim: int
    points: np.ndarray
    cos_theta: float
    kind: str = "custom"

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        points.setflags(write=False)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(f"Code points must be N x {self.dim}")
        norms = np.linalg.norm(points, axis=1)
        if np.any(np.abs(norms - 1.0) > GEOMETRY_TOL):
            raise ValueError("Code points must have unit norm")
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def gram(self) -> np.ndarray:
        return self.points @ self.points.T


@dataclass(frozen=True, eq=False)
class Facet:
    """(dim-1)-simplex face of a code's polytope"""
    vertex_indices: Tuple[int, ...]
    centroid: np.ndarray
    unit_centroid: np.ndarray
    normals: Optional[np.ndarray] = None
    eps: Optional[float] = None


def rotation_to_hyperplane(n: int) -> RotationMap:
    """
    Householder reflection mapping 1/sqrt(n) to e_n, with the first row
    negated so that det = +1.
    """
    if n < 2:
        raise ValueError("Rotation needs n >= 2")
    u = np.full(n, 1.0 / math.sqrt(n))
    v = u.copy()
    v[-1] -= 1.0
    H = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    # reflection has det -1; flipping coordinate 1 leaves e_n fixed
    H[0, :] *= -1.0
    return RotationMap(n=n, matrix=H)


def simplex_code(d: int) -> SphericalCode:
    """Regular simplex: d+1 unit points in R^d with pairwise dot -1/d"""
    if d < 2:
        raise ValueError("Simplex code needs d >= 2")
    n = d + 1
    rotation = rotation_to_hyperplane(n)
    centered = np.eye(n) - 1.0 / n
    points = np.array([rotation.to_plane(row) for row in centered])
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    return SphericalCode(dim=d, points=points, cos_theta=-1.0 / d, kind="simplex")


def icosahedron_code() -> SphericalCode:
    """12 icosahedron vertices on S^2 from golden-ratio coordinates"""
    phi = GOLDEN_RATIO
    points = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            points.append((0.0, s1, s2 * phi))
            points.append((s1, s2 * phi, 0.0))
            points.append((s2 * phi, 0.0, s1))
    points = np.array(points) / math.sqrt(1.0 + phi ** 2)
    return SphericalCode(dim=3, points=points, cos_theta=1.0 / math.sqrt(5.0), kind="icosahedron")


def facet_centroid(code: SphericalCode, facet) -> np.ndarray:
    """Arithmetic mean of the facet's vertices"""
    indices = facet.vertex_indices if isinstance(facet, Facet) else tuple(facet)
    if len(indices) != code.dim:
        raise ValueError(f"Facet needs {code.dim} vertices, got {len(indices)}")
    return code.points[list(indices)].mean(axis=0)


def _make_facet(code: SphericalCode, indices) -> Facet:
    centroid = facet_centroid(code, indices)
    return Facet(
        vertex_indices=tuple(int(i) for i in indices),
        centroid=centroid,
        unit_centroid=centroid / np.linalg.norm(centroid),
    )


def facets_of_code(code: SphericalCode) -> List[Facet]:
    """Leave-one-out facets for a simplex code, hull triangles for the icosahedron"""
    if code.kind == "simplex":
        everything = range(code.size)
        return [_make_facet(code, [k for k in everything if k != i]) for i in everything]
    if code.kind == "icosahedron":
        simplices = ConvexHull(code.points).simplices
        ordered = sorted(tuple(sorted(int(i) for i in s)) for s in simplices)
        return [_make_facet(code, s) for s in ordered]
    raise UnsupportedCode(f"No facet structure known for code kind '{code.kind}'")


def facet_normals(code: SphericalCode, facet: Facet, eps: float) -> np.ndarray:
    """
    Leave-one-out normals of a facet.

    Row j is orthogonal to every vertex except vertex j, has norm eps and a
    positive dot with the centroid.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = code.dim
    vertices = code.points[list(facet.vertex_indices)]
    normals = np.zeros((d, d))

    for j in range(d):
        others = np.delete(vertices, j, axis=0)
        Q, R = np.linalg.qr(others.T, mode="complete")
        diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
        rank = int(np.sum(diag > GEOMETRY_TOL * max(1.0, diag.max(initial=0.0))))
        if rank < d - 1:
            raise DegenerateFacet(facet.vertex_indices[j], rank)
        normal = Q[:, -1]
        if normal @ facet.centroid < 0:
            normal = -normal
        normals[j] = eps * normal / np.linalg.norm(normal)

    return normals


def with_normals(code: SphericalCode, facet: Facet, eps: float) -> Facet:
    return replace(facet, normals=facet_normals(code, facet, eps), eps=eps)


def min_angle(code: SphericalCode) -> float:
    """Smallest pairwise angle in radians"""
    if code.size < 2:
        raise ValueError("min_angle needs at least two points")
    gram = code.gram()
    np.fill_diagonal(gram, -np.inf)
    return float(np.arccos(np.clip(gram.max(), -1.0, 1.0)))


def centroid_dot(code: SphericalCode, facet: Facet) -> float:
    """min_j of unit normal p_j dotted with the unit centroid"""
    unit = facet_normals(code, facet, 1.0)
    return float((unit @ facet.unit_centroid).min())


def cones_containing(code: SphericalCode, facets: List[Facet], x) -> List[int]:
    """Indices of facets whose normals all have nonnegative dot with x"""
    x = np.asarray(x, dtype=float)
    hits = []
    for i, facet in enumerate(facets):
        unit = facet_normals(code, facet, 1.0)
        if np.all(unit @ x >= -GEOMETRY_TOL):
            hits.append(i)
    return hits


def code_to_json(code: SphericalCode) -> Dict[str, Any]:
    return {
        "kind": code.kind,
        "dim": code.dim,
        "cos_theta": code.cos_theta,
        "points": code.points.tolist(),
    }


def make_code(kind: str, n: int) -> SphericalCode:
    """Code for an n-state ensemble"""
    if kind == "simplex":
        return simplex_code(n - 1)
    if kind == "icosahedron":
        if n != 4:
            raise UnsupportedCode("The icosahedron code needs n = 4")
        return icosahedron_code()
    raise UnsupportedCode(f"Unknown code kind '{kind}'")
