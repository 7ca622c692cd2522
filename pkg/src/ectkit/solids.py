"""The five platonic solids as triangulated boundary complexes and polygonal cell counts."""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull

from .complex import GeometricSimplicialComplex, from_triangle_mesh

PHI = (1.0 + 5.0**0.5) / 2.0

# (vertices, edges, faces) of each solid with its natural polygonal faces
POLYGONAL_COUNTS = {
    "tetrahedron": (4, 6, 4),
    "cube": (8, 12, 6),
    "octahedron": (6, 12, 8),
    "dodecahedron": (20, 30, 12),
    "icosahedron": (12, 30, 20),
}


def _cyclic_permutations(points):
    out = []
    for x, y, z in points:
        out += [(x, y, z), (y, z, x), (z, x, y)]
    return out


def solid_vertices(name: str) -> np.ndarray:
    if name == "tetrahedron":
        pts = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif name == "cube":
        pts = list(product((-1, 1), repeat=3))
    elif name == "octahedron":
        pts = [tuple(s * (i == j) for j in range(3)) for i in range(3) for s in (1, -1)]
    elif name == "icosahedron":
        pts = _cyclic_permutations([(0, a, b * PHI) for a in (-1, 1) for b in (-1, 1)])
    elif name == "dodecahedron":
        pts = list(product((-1, 1), repeat=3))
        pts += _cyclic_permutations([(0, a / PHI, b * PHI) for a in (-1, 1) for b in (-1, 1)])
    else:
        raise KeyError(f"unknown platonic solid {name!r}")
    X = np.asarray(pts, dtype=np.float64)
    return X / np.linalg.norm(X[0])


def platonic_solid(name: str) -> GeometricSimplicialComplex:
    """Triangulated boundary of the solid, vertices on the unit sphere."""
    X = solid_vertices(name)
    return from_triangle_mesh(X, ConvexHull(X).simplices)


class CellCounts(NamedTuple):
    vertices: int
    edges: int
    faces: int

    @property
    def euler_characteristic(self) -> int:
        return self.vertices - self.edges + self.faces


def polygonal_cell_counts(name: str, decimals: int = 9) -> CellCounts:
    """Count cells after merging coplanar hull triangles back into polygons."""
    X = solid_vertices(name)
    hull = ConvexHull(X)
    planes: dict[tuple, list[np.ndarray]] = {}
    for tri, eq in zip(hull.simplices, hull.equations):
        planes.setdefault(tuple(np.round(eq, decimals)), []).append(tri)
    edges = set()
    for tris in planes.values():
        seen: dict[tuple[int, int], int] = {}
        for tri in tris:
            for a, b in ((0, 1), (1, 2), (0, 2)):
                e = tuple(sorted((int(tri[a]), int(tri[b]))))
                seen[e] = seen.get(e, 0) + 1
        # diagonals are shared by two triangles of the same polygon
        edges |= {e for e, c in seen.items() if c == 1}
    return CellCounts(len(X), len(edges), len(planes))
