"""Geometric simplicial complexes and their Euler characteristic."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt


class InvalidComplexError(ValueError):
    """Raised when an operation requires a valid complex and receives one that is not."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"invalid simplicial complex: {lines}{more}")


class Violation(NamedTuple):
    kind: str  # "unsorted", "index", "closure", "duplicate", "empty"
    simplex: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} {list(self.simplex)}: {self.detail}"


def _as_simplex_array(simplices: Iterable[Sequence[int]], dim: int) -> npt.NDArray[np.int64]:
    rows = [tuple(int(v) for v in s) for s in simplices]
    if not rows:
        return np.zeros((0, dim + 1), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), dim + 1)


@dataclass(frozen=True, eq=False)
class GeometricSimplicialComplex:
    """Vertex coordinates plus simplices grouped by dimension.

    ``simplices_by_dim[i]`` is an ``(m_i, i + 1)`` integer array, one row per
    i-simplex, each row listing vertex indices (rows of ``coordinates``).
    Construction does not validate; call :func:`validate` or use the
    ``from_*`` builders, which produce valid complexes by construction.
    """

    coordinates: npt.NDArray[np.float64]
    simplices_by_dim: tuple[npt.NDArray[np.int64], ...] = field(default=())

    def __post_init__(self) -> None:
        coords = np.array(self.coordinates, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1) if coords.size else coords.reshape(0, 1)
        if coords.ndim != 2:
            raise ValueError(f"coordinates must be an n x d matrix, got shape {coords.shape}")
        coords.setflags(write=False)
        object.__setattr__(self, "coordinates", coords)
        arrays = []
        for i, s in enumerate(self.simplices_by_dim):
            a = np.array(s, dtype=np.int64).reshape(-1, i + 1)
            a.setflags(write=False)
            arrays.append(a)
        # trailing empty dimensions carry no information
        while arrays and len(arrays[-1]) == 0:
            arrays.pop()
        object.__setattr__(self, "simplices_by_dim", tuple(arrays))

    @classmethod
    def from_simplices(
        cls, coordinates: npt.ArrayLike, simplices: Iterable[Sequence[int]]
    ) -> "GeometricSimplicialComplex":
        """Group arbitrary simplices by dimension, sorting each vertex list.

        No closure is added and nothing is deduplicated, so the result can be
        invalid; this is the entry point for checking user-supplied data.
        """
        groups: dict[int, list[tuple[int, ...]]] = {}
        for s in simplices:
            s = tuple(int(v) for v in s)
            groups.setdefault(len(s) - 1, []).append(s)
        if -1 in groups:
            raise ValueError("empty simplex")
        p = max(groups, default=-1)
        by_dim = tuple(_as_simplex_array(groups.get(i, []), i) for i in range(p + 1))
        return cls(np.asarray(coordinates, dtype=np.float64), by_dim)

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    @property
    def d(self) -> int:
        return self.coordinates.shape[1]

    @property
    def p(self) -> int:
        """Top dimension; -1 for the empty complex."""
        return len(self.simplices_by_dim) - 1

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices_by_dim)

    def simplices(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for arr in self.simplices_by_dim for row in arr]

    def with_coordinates(self, coordinates: npt.ArrayLike) -> "GeometricSimplicialComplex":
        coordinates = np.asarray(coordinates, dtype=np.float64)
        if coordinates.shape != self.coordinates.shape:
            raise ValueError(
                f"coordinate shape {coordinates.shape} does not match {self.coordinates.shape}"
            )
        return GeometricSimplicialComplex(coordinates, self.simplices_by_dim)

    def stats(self) -> "ComplexStats":
        return ComplexStats(counts=self.counts, n=self.n, p=self.p, d=self.d)

    def __repr__(self) -> str:
        return f"GeometricSimplicialComplex(n={self.n}, d={self.d}, counts={self.counts})"


class ComplexStats(NamedTuple):
    counts: tuple[int, ...]
    n: int
    p: int
    d: int


def validate(K: GeometricSimplicialComplex) -> list[Violation]:
    """Return every invariant violation of ``K``; an empty list means valid."""
    violations: list[Violation] = []
    present: set[tuple[int, ...]] = set()
    stored: list[tuple[int, ...]] = []
    for arr in K.simplices_by_dim:
        for row in arr:
            s = tuple(int(v) for v in row)
            if any(a >= b for a, b in zip(s, s[1:])):
                violations.append(Violation("unsorted", s, "vertices must be strictly increasing"))
            bad = [v for v in s if v < 0 or v >= K.n]
            for v in bad:
                violations.append(Violation("index", s, f"vertex {v} out of range for n={K.n}"))
            if s in present:
                violations.append(Violation("duplicate", s, "simplex stored more than once"))
                continue
            present.add(s)
            stored.append(s)

    canonical = {tuple(sorted(set(s))) for s in present}
    for s in stored:
        verts = tuple(sorted(set(s)))
        if len(verts) < 2:
            continue
        missing = [
            face
            for r in range(1, len(verts))
            for face in combinations(verts, r)
            if face not in canonical
        ]
        if missing:
            shown = ", ".join(str(list(f)) for f in missing[:4])
            violations.append(Violation("closure", s, f"missing faces {shown}"))
    return violations


def check_valid(K: GeometricSimplicialComplex) -> None:
    violations = validate(K)
    if violations:
        raise InvalidComplexError(violations)


def euler_characteristic(K: GeometricSimplicialComplex, *, check: bool = True) -> int:
    """Alternating sum of simplex counts over dimensions."""
    if check:
        check_valid(K)
    return sum((-1) ** i * c for i, c in enumerate(K.counts))


def from_triangle_mesh(
    coordinates: npt.ArrayLike, triangles: npt.ArrayLike
) -> GeometricSimplicialComplex:
    """Build the closure of a triangle list: all vertices, deduplicated edges, triangles."""
    coords = np.asarray(coordinates, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] < 1:
        raise ValueError(f"coordinates must be an n x d matrix with d >= 1, got {coords.shape}")
    n = coords.shape[0]
    tris = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    if tris.size and (tris.min() < 0 or tris.max() >= n):
        row = int(np.flatnonzero((tris < 0).any(axis=1) | (tris >= n).any(axis=1))[0])
        raise ValueError(f"triangle {row} {tris[row].tolist()} has a vertex index outside 0..{n - 1}")
    tris = np.sort(tris, axis=1)
    degenerate = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2])
    if degenerate.any():
        row = int(np.flatnonzero(degenerate)[0])
        raise ValueError(f"triangle {row} {tris[row].tolist()} repeats a vertex")
    tris = np.unique(tris, axis=0)
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]])
    edges = np.unique(edges, axis=0).reshape(-1, 2)
    vertices = np.arange(n, dtype=np.int64).reshape(-1, 1)
    return GeometricSimplicialComplex(coords, (vertices, edges, tris))


def from_point_cloud(points: npt.ArrayLike) -> GeometricSimplicialComplex:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("point cloud must contain at least one point")
    return GeometricSimplicialComplex(
        points, (np.arange(points.shape[0], dtype=np.int64).reshape(-1, 1),)
    )


class Normalization(NamedTuple):
    complex: GeometricSimplicialComplex
    center: npt.NDArray[np.float64]
    scale: float
    degenerate: bool

    def invert(self, coordinates: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.asarray(coordinates, dtype=np.float64) * self.scale + self.center


def normalize_points(points: npt.ArrayLike) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], float, bool]:
    """Center on the centroid and divide by the largest distance to it.

    Returns ``(images, center, scale, degenerate)``; coincident points give
    ``scale = 1`` and ``degenerate = True``.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("need at least one point to normalize")
    center = x.mean(axis=0)
    centered = x - center
    scale = float(np.sqrt((centered**2).sum(axis=1)).max())
    degenerate = scale == 0.0
    if degenerate:
        scale = 1.0
    images = centered / scale
    if not degenerate:
        # exact unit max norm; the division above can land one ulp off
        norms = np.sqrt((images**2).sum(axis=1))
        images[np.argmax(norms)] /= norms.max()
    return images, center, scale, degenerate


def normalize_to_unit_ball(K: GeometricSimplicialComplex) -> Normalization:
    check_valid(K)
    images, center, scale, degenerate = normalize_points(K.coordinates)
    return Normalization(K.with_coordinates(images), center, scale, degenerate)


def disjoint_union(K: GeometricSimplicialComplex, L: GeometricSimplicialComplex) -> GeometricSimplicialComplex:
    """Place ``L`` after ``K`` with vertex indices shifted by ``K.n``."""
    if K.n and L.n and K.d != L.d:
        raise ValueError(f"ambient dimensions differ: {K.d} vs {L.d}")
    coords = np.vstack([K.coordinates, L.coordinates]) if K.n else L.coordinates
    p = max(K.p, L.p)
    by_dim = []
    for i in range(p + 1):
        a = K.simplices_by_dim[i] if i <= K.p else np.zeros((0, i + 1), dtype=np.int64)
        b = L.simplices_by_dim[i] + K.n if i <= L.p else np.zeros((0, i + 1), dtype=np.int64)
        by_dim.append(np.vstack([a, b]))
    return GeometricSimplicialComplex(coords, tuple(by_dim))


def relabel(K: GeometricSimplicialComplex, permutation: npt.ArrayLike) -> GeometricSimplicialComplex:
    """Rename vertex ``v`` to ``permutation[v]``, moving coordinate rows along with it."""
    perm = np.asarray(permutation, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(K.n)):
        raise ValueError("relabeling must be a permutation of the vertex indices")
    coords = np.empty_like(K.coordinates)
    coords[perm] = K.coordinates
    by_dim = []
    for arr in K.simplices_by_dim:
        mapped = np.sort(perm[arr], axis=1)
        by_dim.append(mapped[np.lexsort(mapped.T[::-1])] if len(mapped) else mapped)
    return GeometricSimplicialComplex(coords, tuple(by_dim))
