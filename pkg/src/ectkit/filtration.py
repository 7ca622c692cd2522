"""Directional height filtrations of geometric simplicial complexes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt

from .complex import GeometricSimplicialComplex, check_valid

UNIT_TOL = 1e-9


def _unit_rows(vectors: npt.ArrayLike) -> npt.NDArray[np.float64]:
    w = np.array(vectors, dtype=np.float64)
    if w.ndim == 1:
        w = w.reshape(1, -1)
    if w.ndim != 2 or w.shape[0] < 1:
        raise ValueError("need at least one direction vector")
    norms = np.sqrt((w**2).sum(axis=1))
    off = np.abs(norms - 1.0) > UNIT_TOL
    if off.any():
        j = int(np.flatnonzero(off)[0])
        raise ValueError(f"direction {j} has norm {norms[j]!r}, not 1 within {UNIT_TOL}")
    return w / norms[:, None]


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """k unit vectors in R^d, optionally generated from planar angles."""

    vectors: npt.NDArray[np.float64]
    angles: Optional[npt.NDArray[np.float64]] = None

    def __post_init__(self) -> None:
        w = _unit_rows(self.vectors)
        w.setflags(write=False)
        object.__setattr__(self, "vectors", w)
        if self.angles is not None:
            a = np.array(self.angles, dtype=np.float64).reshape(-1)
            if a.shape[0] != w.shape[0] or w.shape[1] != 2:
                raise ValueError("angles are only meaningful for k planar directions")
            a.setflags(write=False)
            object.__setattr__(self, "angles", a)

    @classmethod
    def from_angles(cls, angles: npt.ArrayLike) -> "DirectionSet":
        theta = np.asarray(angles, dtype=np.float64).reshape(-1)
        return cls(np.column_stack([np.cos(theta), np.sin(theta)]), theta)

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, j: int) -> npt.NDArray[np.float64]:
        return self.vectors[j]

    def same_as(self, other: "DirectionSet") -> bool:
        return self.vectors.shape == other.vectors.shape and bool(
            np.array_equal(self.vectors, other.vectors)
        )


def as_direction(w: npt.ArrayLike, d: int) -> npt.NDArray[np.float64]:
    """Check a single direction against the ambient dimension and renormalize it."""
    w = _unit_rows(np.asarray(w, dtype=np.float64).reshape(1, -1))[0]
    if w.shape[0] != d:
        raise ValueError(f"direction has dimension {w.shape[0]}, complex lives in R^{d}")
    return w


def vertex_heights(K: GeometricSimplicialComplex, w: npt.ArrayLike) -> npt.NDArray[np.float64]:
    return K.coordinates @ as_direction(w, K.d)


def filtration_values(
    K: GeometricSimplicialComplex, w: npt.ArrayLike, *, check: bool = True
) -> list[npt.NDArray[np.float64]]:
    """Height of every simplex along ``w``: the max over its vertices of <x_v, w>.

    Entry ``i`` is aligned with ``K.simplices_by_dim[i]``.
    """
    if check:
        check_valid(K)
    h = vertex_heights(K, w)
    return [h[arr].max(axis=1) if len(arr) else np.zeros(0) for arr in K.simplices_by_dim]


def sublevel_complex(K: GeometricSimplicialComplex, w: npt.ArrayLike, t: float) -> GeometricSimplicialComplex:
    """Simplices whose height is at most ``t`` (ties included); coordinates are kept."""
    values = filtration_values(K, w)
    kept = tuple(arr[f <= t] for arr, f in zip(K.simplices_by_dim, values))
    return GeometricSimplicialComplex(K.coordinates, kept)


def sorted_dimension_values(
    K: GeometricSimplicialComplex, w: npt.ArrayLike, *, check: bool = True
) -> list[npt.NDArray[np.float64]]:
    """Per-dimension heights in ascending order.

    ``np.searchsorted(out[i], t, side="right")`` is then the number of
    i-simplices in the sublevel set at ``t``.
    """
    return [np.sort(f) for f in filtration_values(K, w, check=check)]


def sublevel_counts(sorted_values: list[npt.NDArray[np.float64]], t: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Counts per threshold (rows) and dimension (columns)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros((t.shape[0], len(sorted_values)), dtype=np.int64)
    for i, vals in enumerate(sorted_values):
        out[:, i] = np.searchsorted(vals, t, side="right")
    return out


def height_matrix(K: GeometricSimplicialComplex, W: DirectionSet) -> list[npt.NDArray[np.float64]]:
    """Simplex heights for all directions at once: entry ``i`` is ``(m_i, k)``."""
    if W.d != K.d:
        raise ValueError(f"directions live in R^{W.d}, complex in R^{K.d}")
    H = K.coordinates @ W.vectors.T
    return [H[arr].max(axis=1) if len(arr) else np.zeros((0, W.k)) for arr in K.simplices_by_dim]
