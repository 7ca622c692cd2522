"""Exact Euler characteristic curves and discretized transforms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import numpy.typing as npt

from .complex import GeometricSimplicialComplex, check_valid
from .filtration import DirectionSet, as_direction, height_matrix, sorted_dimension_values, sublevel_counts

Strategy = Literal["global", "per_direction"]


def _check_increasing(t: npt.NDArray[np.float64], what: str = "thresholds") -> None:
    if t.ndim != 1 or t.shape[0] < 2:
        raise ValueError(f"{what} need at least 2 values, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{what} must be finite")
    if np.any(np.diff(t) <= 0):
        raise ValueError(f"{what} must be strictly increasing")


@dataclass(frozen=True, eq=False)
class ThresholdGrid:
    """Thresholds for the rows of an ECT matrix.

    ``values`` has shape ``(l,)`` for the global strategy and ``(l, k)`` for
    the per-direction strategy (column ``j`` belongs to direction ``j``).
    ``degenerate`` marks per-direction columns where all vertices share one
    height; such a column holds ``l`` copies of that height.
    """

    strategy: Strategy
    values: npt.NDArray[np.float64]
    degenerate: Optional[npt.NDArray[np.bool_]] = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if self.strategy == "global":
            _check_increasing(v)
            deg = None
        elif self.strategy == "per_direction":
            if v.ndim != 2:
                raise ValueError("per-direction thresholds must be an l x k matrix")
            deg = (
                np.zeros(v.shape[1], dtype=bool)
                if self.degenerate is None
                else np.array(self.degenerate, dtype=bool).reshape(-1)
            )
            if deg.shape[0] != v.shape[1]:
                raise ValueError("degenerate mask must have one entry per direction")
            for j in range(v.shape[1]):
                if deg[j]:
                    if v.shape[0] < 2 or np.any(v[:, j] != v[0, j]):
                        raise ValueError(f"degenerate column {j} must repeat a single value")
                else:
                    _check_increasing(v[:, j], f"thresholds of direction {j}")
            deg.setflags(write=False)
        else:
            raise ValueError(f"unknown threshold strategy {self.strategy!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "degenerate", deg)

    @classmethod
    def linear(cls, l: int, lo: float = -1.0, hi: float = 1.0) -> "ThresholdGrid":
        """``l`` evenly spaced thresholds on ``[lo, hi]``, endpoints included."""
        if l < 2:
            raise ValueError("a threshold grid needs l >= 2")
        return cls("global", np.linspace(lo, hi, l))

    @property
    def l(self) -> int:
        return self.values.shape[0]

    def column(self, j: int) -> npt.NDArray[np.float64]:
        return self.values if self.strategy == "global" else self.values[:, j]

    def as_matrix(self, k: int) -> npt.NDArray[np.float64]:
        """Thresholds broadcast to ``(l, k)``."""
        if self.strategy == "global":
            return np.repeat(self.values[:, None], k, axis=1)
        if self.values.shape[1] != k:
            raise ValueError(f"grid has {self.values.shape[1]} columns but there are {k} directions")
        return self.values

    def same_as(self, other: "ThresholdGrid") -> bool:
        return (
            self.strategy == other.strategy
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )


@dataclass(frozen=True, eq=False)
class EctMatrix:
    """Rows are thresholds (lowest first), columns are directions."""

    values: npt.NDArray
    directions: DirectionSet
    thresholds: ThresholdGrid

    def __post_init__(self) -> None:
        v = np.array(self.values)
        expected = (self.thresholds.l, self.directions.k)
        if v.shape != expected:
            raise ValueError(f"ECT values have shape {v.shape}, expected {expected}")
        if self.thresholds.strategy == "per_direction" and self.thresholds.values.shape[1] != self.directions.k:
            raise ValueError("per-direction grid does not match the number of directions")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def strategy(self) -> Strategy:
        return self.thresholds.strategy


def ecc(K: GeometricSimplicialComplex, w: npt.ArrayLike, grid: npt.ArrayLike) -> npt.NDArray[np.int64]:
    """Euler characteristic of the sublevel complex at each threshold in ``grid``."""
    t = np.asarray(grid, dtype=np.float64).reshape(-1)
    _check_increasing(t)
    check_valid(K)
    w = as_direction(w, K.d)
    counts = sublevel_counts(sorted_dimension_values(K, w, check=False), t)
    signs = (-1) ** np.arange(counts.shape[1])
    return counts @ signs if counts.shape[1] else np.zeros(t.shape[0], dtype=np.int64)


def ect(K: GeometricSimplicialComplex, W: DirectionSet, grid: ThresholdGrid) -> EctMatrix:
    """Stack the Euler characteristic curve of every direction into an ``l x k`` matrix."""
    check_valid(K)
    T = grid.as_matrix(W.k)
    values = np.zeros(T.shape, dtype=np.int64)
    for i, F in enumerate(height_matrix(K, W)):
        F = np.sort(F, axis=0)
        sign = 1 if i % 2 == 0 else -1
        for j in range(W.k):
            values[:, j] += sign * np.searchsorted(F[:, j], T[:, j], side="right")
    return EctMatrix(values, W, grid)


def vertex_height_range(K: GeometricSimplicialComplex, W: DirectionSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-direction min and max of vertex heights."""
    if K.n == 0:
        raise ValueError("complex has no vertices")
    H = K.coordinates @ W.vectors.T
    return H.min(axis=0), H.max(axis=0)


def per_direction_grid(
    K: GeometricSimplicialComplex, W: DirectionSet, l: int, *, shared_range: bool = False
) -> ThresholdGrid:
    """Evenly spaced thresholds spanning each direction's vertex heights.

    With ``shared_range`` a single global grid from the smallest to the
    largest height over all directions is returned instead.
    """
    if l < 2:
        raise ValueError("a threshold grid needs l >= 2")
    lo, hi = vertex_height_range(K, W)
    if shared_range:
        a, b = float(lo.min()), float(hi.max())
        if a == b:
            raise ValueError("all vertex heights coincide; no shared range to span")
        return ThresholdGrid.linear(l, a, b)
    frac = np.linspace(0.0, 1.0, l)[:, None]
    values = lo[None, :] + frac * (hi - lo)[None, :]
    # pin the endpoints so the top row is exactly the max height
    values[0], values[-1] = lo, hi
    degenerate = hi <= lo
    values[:, degenerate] = lo[degenerate]
    return ThresholdGrid("per_direction", values, degenerate)


def ect_distance(A: EctMatrix, B: EctMatrix) -> float:
    """Mean squared entrywise difference of two ECTs sampled on the same grid."""
    if A.shape != B.shape:
        raise ValueError(f"ECT shapes differ: {A.shape} vs {B.shape}")
    if not A.thresholds.same_as(B.thresholds):
        raise ValueError("ECTs were sampled on different threshold grids")
    if not A.directions.same_as(B.directions):
        raise ValueError("ECTs were sampled along different directions")
    diff = np.asarray(A.values, dtype=np.float64) - np.asarray(B.values, dtype=np.float64)
    return float(np.mean(diff**2))


def normalize_columns(values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Rescale each column affinely onto [-1, 1]; constant columns map to 0."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(axis=0), v.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    out = 2.0 * (v - lo) / span - 1.0
    out[:, hi <= lo] = 0.0
    return out
