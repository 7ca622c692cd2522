"""Sigmoid-smoothed Euler characteristic transform and its analytic gradients.

Every simplex contributes ``(-1)^dim * S(lam * (t - f_w(simplex)))`` to each
threshold ``t``, where ``S`` is the logistic sigmoid. The sum runs over all
simplices of the complex; simplices above ``t`` contribute almost nothing,
but they still pass gradient. As ``lam`` grows the matrix approaches the
exact ECT away from ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import numpy.typing as npt
from scipy.special import expit

from .complex import GeometricSimplicialComplex, check_valid
from .ect_exact import EctMatrix, ThresholdGrid, _check_increasing
from .filtration import DirectionSet, as_direction

DEFAULT_LAMBDA = 100.0


def sigmoid(x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Logistic function 1 / (1 + exp(-x)); saturates instead of overflowing."""
    return expit(np.asarray(x, dtype=np.float64))


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be a positive finite number, got {lam!r}")
    return lam


@dataclass(frozen=True, eq=False)
class SmoothEctMatrix(EctMatrix):
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "lam", _check_lambda(self.lam))
        if not np.issubdtype(self.values.dtype, np.floating):
            raise ValueError("smooth ECT values must be real")


@dataclass
class GradientBundle:
    """Loss gradients with respect to every input of the smooth ECT.

    ``d_angles`` is set only when the directions carry planar angles.
    ``d_directions`` is always projected onto the tangent space of the
    sphere at each direction.
    """

    d_directions: npt.NDArray[np.float64]
    d_coordinates: npt.NDArray[np.float64]
    d_thresholds: npt.NDArray[np.float64]
    d_lambda: float
    d_angles: Optional[npt.NDArray[np.float64]] = None


class _Layout:
    """All simplices of a complex flattened into one axis, with signs."""

    def __init__(self, K: GeometricSimplicialComplex):
        self.groups = [arr for arr in K.simplices_by_dim]
        self.signs = np.concatenate(
            [np.full(len(arr), 1.0 if i % 2 == 0 else -1.0) for i, arr in enumerate(self.groups)]
        ) if self.groups else np.zeros(0)

    def heights(self, X: np.ndarray, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Simplex heights ``(m, k)`` and the lowest-index maximizing vertex for each."""
        H = X @ W.T
        F, argv = [], []
        for arr in self.groups:
            if len(arr) == 0:
                continue
            hv = H[arr]  # (m_i, i+1, k)
            pos = hv.argmax(axis=1)  # first maximum within a sorted simplex = lowest index
            F.append(np.take_along_axis(hv, pos[:, None, :], axis=1)[:, 0, :])
            argv.append(np.take_along_axis(np.broadcast_to(arr[:, :, None], hv.shape), pos[:, None, :], axis=1)[:, 0, :])
        if not F:
            k = W.shape[0]
            return np.zeros((0, k)), np.zeros((0, k), dtype=np.int64)
        return np.concatenate(F), np.concatenate(argv)


def _forward(X, W, T, lam, layout):
    """Values plus the buffer ``tanh(lam * (t - f) / 2)`` of shape ``(k, l, m)``.

    S(z) = (1 + tanh(z / 2)) / 2 is the logistic function; tanh is several
    times cheaper than a stable exp-based sigmoid on large arrays.
    """
    F, vstar = layout.heights(X, W)
    # direction-major so per-direction reductions are batched matmuls
    Th = np.subtract(T.T[:, :, None], F.T[:, None, :])
    Th *= 0.5 * lam
    np.tanh(Th, out=Th)
    signs = layout.signs
    values = (0.5 * signs.sum() + 0.5 * (Th @ signs)).T if F.shape[0] else np.zeros(T.shape)
    return values, Th, F, vstar


def soft_ecc(K: GeometricSimplicialComplex, w: npt.ArrayLike, grid: npt.ArrayLike, lam: float = DEFAULT_LAMBDA) -> npt.NDArray[np.float64]:
    lam = _check_lambda(lam)
    t = np.asarray(grid, dtype=np.float64).reshape(-1)
    _check_increasing(t)
    check_valid(K)
    w = as_direction(w, K.d)
    values, *_ = _forward(K.coordinates, w[None, :], t[:, None], lam, _Layout(K))
    return values[:, 0]


def soft_ect(K: GeometricSimplicialComplex, W: DirectionSet, grid: ThresholdGrid, lam: float = DEFAULT_LAMBDA) -> SmoothEctMatrix:
    """Smooth ECT as an ``l x k`` real matrix."""
    lam = _check_lambda(lam)
    check_valid(K)
    if W.d != K.d:
        raise ValueError(f"directions live in R^{W.d}, complex in R^{K.d}")
    values, *_ = _forward(K.coordinates, W.vectors, grid.as_matrix(W.k), lam, _Layout(K))
    return SmoothEctMatrix(values, W, grid, lam)


def soft_ect_backward(
    K: GeometricSimplicialComplex,
    W: DirectionSet,
    grid: ThresholdGrid,
    lam: float,
    upstream: npt.ArrayLike,
) -> GradientBundle:
    """Gradients of ``sum(upstream * soft_ect(K, W, grid, lam).values)``."""
    lam = _check_lambda(lam)
    check_valid(K)
    G = np.asarray(upstream, dtype=np.float64)
    T = grid.as_matrix(W.k)
    if G.shape != T.shape:
        raise ValueError(f"upstream gradient has shape {G.shape}, expected {T.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("upstream gradient contains non-finite entries")
    _, bundle = forward_backward(K, W, T, lam, G)
    if grid.strategy == "global":
        bundle.d_thresholds = bundle.d_thresholds.sum(axis=1)
    return bundle


def forward_backward(
    K: GeometricSimplicialComplex,
    W: DirectionSet,
    T: np.ndarray,
    lam: float,
    G=None,
    layout: Optional[_Layout] = None,
    *,
    with_lambda: bool = True,
) -> tuple[np.ndarray, Optional[GradientBundle]]:
    """One pass returning smooth ECT values and, when ``G`` is given, gradients.

    ``T`` is the ``(l, k)`` threshold matrix and ``d_thresholds`` comes back
    with that shape. ``G`` may also be a callable mapping the values to the
    upstream gradient, which lets a loss run between the two halves without
    a second forward pass. Inputs are assumed validated; the optimizers call
    this in their inner loop.
    """
    layout = layout or _Layout(K)
    X, Wv = K.coordinates, W.vectors
    values, Th, F, vstar = _forward(X, Wv, T, lam, layout)
    if G is None:
        return values, None
    if callable(G):
        G = G(values)

    # S' = S (1 - S) = (1 - tanh^2) / 4, computed in place
    dS = np.square(Th, out=Th)
    np.subtract(1.0, dS, out=dS)
    dS *= 0.25
    signs = layout.signs
    # dL/dt = lam * G * sum_m sign_m S'   and   dL/df = -lam * sign * sum_l G S'
    d_thresholds = lam * G * (dS @ signs).T
    GS = (G.T[:, None, :] @ dS)[:, 0, :]  # (k, m)
    dF = -lam * (GS * signs[None, :]).T  # (m, k)
    d_lambda = 0.0
    if with_lambda and F.size:
        gap = np.subtract(T.T[:, :, None], F.T[:, None, :])
        gap *= dS
        d_lambda = float(((gap @ signs) * G.T).sum())

    d_W = np.einsum("mk,mkd->kd", dF, X[vstar]) if dF.size else np.zeros_like(Wv)
    # direction-major flattening fixes the summation order
    idx = vstar.T.ravel()
    weights = dF.T.ravel()
    d_X = np.column_stack(
        [np.bincount(idx, weights * np.repeat(Wv[:, c], dF.shape[0]), minlength=X.shape[0]) for c in range(X.shape[1])]
    ) if dF.size else np.zeros_like(X)
    d_W_tangent = d_W - (d_W * Wv).sum(axis=1, keepdims=True) * Wv

    d_angles = None
    if W.angles is not None:
        d_angles = -np.sin(W.angles) * d_W[:, 0] + np.cos(W.angles) * d_W[:, 1]
    return values, GradientBundle(
        d_directions=d_W_tangent,
        d_coordinates=d_X,
        d_thresholds=d_thresholds,
        d_lambda=d_lambda,
        d_angles=d_angles,
    )
