"""Gradient descent on the smooth ECT: learning directions and learning coordinates."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import numpy.typing as npt

from .complex import GeometricSimplicialComplex, check_valid, from_point_cloud
from .ect_diff import DEFAULT_LAMBDA, SmoothEctMatrix, _Layout, forward_backward
from .ect_exact import EctMatrix
from .filtration import DirectionSet
from .sampling import sample_angles_normal

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e6


class DivergenceError(RuntimeError):
    def __init__(self, step: int, loss: float, initial: float, reason: str = ""):
        self.step, self.loss, self.initial = step, loss, initial
        what = reason or f"loss {loss!r} (initial {initial!r})"
        super().__init__(f"optimization diverged at step {step}: {what}; try a smaller learning rate")


@dataclass(frozen=True)
class OptimizeConfig:
    steps: int = 1000
    learning_rate: float = 0.1
    seed: int = 0
    lam: float = DEFAULT_LAMBDA
    k: int = 32
    l: int = 64
    log_every: int = 1

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.log_every < 1:
            raise ValueError("log_every must be at least 1")
        if self.k < 1 or self.l < 2:
            raise ValueError("need k >= 1 and l >= 2")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptimizeTrace:
    """Loss at every ``log_every``-th step (before that step's update) plus the result."""

    steps: list[int]
    losses: list[float]
    initial_loss: float
    final_loss: float
    parameters: npt.NDArray[np.float64]
    initial_parameters: npt.NDArray[np.float64]
    wall_time: float = field(default=0.0, compare=False)

    def records(self) -> list[tuple[int, float]]:
        return list(zip(self.steps, self.losses))


def mse_loss(pred: npt.ArrayLike, target: npt.ArrayLike) -> tuple[float, npt.NDArray[np.float64]]:
    """Mean squared error and its gradient with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def _target_lambda(target: EctMatrix, config: OptimizeConfig) -> float:
    return target.lam if isinstance(target, SmoothEctMatrix) else config.lam


def _descend(loss_and_grad, params: np.ndarray, config: OptimizeConfig) -> OptimizeTrace:
    start = time.perf_counter()
    start_params = params.copy()
    steps, losses = [], []
    initial = None
    for step in range(config.steps):
        loss, grad = loss_and_grad(params)
        if initial is None:
            initial = loss
        if not math.isfinite(loss) or (initial > 0 and loss > DIVERGENCE_FACTOR * initial):
            raise DivergenceError(step, loss, initial)
        if step % config.log_every == 0:
            steps.append(step)
            losses.append(loss)
            log.debug("step %d loss %.6g", step, loss)
        with np.errstate(over="ignore", invalid="ignore"):
            params = params - config.learning_rate * grad
        if not np.all(np.isfinite(params)):
            # the loss is bounded, so runaway parameters are the practical failure mode
            raise DivergenceError(step + 1, math.nan, initial, "parameters became non-finite")
    final, _ = loss_and_grad(params)
    if not math.isfinite(final) or (initial > 0 and final > DIVERGENCE_FACTOR * initial):
        raise DivergenceError(config.steps, final, initial)
    return OptimizeTrace(steps, losses, initial, final, params, start_params, time.perf_counter() - start)


def learn_directions(
    target: EctMatrix,
    K: GeometricSimplicialComplex,
    config: OptimizeConfig,
    initial_angles: Optional[npt.ArrayLike] = None,
) -> OptimizeTrace:
    """Fit planar direction angles so the smooth ECT of ``K`` matches ``target``.

    Angles start from Normal(0, 1) draws under ``config.seed`` unless given.
    The target's threshold grid is reused; a smooth target also fixes lambda.
    """
    check_valid(K)
    if K.d != 2:
        raise ValueError("learning directions is implemented for planar complexes (d = 2)")
    k = target.directions.k
    if initial_angles is None:
        theta = sample_angles_normal(k, config.seed)
    else:
        theta = np.array(initial_angles, dtype=np.float64).reshape(-1)
        if theta.shape[0] != k:
            raise ValueError(f"expected {k} initial angles, got {theta.shape[0]}")
    lam = _target_lambda(target, config)
    T = target.thresholds.as_matrix(k)
    Y = np.asarray(target.values, dtype=np.float64)
    layout = _Layout(K)

    def loss_and_grad(theta):
        W = DirectionSet.from_angles(theta)
        out = {}

        def upstream(values):
            out["loss"], G = mse_loss(values, Y)
            return G

        _, bundle = forward_backward(K, W, T, lam, upstream, layout, with_lambda=False)
        return out["loss"], bundle.d_angles

    return _descend(loss_and_grad, theta, config)


def learn_coordinates(
    target: EctMatrix,
    initial_points: npt.ArrayLike,
    W: DirectionSet,
    config: OptimizeConfig,
    *,
    target_n: Optional[int] = None,
) -> OptimizeTrace:
    """Move point coordinates by gradient descent until their smooth ECT matches ``target``.

    ``W`` and the threshold grid stay fixed. ``target_n``, when known, is the
    size of the cloud the target was computed from and must match.
    """
    X0 = np.array(initial_points, dtype=np.float64)
    if X0.ndim != 2 or X0.shape[0] < 1:
        raise ValueError("initial points must be a non-empty n x d matrix")
    if target_n is not None and target_n != X0.shape[0]:
        raise ValueError(f"target was built from {target_n} points, initial cloud has {X0.shape[0]}")
    if not W.same_as(target.directions):
        raise ValueError("directions differ from those the target was computed with")
    if W.d != X0.shape[1]:
        raise ValueError(f"directions live in R^{W.d}, points in R^{X0.shape[1]}")
    lam = _target_lambda(target, config)
    T = target.thresholds.as_matrix(W.k)
    Y = np.asarray(target.values, dtype=np.float64)
    K0 = from_point_cloud(X0)
    layout = _Layout(K0)

    def loss_and_grad(flat):
        K = GeometricSimplicialComplex(flat.reshape(X0.shape), K0.simplices_by_dim)
        out = {}

        def upstream(values):
            out["loss"], G = mse_loss(values, Y)
            return G

        _, bundle = forward_backward(K, W, T, lam, upstream, layout, with_lambda=False)
        return out["loss"], bundle.d_coordinates.ravel()

    trace = _descend(loss_and_grad, X0.ravel(), config)
    trace.parameters = trace.parameters.reshape(X0.shape)
    trace.initial_parameters = trace.initial_parameters.reshape(X0.shape)
    return trace


def chamfer_distance(A: npt.ArrayLike, B: npt.ArrayLike) -> float:
    """Symmetric mean nearest-neighbour distance between two point clouds."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    D = np.sqrt(((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2))
    return 0.5 * (float(D.min(axis=1).mean()) + float(D.min(axis=0).mean()))


def diameter(A: npt.ArrayLike) -> float:
    A = np.asarray(A, dtype=np.float64)
    return float(np.sqrt(((A[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)).max())
