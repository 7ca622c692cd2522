"""Seeded generation of directions and synthetic point clouds.

All randomness goes through numpy's PCG64 bit generator seeded via
``SeedSequence([seed, stream_id])``, so a (seed, purpose) pair always yields
the same stream regardless of platform. Stream ids are fixed below and are
part of the reproducibility contract: changing one changes every seeded
result that depends on it.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from .complex import GeometricSimplicialComplex, normalize_points
from .filtration import DirectionSet

RNG_ALGORITHM = "numpy.PCG64 via SeedSequence([seed, stream])"

STREAMS = {
    "directions": 1,
    "angles": 2,
    "double_annulus": 3,
    "noisy_circle": 4,
    "target_angles": 5,
    "complex": 6,
}

# double annulus geometry, before normalization to the unit ball
ANNULUS_CENTERS = ((-1.0, 0.0), (1.0, 0.0))
ANNULUS_INNER_RADIUS = 0.45
ANNULUS_OUTER_RADIUS = 0.8

DEFAULT_NOISE_SIGMA = 0.1


def make_rng(seed: int, stream: str | int) -> np.random.Generator:
    """Independent generator for one purpose under a given seed."""
    sid = STREAMS[stream] if isinstance(stream, str) else int(stream)
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, sid])))


def sample_directions_uniform(k: int, d: int, seed: int) -> DirectionSet:
    """``k`` i.i.d. uniform directions on the unit sphere in R^d (normalized Gaussians)."""
    if k < 1 or d < 2:
        raise ValueError(f"need k >= 1 and d >= 2, got k={k}, d={d}")
    rng = make_rng(seed, "directions")
    out = np.empty((k, d))
    filled = 0
    while filled < k:
        g = rng.standard_normal((k - filled, d))
        norms = np.sqrt((g**2).sum(axis=1))
        g = g[norms > 0] / norms[norms > 0, None]
        out[filled : filled + len(g)] = g
        filled += len(g)
    if d == 2:
        # planar sets carry their angles; vectors are rebuilt from them so archives round-trip
        return DirectionSet.from_angles(np.arctan2(out[:, 1], out[:, 0]))
    return DirectionSet(out)


def sample_angles_normal(k: int, seed: int, *, loc: float = 0.0, scale: float = 1.0) -> npt.NDArray[np.float64]:
    if k < 1:
        raise ValueError("k must be positive")
    return make_rng(seed, "angles").normal(loc, scale, size=k)


def sample_angles_uniform(k: int, seed: int) -> npt.NDArray[np.float64]:
    """Angles uniform on [0, 2*pi), used for target directions."""
    if k < 1:
        raise ValueError("k must be positive")
    return make_rng(seed, "target_angles").uniform(0.0, 2.0 * np.pi, size=k)


def _annulus_points(rng: np.random.Generator, m: int, center, r_in: float, r_out: float) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * np.pi, size=m)
    # area-uniform radius
    r = np.sqrt(rng.uniform(r_in**2, r_out**2, size=m))
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def generate_double_annulus(n: int, seed: int, *, normalize: bool = True) -> npt.NDArray[np.float64]:
    """``n`` points, ceil(n/2) on the left annulus and floor(n/2) on the right."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = make_rng(seed, "double_annulus")
    left = _annulus_points(rng, (n + 1) // 2, ANNULUS_CENTERS[0], ANNULUS_INNER_RADIUS, ANNULUS_OUTER_RADIUS)
    right = _annulus_points(rng, n // 2, ANNULUS_CENTERS[1], ANNULUS_INNER_RADIUS, ANNULUS_OUTER_RADIUS)
    points = np.vstack([left, right])
    return normalize_points(points)[0] if normalize else points


def generate_noisy_circle(
    n: int, seed: int, noise_sigma: float = DEFAULT_NOISE_SIGMA, *, normalize: bool = True
) -> npt.NDArray[np.float64]:
    """Uniform angles on the unit circle with Gaussian radial jitter."""
    if n < 1:
        raise ValueError("n must be positive")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = make_rng(seed, "noisy_circle")
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    r = 1.0 + rng.normal(0.0, noise_sigma, size=n) if noise_sigma > 0 else np.ones(n)
    points = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return normalize_points(points)[0] if normalize else points


def random_complex(rng: np.random.Generator, n: int, d: int = 2, max_simplices: int = 30) -> GeometricSimplicialComplex:
    """Random valid complex: points plus a closed set of edges and triangles.

    Test fixture used by the property suites.
    """
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    tris = set()
    edges = set()
    budget = max_simplices - n
    for _ in range(4 * max_simplices):
        if budget <= 0:
            break
        if rng.random() < 0.35 and n >= 3:
            t = tuple(sorted(rng.choice(n, 3, replace=False).tolist()))
            new_e = {e for e in ((t[0], t[1]), (t[0], t[2]), (t[1], t[2])) if e not in edges}
            cost = 1 + len(new_e)
            if t in tris or cost > budget:
                continue
            tris.add(t)
            edges |= new_e
            budget -= cost
        elif n >= 2:
            e = tuple(sorted(rng.choice(n, 2, replace=False).tolist()))
            if e in edges:
                continue
            edges.add(e)
            budget -= 1
    by_dim = [np.arange(n).reshape(-1, 1), sorted(edges), sorted(tris)]
    return GeometricSimplicialComplex(X, tuple(np.asarray(b, dtype=np.int64).reshape(-1, i + 1) for i, b in enumerate(by_dim)))
