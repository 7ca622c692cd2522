import math

import numpy as np
import pytest

from ectkit.sampling import random_complex

ACCEPTANCE_LINES: list[str] = []


def brute_force_ecc(K, w, t):
    """Independent oracle: plain-Python sublevel counting, no numpy reductions."""
    total = 0
    for i, arr in enumerate(K.simplices_by_dim):
        for simplex in arr.tolist():
            height = max(sum(a * b for a, b in zip(K.coordinates[v].tolist(), w)) for v in simplex)
            if height <= t:
                total += (-1) ** i
    return total


def brute_force_soft_ecc(K, w, t, lam):
    total = 0.0
    for i, arr in enumerate(K.simplices_by_dim):
        for simplex in arr.tolist():
            height = max(sum(a * b for a, b in zip(K.coordinates[v].tolist(), w)) for v in simplex)
            total += (-1) ** i / (1.0 + math.exp(-lam * (t - height)))
    return total


def fsum_soft_loss(K, W, T, lam, G):
    """sum(G * soft ECT) straight from the definition, summed with exact rounding.

    Finite differences of an O(10) loss carry ~1e-10 rounding noise at h=1e-5;
    math.fsum lets exactly cancelling terms cancel so that noise disappears.
    """
    from scipy.special import expit

    W = getattr(W, "vectors", W)
    T = np.asarray(T, dtype=np.float64)
    H = K.coordinates @ np.asarray(W).T
    terms = []
    for i, arr in enumerate(K.simplices_by_dim):
        F = H[arr].max(axis=1)
        terms.append(((-1) ** i * G[:, None, :] * expit(lam * (T[:, None, :] - F[None, :, :]))).ravel())
    return math.fsum(np.concatenate(terms).tolist())


def all_heights(K, W):
    """Every simplex height for every direction, flattened."""
    W = getattr(W, "vectors", W)
    H = K.coordinates @ np.asarray(W).T
    return np.concatenate([H[arr].max(axis=1).ravel() for arr in K.simplices_by_dim])


def off_tie_thresholds(rng, heights, n, lo=-1.2, hi=1.2, gap=1e-3):
    """Sorted thresholds at least ``gap`` away from every height."""
    out = []
    heights = np.asarray(heights).ravel()
    while len(out) < n:
        t = rng.uniform(lo, hi)
        if np.all(np.abs(heights - t) >= gap) and all(abs(t - s) > 1e-12 for s in out):
            out.append(t)
    return np.sort(np.asarray(out))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_complex():
    def make(seed, n=None, d=2, max_simplices=30):
        r = np.random.default_rng(seed)
        n = n if n is not None else int(r.integers(3, 11))
        return random_complex(r, n, d, max_simplices)

    return make


def report(criterion: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
