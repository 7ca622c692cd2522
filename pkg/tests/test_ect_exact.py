import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from ectkit.complex import GeometricSimplicialComplex, euler_characteristic, from_point_cloud
from ectkit.ect_exact import (
    EctMatrix,
    ThresholdGrid,
    ecc,
    ect,
    ect_distance,
    normalize_columns,
    per_direction_grid,
)
from ectkit.filtration import DirectionSet, sublevel_complex
from ectkit.sampling import random_complex, sample_directions_uniform
from ectkit.solids import platonic_solid

from conftest import all_heights, brute_force_ecc, off_tie_thresholds

EDGE = GeometricSimplicialComplex.from_simplices([[-1.0, 0.0], [1.0, 0.0]], [[0], [1], [0, 1]])


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        ThresholdGrid.linear(1)
    with pytest.raises(ValueError):
        ThresholdGrid("global", np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        ThresholdGrid("global", np.array([0.0, np.nan]))
    g = ThresholdGrid.linear(5)
    assert g.values[0] == -1.0 and g.values[-1] == 1.0 and g.l == 5


def test_ecc_endpoints(make_complex):
    K = make_complex(7)
    w = [0.0, 1.0]
    assert ecc(K, w, [2.0, 3.0]).tolist() == [euler_characteristic(K)] * 2
    assert ecc(K, w, [-3.0, -2.0]).tolist() == [0, 0]


def test_tetrahedron_sweep_matches_subcomplexes():
    K = platonic_solid("tetrahedron")
    w = np.array([0.0, 0.0, 1.0])
    heights = np.unique(K.coordinates @ w)
    mids = (heights[:-1] + heights[1:]) / 2
    grid = np.sort(np.concatenate([heights, mids, [heights[0] - 0.5, heights[-1] + 0.5]]))
    expected = [euler_characteristic(sublevel_complex(K, w, t)) for t in grid]
    assert ecc(K, w, grid).tolist() == expected
    assert expected[0] == 0 and expected[-1] == 2


def test_ecc_ties_are_included():
    assert ecc(EDGE, [1.0, 0.0], [-1.0, 0.0, 1.0]).tolist() == [1, 1, 1]
    assert ecc(EDGE, [1.0, 0.0], [-1.5, -1.0 - 1e-12, 0.99]).tolist() == [0, 0, 1]


def test_single_direction_matches_ecc(make_complex):
    K = make_complex(11)
    W = DirectionSet(np.array([[0.6, 0.8]]))
    grid = ThresholdGrid.linear(16, -1.5, 1.5)
    M = ect(K, W, grid)
    assert M.shape == (16, 1)
    assert M.values[:, 0].tolist() == ecc(K, W.vectors[0], grid.values).tolist()


def test_unit_ball_rows():
    from ectkit.complex import normalize_to_unit_ball

    K = normalize_to_unit_ball(platonic_solid("octahedron")).complex
    W = sample_directions_uniform(6, 3, seed=4)
    M = ect(K, W, ThresholdGrid.linear(9))
    # the bottom vertex sits exactly at -1 for no direction, so row 0 is empty
    lowest = (K.coordinates @ W.vectors.T).min(axis=0)
    assert np.all(lowest > -1.0)
    assert M.values[0].tolist() == [0] * 6
    assert M.values[-1].tolist() == [2] * 6


@pytest.mark.parametrize("seed", range(3))
def test_matrix_equals_stacked_oracle(seed, make_complex):
    K = make_complex(seed)
    W = sample_directions_uniform(8, 2, seed=seed)
    grid = ThresholdGrid.linear(64, -1.5, 1.5)
    M = ect(K, W, grid)
    for j in range(8):
        w = W.vectors[j].tolist()
        assert M.values[:, j].tolist() == [brute_force_ecc(K, w, t) for t in grid.values.tolist()]


def test_per_direction_grid_even_spacing():
    W = DirectionSet(np.array([[1.0, 0.0]]))
    g = per_direction_grid(EDGE, W, 3)
    assert g.strategy == "per_direction"
    assert g.values[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert not g.degenerate.any()


def test_per_direction_grid_degenerate_column():
    W = DirectionSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    g = per_direction_grid(EDGE, W, 4)
    assert g.degenerate.tolist() == [False, True]
    assert g.values[:, 1].tolist() == [0.0] * 4
    M = ect(EDGE, W, g)
    assert M.values[:, 1].tolist() == [1] * 4


def test_per_direction_grid_on_circle_and_last_row(make_complex):
    theta = np.linspace(0, 2 * np.pi, 13)[:-1]
    K = from_point_cloud(np.column_stack([np.cos(theta), np.sin(theta)]))
    W = sample_directions_uniform(10, 2, seed=1)
    g = per_direction_grid(K, W, 8)
    assert np.all(np.abs(g.values) <= 1.0 + 1e-15)
    K = make_complex(21)
    M = ect(K, W, per_direction_grid(K, W, 8))
    assert M.values[-1].tolist() == [euler_characteristic(K)] * 10


def test_shared_range_grid(make_complex):
    K = make_complex(2)
    W = sample_directions_uniform(5, 2, seed=2)
    g = per_direction_grid(K, W, 6, shared_range=True)
    H = K.coordinates @ W.vectors.T
    assert g.strategy == "global"
    assert g.values[0] == H.min() and g.values[-1] == H.max()


def test_ect_rejects_grid_mismatch(make_complex):
    K = make_complex(0)
    W = sample_directions_uniform(3, 2, seed=0)
    g = per_direction_grid(K, sample_directions_uniform(4, 2, seed=0), 5)
    with pytest.raises(ValueError):
        ect(K, W, g)


def _matrix(values):
    W = DirectionSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    return EctMatrix(np.asarray(values), W, ThresholdGrid.linear(2))


def test_distance_examples():
    A = _matrix([[1, 2], [3, 4]])
    assert ect_distance(A, A) == 0.0
    assert ect_distance(A, _matrix([[2, 3], [4, 5]])) == 1.0
    # diffs 1, 0, -2, 3 -> (1 + 0 + 4 + 9) / 4
    assert ect_distance(A, _matrix([[0, 2], [5, 1]])) == 3.5


def test_distance_rejects_mismatched_metadata():
    A = _matrix([[1, 2], [3, 4]])
    other_dirs = EctMatrix(A.values, DirectionSet(np.array([[0.0, 1.0], [1.0, 0.0]])), A.thresholds)
    with pytest.raises(ValueError, match="directions"):
        ect_distance(A, other_dirs)
    other_grid = EctMatrix(A.values, A.directions, ThresholdGrid.linear(2, -2, 2))
    with pytest.raises(ValueError, match="grid"):
        ect_distance(A, other_grid)


def test_normalize_columns():
    out = normalize_columns([[0, 5], [2, 5], [4, 5]])
    assert out[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert out[:, 1].tolist() == [0.0, 0.0, 0.0]


def test_injectivity_smoke():
    square = from_point_cloud([[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]])
    kite = from_point_cloud([[0.0, 0.9], [-0.3, 0.0], [0.0, -0.5], [0.3, 0.0]])
    W = sample_directions_uniform(16, 2, seed=0)
    grid = ThresholdGrid.linear(32)
    assert ect_distance(ect(square, W, grid), ect(kite, W, grid)) > 0


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fixture_padding_endpoints(seed):
    r = np.random.default_rng(seed)
    K = random_complex(r, int(r.integers(1, 10)))
    W = sample_directions_uniform(4, 2, seed=seed)
    H = all_heights(K, W)
    grid = ThresholdGrid("global", np.array([H.min() - 1.0, H.min() - 1e-6, H.max() + 1e-6, H.max() + 1.0]))
    M = ect(K, W, grid).values
    assert M[:2].tolist() == [[0] * 4] * 2
    assert M[2:].tolist() == [[euler_characteristic(K)] * 4] * 2


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_column_permutation(seed):
    r = np.random.default_rng(seed)
    K = random_complex(r, 7)
    W = sample_directions_uniform(6, 2, seed=seed)
    perm = r.permutation(6)
    grid = ThresholdGrid.linear(20, -1.5, 1.5)
    a = ect(K, W, grid).values
    b = ect(K, DirectionSet(W.vectors[perm]), grid).values
    assert np.array_equal(a[:, perm], b)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=40))
def test_refinement_keeps_shared_values(seed, l):
    r = np.random.default_rng(seed)
    K = random_complex(r, 7)
    W = sample_directions_uniform(3, 2, seed=seed)
    coarse = ThresholdGrid.linear(l, -1.5, 1.5)
    fine = ThresholdGrid("global", np.sort(np.concatenate([coarse.values, (coarse.values[1:] + coarse.values[:-1]) / 2])))
    a = ect(K, W, coarse).values
    b = ect(K, W, fine).values
    assert np.array_equal(a, b[::2])


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rotation_equivariance(seed):
    r = np.random.default_rng(seed)
    d = int(r.integers(2, 4))
    K = random_complex(r, 8, d=d)
    W = sample_directions_uniform(5, d, seed=seed)
    R = ortho_group.rvs(d, random_state=r)
    grid = ThresholdGrid("global", off_tie_thresholds(r, all_heights(K, W), 24, gap=1e-6))
    a = ect(K, W, grid).values
    b = ect(K.with_coordinates(K.coordinates @ R.T), DirectionSet(W.vectors @ R.T), grid).values
    assert np.array_equal(a, b)
