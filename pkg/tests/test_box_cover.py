import json
import math

import numpy as np
import pytest

from spinfractal import (
    DegenerateInputError,
    DistanceMatrix,
    NetworkSpec,
    SpecError,
    ball,
    box_measures,
    build_network,
    distance_matrix,
    exact_min_cover,
    greedy_cover,
    radius_grid,
)
from spinfractal.box_cover import _log_subsample, validate_covering, write_covering_dump
from spinfractal import _covercore_py

try:
    from spinfractal import _covercore
except ImportError:
    _covercore = None


def matrix_from_distances(d):
    d = np.asarray(d, dtype=float)
    p = np.exp(-d)
    np.fill_diagonal(p, 1.0)
    return DistanceMatrix(n=d.shape[0], d=d, p=p, metadata={})


def three_node_example():
    # d(1,2) = 0.1, d(2,3) = 0.1, d(1,3) = 0.5
    return matrix_from_distances([[0.0, 0.1, 0.5], [0.1, 0.0, 0.1], [0.5, 0.1, 0.0]])


def random_semimetric(rng, n):
    d = rng.uniform(0.05, 1.0, (n, n))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return matrix_from_distances(d)


def test_radius_grid_chain3():
    dist = distance_matrix(build_network(NetworkSpec("chain", 3)))
    grid = radius_grid(dist)
    assert len(grid.radii) == 1
    assert grid.radii[0] == pytest.approx(math.log(2), rel=1e-12)
    assert grid.source == "all_unique"


def test_radius_grid_dedup():
    grid = radius_grid(three_node_example())
    assert np.array_equal(grid.radii, [0.1, 0.5])


def test_radius_grid_degenerate():
    with pytest.raises(DegenerateInputError):
        radius_grid(matrix_from_distances(np.zeros((3, 3))))


def test_log_subsample_million_values():
    vals = np.arange(1, 1_000_001) / 1e6
    sub = _log_subsample(vals, 64)
    assert len(sub) == 64
    assert sub[0] == vals[0] and sub[-1] == vals[-1]
    assert np.all(np.diff(sub) > 0)
    assert np.isin(sub, vals).all()


def test_radius_grid_subsample_end_to_end():
    rng = np.random.default_rng(3)
    dist = random_semimetric(rng, 40)
    full = radius_grid(dist)
    sub = radius_grid(dist, max_points=16)
    assert sub.source == "quantile_subsample"
    assert len(sub.radii) == 16
    assert sub.radii[0] == full.radii[0] and sub.radii[-1] == full.radii[-1]
    assert np.isin(sub.radii, full.radii).all()


def test_ball_examples():
    dist = three_node_example()
    assert set(ball(dist, 1, 0.0)) == {1}
    assert set(ball(dist, 1, 0.5)) == {1, 2, 3}
    chain3 = distance_matrix(build_network(NetworkSpec("chain", 3)))
    assert set(ball(chain3, 1, 0.7)) == {1, 2, 3}  # d(1,2) = ln 2 <= 0.7, d(1,3) = 0
    with pytest.raises(SpecError):
        ball(dist, 4, 0.1)
    with pytest.raises(SpecError):
        ball(dist, 1, -0.1)


def test_greedy_trivial_cases():
    rng = np.random.default_rng(5)
    dist = random_semimetric(rng, 9)
    big = greedy_cover(dist, float(dist.d.max()))
    assert big.n_boxes == 1
    small = greedy_cover(dist, float(dist.d[dist.d > 0].min()) / 2)
    assert small.n_boxes == 9
    assert np.all(small.sizes == 1)


def test_greedy_three_node_example():
    cover = greedy_cover(three_node_example(), 0.1)
    assert cover.n_boxes == 1
    assert cover.centers.tolist() == [1]  # 0-based: node 2
    assert cover.boxes[0].center == 2
    assert cover.boxes[0].members.tolist() == [1, 2, 3]


def test_exact_min_cover_examples():
    dist = three_node_example()
    assert exact_min_cover(dist, 0.5) == 1
    assert exact_min_cover(dist, 0.1) == 1
    isolated = matrix_from_distances(np.ones((4, 4)) - np.eye(4))
    assert exact_min_cover(isolated, 0.5) == 4
    with pytest.raises(SpecError):
        exact_min_cover(matrix_from_distances(np.zeros((16, 16))), 0.1)


def test_validity_and_oracle_small_random():
    # greedy counts themselves are not monotone in eps (a denser threshold
    # graph can mislead max-coverage greedy); the exact minimum is
    rng = np.random.default_rng(17)
    for _ in range(30):
        n = int(rng.integers(4, 13))
        dist = random_semimetric(rng, n)
        grid = radius_grid(dist)
        last_exact = None
        for eps in grid.radii:
            cover = greedy_cover(dist, float(eps))
            validate_covering(dist, cover)
            exact = exact_min_cover(dist, float(eps))
            assert cover.n_boxes >= exact
            if last_exact is not None:
                assert exact <= last_exact
            last_exact = exact


def test_zero_distance_pair_always_shares_a_box():
    dist = distance_matrix(build_network(NetworkSpec("chain", 3)))  # d(1,3) = 0
    for eps in radius_grid(dist).radii:
        cover = greedy_cover(dist, float(eps))
        assert cover.assignment[0] == cover.assignment[2]


def test_determinism():
    rng = np.random.default_rng(23)
    dist = random_semimetric(rng, 25)
    eps = float(np.median(dist.d[dist.d > 0]))
    a = greedy_cover(dist, eps)
    b = greedy_cover(dist, eps)
    assert np.array_equal(a.assignment, b.assignment)
    assert np.array_equal(a.centers, b.centers)


@pytest.mark.skipif(_covercore is None, reason="compiled kernel not built")
def test_kernel_equivalence_compiled_vs_python():
    rng = np.random.default_rng(29)
    for _ in range(120):
        n = int(rng.integers(2, 40))
        d = rng.uniform(0.0, 1.0, (n, n))
        d = (d + d.T) / 2.0
        np.fill_diagonal(d, 0.0)
        eps = float(rng.choice(d[np.triu_indices(n, 1)])) if n > 1 else 0.5
        adj = d <= eps
        a1, c1 = _covercore.greedy_assign(adj)
        a2, c2 = _covercore_py.greedy_assign(adj)
        assert np.array_equal(a1, a2)
        assert np.array_equal(c1, c2)


def test_box_measures_arithmetic():
    rng = np.random.default_rng(31)
    dist = random_semimetric(rng, 6)
    one = box_measures(greedy_cover(dist, float(dist.d.max())), 6)
    assert one.measures.tolist() == [1.0]
    tiny = box_measures(greedy_cover(dist, 1e-6), 6)
    assert tiny.measures.tolist() == [1 / 6] * 6
    # boxes of sizes {2, 1} over n = 3
    pair_split = matrix_from_distances([[0.0, 0.1, 0.5], [0.1, 0.0, 0.5], [0.5, 0.5, 0.0]])
    m2 = box_measures(greedy_cover(pair_split, 0.1), 3)
    assert sorted(m2.measures.tolist()) == [1 / 3, 2 / 3]
    assert m2.sizes.sum() == 3


def test_covering_dump(tmp_path):
    dist = three_node_example()
    covers = [greedy_cover(dist, e) for e in (0.1, 0.5)]
    path = tmp_path / "coverings.json"
    write_covering_dump(covers, path)
    doc = json.loads(path.read_text())
    assert [c["radius"] for c in doc] == [0.1, 0.5]
    assert all(c["box_count"] == len(c["box_sizes"]) for c in doc)


def test_greedy_rejects_bad_radius():
    with pytest.raises(SpecError):
        greedy_cover(three_node_example(), 0.0)
    with pytest.raises(SpecError):
        radius_grid(three_node_example(), max_points=1)
