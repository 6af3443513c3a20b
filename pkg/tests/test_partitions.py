import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infoloss import partitions as P
from infoloss.finite_info import DomainError, ValidationError
from infoloss.models import ScaleInvariant, TwoClass1D, build, mpe_rule, sample
from infoloss.verify import count_audit, median_audit, membership_audit

# quarter-integers land exactly on many cell boundaries
coord = st.one_of(st.floats(-6, 6, allow_nan=False), st.integers(-24, 24).map(lambda i: i / 4))
batches = arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)), elements=coord)


def data(n, seed=0):
    return sample(build(ScaleInvariant()), n, seed, tag="test/construct").points


class TestQuadrant:
    def test_labels_on_axes(self):
        q = P.QuadrantPartition()
        X = np.array([[0, 0], [-1, 0], [0, 1], [0, -1], [-1, -1], [1, -1], [2, 3]], dtype=float)
        assert q.quantize(X).tolist() == [1, 2, 1, 3, 3, 4, 1]

    def test_single_point_gives_int(self):
        assert P.quantize(P.QuadrantPartition(), (1.0, 1.0)) == 1

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.QuadrantPartition(), X)


class TestProductPartition:
    @pytest.mark.parametrize("m,d", [(1, 1), (1, 2), (2, 2), (3, 1)])
    def test_size(self, m, d):
        assert P.product_partition(m, d).size == (2 * m * 2 ** m) ** d + 1

    def test_dyadic_index(self):
        p = P.product_partition(2, 2)
        assert P.dyadic_index(p, [[0.3, -0.7]]).tolist() == [[1, -3]]
        assert P.dyadic_index(p, [[0.0, 1.99]]).tolist() == [[0, 7]]

    def test_outside_cell(self):
        p = P.product_partition(1, 2)
        assert p.quantize((5.0, 5.0)) == 0
        assert p.quantize((1.0, 0.0)) == 0  # [-1, 1) is half open
        assert p.quantize((-1.0, -1.0)) != 0

    def test_overflow(self):
        with pytest.raises(DomainError):
            P.product_partition(6, 12)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            P.product_partition(0, 2)

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.product_partition(2, 2), X)

    @given(batches, st.floats(0.5, 7.0), st.integers(1, 12))
    def test_uniform_grid_membership(self, X, bound, per_axis):
        assert membership_audit(P.uniform_grid(bound, per_axis, 2), X)

    def test_uniform_grid_nests(self):
        coarse, fine = P.uniform_grid(4.0, 4, 2), P.uniform_grid(4.0, 8, 2)
        X = data(2000)
        cid, fid = coarse.quantize(X), fine.quantize(X)
        for f in np.unique(fid):
            assert np.unique(cid[fid == f]).size == 1


class TestGessaman:
    def test_cells_per_axis(self):
        assert P.gessaman_cells_per_axis(1000, 10, 2) == 10
        assert P.gessaman_cells_per_axis(999, 10, 2) == 9
        assert P.gessaman_cells_per_axis(80, 10, 3) == 2

    def test_equal_counts(self):
        g = P.gessaman(data(2000), 20)
        assert g.size == 100
        assert g.cell_counts().tolist() == [20] * 100

    def test_counts_match_quantize(self):
        X = data(1500)
        g = P.gessaman(X, 15)
        assert np.array_equal(np.bincount(g.quantize(X), minlength=g.size), g.cell_counts())

    @settings(max_examples=40, deadline=None)
    @given(st.integers(20, 600), st.integers(1, 40), st.integers(0, 1000))
    def test_count_audit(self, n, l_n, seed):
        if n < l_n:
            return
        g = P.gessaman(data(n, seed), l_n)
        assert count_audit(g)
        assert g.cell_counts().sum() == n

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.gessaman(data(400), 10), X)

    def test_identical_points(self):
        g = P.gessaman(np.ones((40, 2)), 4)
        assert g.size == g.T ** 2
        assert g.cell_counts()[0] == 40

    def test_too_few_points(self):
        with pytest.raises(ValidationError):
            P.gessaman(data(5), 10)

    def test_one_dimension(self):
        x = np.arange(100, dtype=float)
        g = P.gessaman(x, 10)
        assert g.size == 10
        assert g.quantize(np.array([[9.0], [9.5], [10.0]])).tolist() == [0, 1, 1]


class TestTsp:
    def test_median_splits(self):
        t = P.tsp(data(1000), 20)
        assert median_audit(t)
        assert count_audit(t)
        assert t.size == len(t.cells())

    def test_leaf_count_power_of_two(self):
        t = P.tsp(data(640), 20)
        assert t.size == 32
        assert t.depth == 5

    def test_counts_match_quantize(self):
        X = data(1000)
        t = P.tsp(X, 25)
        assert np.array_equal(np.bincount(t.quantize(X), minlength=t.size), t.cell_counts())

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 600), st.integers(1, 40), st.integers(0, 1000))
    def test_count_audit(self, n, l_n, seed):
        t = P.tsp(data(n, seed), l_n)
        if n >= l_n:
            assert count_audit(t)
        assert median_audit(t)
        assert t.cell_counts().sum() == n

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.tsp(data(500), 12), X)

    def test_identical_points_stop(self):
        assert P.tsp(np.zeros((30, 2)), 3).size == 1


class TestAsymmetric:
    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_size(self, depth):
        p = P.asymmetric_dyadic(depth)
        assert p.size == P.asymmetric_size(depth) == 4 * (4 ** depth + 3) == len(p.cells())

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.asymmetric_dyadic(2, 0.75), X)

    @given(batches)
    def test_refines_quadrants(self, X):
        p = P.asymmetric_dyadic(2)
        assert np.array_equal(p.quantize(X) // p.per_quadrant + 1, P.QuadrantPartition.label(X))

    def test_invalid(self):
        with pytest.raises(ValidationError):
            P.asymmetric_dyadic(0)
        with pytest.raises(ValidationError):
            P.asymmetric_dyadic(1, -1.0)


class TestIntervalPartitions:
    def test_linear_edges(self):
        p = P.projected_uniform((1.0, 0.0), (-3.0, 3.0), 5)
        assert p.edges.tolist() == [-3.0, -1.0, 1.0, 3.0]
        assert p.size == 5

    def test_radial_edges(self):
        p = P.projected_uniform((1.0, 1.0), (0.0, 3.0), 4, radial=True)
        assert np.allclose(p.edges, [1.0, 2.0, 3.0])
        assert p.quantize((0.0, 0.5)) == 0
        assert p.quantize((3.0, 4.0)) == 3

    def test_direction_is_normalized(self):
        p = P.projected_uniform((0.0, 2.0), (-1.0, 1.0), 3)
        assert p.quantize((100.0, 0.2)) == 1

    @given(batches)
    def test_membership(self, X):
        assert membership_audit(P.projected_uniform((1.0, 2.0), (-2.0, 2.0), 6), X)
        assert membership_audit(P.projected_uniform((1.0, 1.0), (0.0, 4.0), 6, radial=True), X)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            P.projected_uniform((1.0, 0.0), (1.0, 1.0), 4)
        with pytest.raises(ValidationError):
            P.projected_uniform((0.0, 0.0), (0.0, 1.0), 4)
        with pytest.raises(ValidationError):
            P.projected_uniform((1.0, 0.0), (-1.0, 1.0), 1)

    @pytest.mark.parametrize("i", [1, 5, 12])
    def test_three_cells_closed_middle(self, i):
        h = 2.0 ** -i
        p = P.three_cell_partition(i)
        x = np.array([-h * 1.5, -h, 0.0, h, h * 1.5])
        assert p.quantize(x).tolist() == [0, 1, 1, 1, 2]
        assert membership_audit(p, x[:, None])


class TestRefinement:
    def test_split_ids(self):
        m = build(TwoClass1D())
        base = P.three_cell_partition(1)
        r = P.refine_with_rule(base, lambda X: mpe_rule(m, X), 2)
        x = np.array([[-3.0], [-0.1], [0.1], [3.0]])
        cells, labels = r.split_ids(r.quantize(x))
        assert cells.tolist() == base.quantize(x).tolist()
        assert labels.tolist() == [2, 2, 1, 1]

    def test_probe_size(self):
        m = build(ScaleInvariant())
        r = P.refine_with_rule(P.ConstantPartition(2), lambda X: mpe_rule(m, X), 4, probe=data(500))
        assert r.size == 4

    def test_diameters_from_base(self):
        base = P.three_cell_partition(2)
        r = P.refine_with_rule(base, lambda X: np.ones(len(X), dtype=int), 2)
        ids = r.quantize(np.array([[0.0]]))
        assert r.diameters(ids)[0] == pytest.approx(0.5)


class TestDiagnostics:
    def test_constant_is_all_wide(self):
        assert P.shrink_diagnostic(P.ConstantPartition(2), data(100), 1.0) == 1.0

    def test_fine_grid_is_narrow(self):
        X = np.random.default_rng(0).uniform(-1, 1, (500, 2))
        assert P.shrink_diagnostic(P.uniform_grid(2.0, 40, 2), X, 0.2) == 0.0

    def test_bad_delta(self):
        with pytest.raises(ValidationError):
            P.shrink_diagnostic(P.ConstantPartition(1), [[0.0]], 0.0)

    def test_to_dict_is_json(self):
        for p in (P.product_partition(1, 2), P.gessaman(data(200), 10), P.tsp(data(200), 10),
                  P.asymmetric_dyadic(1), P.projected_uniform((1.0, 0.0), (0.0, 1.0), 3),
                  P.ConstantPartition(2), P.three_cell_partition(3)):
            d = json.loads(json.dumps(p.to_dict(), allow_nan=False))
            assert d["size"] == p.size == len(d["cells"])

    def test_dimension_check(self):
        with pytest.raises(ValidationError):
            P.QuadrantPartition().quantize(np.zeros((2, 3)))

    def test_diameters(self):
        g = P.uniform_grid(1.0, 2, 2)
        assert g.diameters([0, 1]).tolist() == [math.inf, pytest.approx(math.sqrt(2))]
