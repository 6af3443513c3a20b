import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infoloss import partitions as P
from infoloss.estimators import (
    CSV_FIELDS,
    EstimatorConfig,
    EvalContext,
    aux_grid_ids,
    build_scheme,
    cell_map_labels,
    empirical_mi_true,
    evaluate_partition,
    info_loss,
    loss_curve,
    normalize_scheme,
    op_loss,
    plugin_mi,
    plugin_mi_from_ids,
    plugin_terms,
    predict_from_cells,
    projected_info_loss,
    tsp_sample_size,
    weak_info_loss,
)
from infoloss.finite_info import DomainError, ValidationError
from infoloss.models import (
    LabeledDataset,
    RotationInvariant,
    ScaleInvariant,
    TranslationInvariant,
    TwoClass1D,
    build,
    mi_mc,
    sample,
)

SMALL = EstimatorConfig(n_eval=2000, n_cal=4000, seed=11)
id_label_pairs = st.integers(1, 60).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 6), min_size=n, max_size=n),
    st.lists(st.integers(1, 3), min_size=n, max_size=n)))


class TestPlugin:
    def test_hand_dataset(self):
        # counts [[2, 1], [1, 2]] over six points; summed by hand with math.log
        ds = LabeledDataset(np.array([0, 0, 0, 1, 1, 1.0]), [1, 1, 2, 2, 2, 1])
        assert plugin_mi(ds, lambda X: X[:, 0]) == pytest.approx(0.056633012265132426, abs=1e-12)

    @given(id_label_pairs)
    def test_terms_average_to_mi(self, pair):
        ids, labels = pair
        assert np.mean(plugin_terms(ids, labels)) == pytest.approx(
            plugin_mi_from_ids(ids, labels), abs=1e-12)

    @given(id_label_pairs)
    def test_relabeling_ids_changes_nothing(self, pair):
        ids, labels = pair
        shuffled = [7 * i + 100 for i in ids]
        assert plugin_mi_from_ids(shuffled, labels) == pytest.approx(
            plugin_mi_from_ids(ids, labels), abs=1e-12)

    @given(id_label_pairs, st.data())
    def test_refining_never_loses(self, pair, data):
        ids, labels = pair
        extra = data.draw(st.lists(st.integers(0, 2), min_size=len(ids), max_size=len(ids)))
        finer = [10 * i + e for i, e in zip(ids, extra)]
        assert plugin_mi_from_ids(finer, labels) >= plugin_mi_from_ids(ids, labels) - 1e-12

    def test_constant_cell_keeps_nothing(self):
        m = build(ScaleInvariant())
        ds = sample(m, 3000, 1)
        assert plugin_mi(ds, P.ConstantPartition(2)) == pytest.approx(0.0, abs=1e-15)
        assert info_loss(m, ds, P.ConstantPartition(2)) == pytest.approx(empirical_mi_true(m, ds))

    def test_true_mi_consistent(self):
        m = build(ScaleInvariant())
        est, se = mi_mc(m, 20_000, 4)
        assert empirical_mi_true(m, sample(m, 20_000, 4, tag="mi")) == pytest.approx(est)
        assert 0 < est < math.log(4) and se > 0


class TestOperationLoss:
    def test_optimal_cells_have_zero_loss(self):
        m = build(ScaleInvariant())
        cal, ev = sample(m, 5000, 1, "cal"), sample(m, 5000, 1, "eval")
        assert op_loss(m, cal, ev, P.QuadrantPartition()) == 0.0

    def test_constant_cell_loses_the_prior_gap(self):
        m = build(ScaleInvariant())
        cal, ev = sample(m, 5000, 1, "cal"), sample(m, 20_000, 1, "eval")
        # predicting one label is right a quarter of the time
        assert op_loss(m, cal, ev, P.ConstantPartition(2)) == pytest.approx(0.75 - 0.129, abs=0.02)

    def test_unseen_cells_fall_back_to_majority(self):
        uniq, labels, fallback = cell_map_labels(np.array([3, 3, 5]), np.array([2, 2, 1]), 2)
        assert uniq.tolist() == [3, 5] and labels.tolist() == [2, 1] and fallback == 2
        pred = predict_from_cells(np.array([3, 4, 5, 9]), uniq, labels, fallback)
        assert pred.tolist() == [2, 2, 1, 2]


class TestWeakAndProjected:
    def test_optimal_cells_have_zero_weak_loss(self):
        m = build(ScaleInvariant())
        ds = sample(m, 3000, 2)
        assert weak_info_loss(m, ds, P.QuadrantPartition()) == pytest.approx(0.0, abs=1e-15)

    def test_weak_loss_non_negative(self):
        m = build(ScaleInvariant())
        ds = sample(m, 3000, 2)
        for p in (P.ConstantPartition(2), P.uniform_grid(4, 3, 2), P.asymmetric_dyadic(1)):
            assert weak_info_loss(m, ds, p) >= 0

    def test_aux_grid(self):
        t = np.linspace(0, 1, 10_001)
        ids = aux_grid_ids(t, 10)
        assert ids.min() == 0 and ids.max() == 11
        assert np.all(np.diff(ids) >= 0)
        assert aux_grid_ids(np.ones(5), 10).tolist() == [0] * 5

    def test_projected_loss_small_for_the_projection_itself(self):
        k = TranslationInvariant()
        m = build(k)
        ds = sample(m, 5000, 3)
        fine = build_scheme(m, {"name": "projected"}, 200, 3)
        coarse = P.ConstantPartition(2)
        assert projected_info_loss(m, ds, coarse) > projected_info_loss(m, ds, fine) >= 0

    def test_projection_required(self):
        with pytest.raises(DomainError):
            projected_info_loss(build(ScaleInvariant()), sample(build(ScaleInvariant()), 10, 1),
                                P.ConstantPartition(2))


class TestSchemes:
    @pytest.mark.parametrize("k", [10, 50, 200])
    def test_sizes_near_target(self, k):
        m = build(ScaleInvariant())
        for name, tol in (("product", 0.1), ("gessaman", 0.1), ("tsp", 0.25)):
            size = build_scheme(m, {"name": name}, k, 1).size
            assert abs(size - k) <= max(2, tol * k), (name, size)

    def test_tsp_sample_size(self):
        assert tsp_sample_size(1, 20) == 20
        assert tsp_sample_size(32, 20) >= 640

    def test_projected_needs_invariance(self):
        with pytest.raises(ValidationError):
            build_scheme(build(ScaleInvariant()), {"name": "projected"}, 10, 1)

    def test_asymmetric_needs_plane(self):
        with pytest.raises(ValidationError):
            build_scheme(build(TwoClass1D()), {"name": "asymmetric"}, 10, 1)

    def test_radial_projection(self):
        p = build_scheme(build(RotationInvariant()), {"name": "projected"}, 12, 1)
        assert p.direction is None and p.size == 12

    def test_unknown(self):
        with pytest.raises(ValidationError):
            normalize_scheme("random-forest")


class TestCurve:
    def test_deterministic(self):
        m = build(ScaleInvariant())
        a = loss_curve(m, "tsp", [10, 40], SMALL)
        b = loss_curve(m, "tsp", [10, 40], SMALL)
        assert [p.csv_row() for p in a] == [p.csv_row() for p in b]

    def test_shared_context_gives_same_result(self):
        m = build(ScaleInvariant())
        ctx = EvalContext.draw(m, SMALL)
        assert loss_curve(m, "gessaman", [16], SMALL, ctx) == loss_curve(m, "gessaman", [16], SMALL)

    def test_point_fields(self):
        m = build(TranslationInvariant())
        pts = loss_curve(m, "projected", [5, 20], SMALL)
        for p in pts:
            assert len(p.csv_row()) == len(CSV_FIELDS)
            assert p.se_il > 0 and p.se_ol >= 0 and p.se_pil is not None
            assert p.wil >= -1e-12 and p.pil >= -1e-12
            assert p.partition["size"] == p.k
        assert pts[1].il < pts[0].il

    def test_no_projection_column_without_invariance(self):
        p = loss_curve(build(ScaleInvariant()), "product", [10], SMALL)[0]
        assert p.pil is None and p.csv_row()[7] == ""

    def test_optimal_cells_lose_information_but_not_accuracy(self):
        m = build(ScaleInvariant())
        pt = evaluate_partition(EvalContext.draw(m, SMALL), P.QuadrantPartition(), "quadrant")
        assert pt.ol == 0.0 and pt.wil == pytest.approx(0.0, abs=1e-15)
        assert pt.il > 3 * pt.se_il

    @pytest.mark.parametrize("sizes", [[], [0, 5], [20, 10]])
    def test_bad_sizes(self, sizes):
        with pytest.raises(ValidationError):
            loss_curve(build(ScaleInvariant()), "product", sizes, SMALL)

    def test_bad_config(self):
        with pytest.raises(ValidationError):
            EstimatorConfig(n_eval=0)
        with pytest.raises(ValidationError):
            EstimatorConfig(aux_resolution=2)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10_000))
    def test_losses_shrink_on_refinement(self, seed):
        m = build(ScaleInvariant())
        ctx = EvalContext.draw(m, EstimatorConfig(2000, 2000, seed=seed))
        coarse = evaluate_partition(ctx, P.uniform_grid(6.0, 2, 2))
        fine = evaluate_partition(ctx, P.uniform_grid(6.0, 4, 2))
        assert fine.il <= coarse.il + 1e-12
