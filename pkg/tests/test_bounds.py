import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from infoloss.bounds import (
    extremal_pmf,
    f1,
    f_min_mi,
    f_min_mi_bruteforce,
    i_loss_bruteforce,
    i_loss_lower_bound,
    max_entropy_inequality_check,
    theorem2_check,
)
from infoloss.finite_info import (
    DomainError,
    Pmf,
    ValidationError,
    bayes_error,
    entropy,
    prior_error,
)
from infoloss.verify import random_cells, random_joint

pmfs = arrays(np.float64, st.integers(2, 6), elements=st.floats(1e-3, 1.0)).map(lambda a: a / a.sum())


class TestExtremalPmf:
    def test_trivial_regime_keeps_mu(self):
        r = extremal_pmf(Pmf.uniform(2), 0.5)
        assert r.pmf_out == Pmf.uniform(2)
        assert r.eps_bar == 0.0

    def test_three_labels(self):
        r = extremal_pmf([0.5, 0.3, 0.2], 0.3)
        assert np.allclose(r.pmf_out.probs, [0.7, 0.15, 0.15], atol=1e-12)
        assert (r.K, r.theta) == (3, pytest.approx(0.15))

    def test_two_labels(self):
        r = extremal_pmf([0.6, 0.4], 0.1)
        assert np.allclose(r.pmf_out.probs, [0.9, 0.1], atol=1e-12)
        assert (r.K, r.theta) == (2, pytest.approx(0.1))

    def test_keeps_caller_order(self):
        r = extremal_pmf([0.2, 0.5, 0.3], 0.3)
        assert np.allclose(r.pmf_out.probs, [0.15, 0.7, 0.15], atol=1e-12)

    def test_ties_break_to_smallest_label(self):
        r = extremal_pmf([0.4, 0.4, 0.2], 0.5)
        assert r.pmf_out.probs[0] == pytest.approx(0.5)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            extremal_pmf([0.6, 0.4], 0.5)
        with pytest.raises(DomainError):
            extremal_pmf([0.6, 0.4], -0.1)

    @given(pmfs, st.floats(0.0, 1.0))
    def test_waterfilling_invariants(self, mu, frac):
        eps = frac * prior_error(mu)
        r = extremal_pmf(mu, eps)
        s = mu[r.order]
        out = r.pmf_out.probs[r.order]
        K, theta = r.K, r.theta
        assert out[0] == pytest.approx(s[0] + r.eps_bar, abs=1e-10)
        if r.eps_bar > 0:
            assert np.sum(s[1:K] - theta) == pytest.approx(r.eps_bar, abs=1e-10)
            assert np.allclose(out[1:K], theta, atol=1e-10)
            assert theta < s[K - 1] + 1e-12
            if K < s.size:
                assert theta >= s[K] - 1e-12
        assert np.allclose(out[K:], s[K:], atol=1e-12)
        assert out.sum() == pytest.approx(1.0, abs=1e-12)


class TestFMinMI:
    def test_trivial_regime(self):
        assert f_min_mi(Pmf.uniform(4), 0.75) == 0.0

    def test_frozen_values(self):
        # entropy differences computed directly with the math module
        assert f_min_mi([0.5, 0.3, 0.2], 0.3) == pytest.approx(0.21084455784169664, abs=1e-12)
        assert f_min_mi([0.6, 0.4], 0.1) == pytest.approx(0.3479286936178083, abs=1e-12)

    @pytest.mark.parametrize("mu,eps", [((0.5, 0.5), 0.25), ((0.7, 0.3), 0.1), ((0.9, 0.1), 0.05)])
    def test_matches_channel_grid(self, mu, eps):
        bf = f_min_mi_bruteforce(mu, eps, grid=2000)
        assert bf == pytest.approx(f_min_mi(mu, eps), abs=1e-3)
        assert bf >= f_min_mi(mu, eps) - 1e-9

    def test_channel_grid_trivial(self):
        assert f_min_mi_bruteforce((0.5, 0.5), 0.5, grid=2000) == pytest.approx(0.0, abs=1e-9)

    def test_channel_grid_domain(self):
        with pytest.raises(DomainError):
            f_min_mi_bruteforce((0.2, 0.3, 0.5), 0.1)
        with pytest.raises(DomainError):
            f_min_mi_bruteforce((0.7, 0.3), 0.4)

    @given(pmfs, st.floats(0.0, 0.999))
    def test_positive_below_prior_error(self, mu, frac):
        prior = prior_error(mu)
        assume(prior > 1e-6)
        assert f_min_mi(mu, frac * prior) > 0

    @settings(max_examples=50)
    @given(pmfs)
    def test_non_increasing_in_eps(self, mu):
        grid = np.linspace(0, prior_error(mu), 25)
        vals = [f_min_mi(mu, e) for e in grid]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        hs = [entropy(extremal_pmf(mu, e).pmf_out) for e in grid]
        assert all(a <= b + 1e-12 for a, b in zip(hs, hs[1:]))


class TestClosedFormBound:
    def test_f1_decreasing(self):
        assert f1(0.1, 0.2) > f1(0.3, 0.2)

    def test_f1_vanishing_eps(self):
        assert f1(0.5, 1e-9) < 1e-7

    def test_f1_frozen(self):
        assert f1(0.25, 0.1) == pytest.approx(0.02086415329456448, abs=1e-12)

    def test_f1_domain(self):
        with pytest.raises(DomainError):
            f1(0.0, 0.1)

    def test_lower_bound_frozen(self):
        assert i_loss_lower_bound(0.2, 2) == pytest.approx(0.08228287850505181, abs=1e-12)

    def test_lower_bound_vanishing_eps(self):
        assert i_loss_lower_bound(1e-9, 4) < 1e-7

    @given(st.integers(2, 10), st.floats(1e-4, 0.999))
    def test_lower_bound_positive(self, M, frac):
        eps = frac * min(1 - 1 / M, 0.5)
        assume(0.5 - eps / (M - 1) > 1e-9)
        assert i_loss_lower_bound(eps, M) > 0

    def test_lower_bound_inapplicable_corner(self):
        with pytest.raises(DomainError):
            i_loss_lower_bound(0.5, 2)
        with pytest.raises(DomainError):
            i_loss_lower_bound(0.6, 4)


class TestILossBruteforce:
    @pytest.mark.parametrize("eps,expected", [
        (0.05, 0.00500836684635686), (0.1, 0.020135513550688766),
        (0.2, 0.08228287850505178), (0.3, 0.19274475702175742)])
    def test_two_labels_match_line_search(self, eps, expected):
        # expected: min over p in [1/2, 1-eps] of h(p) - h(p+eps) on a 20001-point line
        assert i_loss_bruteforce(eps, 2, 400) == pytest.approx(expected, abs=2e-4)

    def test_uniform_boundary(self):
        val = i_loss_bruteforce(2 / 3, 3, 60)
        r = extremal_pmf(Pmf.uniform(3), 0.0)
        assert val == pytest.approx(math.log(3) - entropy(r.pmf_out), abs=1e-12)

    def test_above_lower_bound(self):
        assert i_loss_bruteforce(0.1, 3, 200) >= i_loss_lower_bound(0.1, 3)

    def test_domain(self):
        with pytest.raises(DomainError):
            i_loss_bruteforce(0.8, 4, 100)
        with pytest.raises(DomainError):
            i_loss_bruteforce(0.1, 5, 100)


class TestEntropyInequality:
    def test_symmetric_case(self):
        eps, K, theta = 0.09, 4, 0.1
        mu = [1 - (K - 1) * (theta + eps / (K - 1))] + [theta + eps / (K - 1)] * (K - 1)
        c = max_entropy_inequality_check(mu, eps)
        assert c.holds and c.K == K
        assert c.theta == pytest.approx(theta)

    def test_two_label_equality(self):
        c = max_entropy_inequality_check([0.7, 0.3], 0.1)
        assert c.K == 2
        assert c.slack == pytest.approx(0.0, abs=1e-15)

    @given(pmfs, st.floats(1e-4, 1.0))
    def test_random(self, mu, frac):
        prior = prior_error(mu)
        assume(prior > 1e-6)
        assert max_entropy_inequality_check(mu, frac * prior).holds


class TestCellGapBound:
    def test_lossless_partition(self):
        mass = np.array([[0.2, 0.1], [0.05, 0.3], [0.25, 0.1]])
        r = theorem2_check(mass, [[0], [1], [2]])
        assert r.wil == pytest.approx(0, abs=1e-15)
        assert r.ol == pytest.approx(0, abs=1e-15)
        assert r.bound == pytest.approx(0, abs=1e-15)

    def test_single_cell(self):
        mass = np.array([[0.3, 0.05], [0.05, 0.3], [0.2, 0.1]])
        r = theorem2_check(mass, [[0, 1, 2]])
        assert r.ol == pytest.approx(prior_error(mass.sum(0)) - bayes_error(mass), abs=1e-15)
        assert r.ol > 0 and r.bound > 0
        assert r.holds()

    def test_rejects_non_partition(self):
        with pytest.raises(ValidationError):
            theorem2_check(np.eye(3) / 3, [[0, 1], [1, 2]])
        with pytest.raises(ValidationError):
            theorem2_check(np.eye(3) / 3, [[0], [2]])

    @settings(max_examples=150)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        mass = random_joint(rng)
        r = theorem2_check(mass, random_cells(rng, mass.shape[0]))
        assert r.holds(1e-10)
        assert r.ol == pytest.approx(r.ol_decomposed, abs=1e-12)
        assert r.wil == pytest.approx(r.wil_decomposed, abs=1e-12)
        if r.ol > 1e-9:
            assert r.wil > 0
