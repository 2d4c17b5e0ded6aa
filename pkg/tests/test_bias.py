import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from adte.bias import (
    BiasVector,
    MemoryBank,
    estimate_confusion,
    jacobi_prior,
    logit_adjust,
    q_profile_from_bias,
)
from adte.errors import InvalidConfigError, InvalidInputError


def stationary_oracle(a):
    """Direct linear solve of (A - I) p = 0 with the simplex constraint."""
    n = a.shape[0]
    lhs = np.vstack([a - np.eye(n), np.ones(n)])
    rhs = np.concatenate([np.zeros(n), [1.0]])
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return sol


def random_column_stochastic(rng, n):
    m = rng.uniform(size=(n, n))
    return m / m.sum(axis=0, keepdims=True)


class TestMemoryBank:
    def test_insert_and_eviction_order(self):
        bank = MemoryBank(num_classes=5, capacity_per_class=2)
        p1 = [0.1, 0.1, 0.1, 0.6, 0.1]
        p2 = [0.05, 0.05, 0.05, 0.8, 0.05]
        p3 = [0.0, 0.0, 0.0, 1.0, 0.0]
        bank.update(p1)
        assert [len(s) for s in bank.slots] == [0, 0, 0, 1, 0]
        bank.update(p2)
        bank.update(p3)
        slot = list(bank.slots[3])
        assert len(slot) == 2
        assert_array_equal(slot[0], p2)
        assert_array_equal(slot[1], p3)

    def test_argmax_tie_goes_to_lowest_index(self):
        bank = MemoryBank(2, 4)
        bank.update([0.5, 0.5])
        assert len(bank.slots[0]) == 1 and len(bank.slots[1]) == 0

    def test_never_exceeds_capacity_and_keeps_last_m(self):
        rng = np.random.default_rng(0)
        m = 3
        bank = MemoryBank(2, m)
        inserted = []
        for _ in range(10):
            head = rng.uniform(0.55, 0.95)
            p = np.array([head, 1 - head])
            inserted.append(p)
            bank.update(p)
        assert len(bank.slots[0]) == m
        assert_array_equal(np.array(bank.slots[0]), np.array(inserted[-m:]))

    def test_total_count(self):
        bank = MemoryBank(3, 2)
        assert bank.total_count == 0
        bank.update([0.6, 0.2, 0.2])
        bank.update([0.2, 0.6, 0.2])
        assert bank.total_count == 2

    def test_dimension_mismatch(self):
        bank = MemoryBank(3, 2)
        with pytest.raises(InvalidInputError):
            bank.update([0.5, 0.5])


class TestEstimateConfusion:
    def test_single_entry_and_empty_class(self):
        bank = MemoryBank(2, 4)
        bank.update([0.8, 0.2])
        conf = estimate_confusion(bank)
        assert_allclose(conf.a, [[0.8, 0.5], [0.2, 0.5]])
        assert_array_equal(conf.counts, [1, 0])

    def test_empty_class_is_not_absorbing(self):
        # A self-loop column would trap all stationary mass in the unseen
        # class; the uniform fallback must leave the seen class dominant.
        bank = MemoryBank(3, 4)
        for _ in range(4):
            bank.update([0.9, 0.06, 0.04])
        out = jacobi_prior(estimate_confusion(bank), max_iter=200, eps=1e-12)
        assert out.prior[0] > out.prior[1]
        assert out.prior[0] > 0.5

    def test_column_is_mean(self):
        bank = MemoryBank(2, 4)
        bank.update([0.9, 0.1])
        bank.update([0.7, 0.3])
        conf = estimate_confusion(bank)
        assert_allclose(conf.a[:, 0], [0.8, 0.2], rtol=1e-15)

    def test_always_column_stochastic(self):
        rng = np.random.default_rng(1)
        bank = MemoryBank(10, 5)
        for _ in range(60):
            x = rng.exponential(size=10)
            bank.update(x / x.sum())
        conf = estimate_confusion(bank)
        assert_allclose(conf.a.sum(axis=0), 1.0, atol=1e-9)
        assert conf.counts.sum() == bank.total_count

    def test_empty_bank_is_uniform(self):
        conf = estimate_confusion(MemoryBank(4, 2))
        assert_array_equal(conf.a, np.full((4, 4), 0.25))
        # ... whose stationary point is the uniform prior: a fresh adapter
        # starts unbiased.
        out = jacobi_prior(conf, max_iter=100, eps=1e-10)
        assert_allclose(out.prior, np.full(4, 0.25), rtol=1e-12)


class TestJacobiPrior:
    def test_identity_fixed_point(self):
        out = jacobi_prior(np.eye(3), max_iter=100, eps=1e-10)
        assert_allclose(out.prior, np.full(3, 1 / 3), rtol=1e-12)

    def test_two_class_known_stationary(self):
        a = np.array([[0.9, 0.2], [0.1, 0.8]])
        out = jacobi_prior(a, max_iter=100, eps=1e-10)
        assert_allclose(out.prior, [2 / 3, 1 / 3], atol=1e-8)
        assert_allclose(out.log_bias, -np.log(out.prior))

    def test_matches_linear_solve_oracle(self):
        rng = np.random.default_rng(2)
        for n in (2, 5, 20, 50):
            for _ in range(20):
                a = random_column_stochastic(rng, n)
                got = jacobi_prior(a, max_iter=100, eps=1e-10).prior
                want = stationary_oracle(a)
                assert np.abs(got - want).sum() <= 1e-8

    def test_accepts_confusion_estimate(self):
        bank = MemoryBank(3, 2)
        bank.update([0.5, 0.3, 0.2])
        out = jacobi_prior(estimate_confusion(bank))
        assert_allclose(out.prior.sum(), 1.0, atol=1e-9)

    def test_output_invariants(self):
        rng = np.random.default_rng(3)
        a = random_column_stochastic(rng, 30)
        out = jacobi_prior(a)
        assert abs(out.prior.sum() - 1.0) <= 1e-9
        assert np.all(out.prior >= 1e-12)
        assert np.all(np.isfinite(out.log_bias))

    def test_clamp_keeps_bias_finite(self):
        # one class is (numerically) extinct under this chain
        a = np.array([[1.0, 1.0], [0.0, 0.0]])
        out = jacobi_prior(a, max_iter=100, eps=1e-16)
        assert np.all(out.prior >= 1e-12)
        assert np.all(np.isfinite(out.log_bias))

    def test_rejects_non_stochastic(self):
        bad = np.array([[0.9, 0.2], [0.1, 0.8 + 2e-6]])
        with pytest.raises(InvalidInputError):
            jacobi_prior(bad)
        with pytest.raises(InvalidInputError):
            jacobi_prior(np.array([[1.5, 0.0], [-0.5, 1.0]]))

    def test_rejects_bad_iteration_params(self):
        with pytest.raises(InvalidInputError):
            jacobi_prior(np.eye(2), max_iter=0)
        with pytest.raises(InvalidInputError):
            jacobi_prior(np.eye(2), eps=0.0)


class TestQProfile:
    def test_endpoints_and_midpoint(self):
        bias = BiasVector(prior=np.exp(-np.array([0.0, 1.0, 2.0])),
                          log_bias=np.array([0.0, 1.0, 2.0]))
        prof = q_profile_from_bias(bias, alpha=0.01, beta=0.9, invert=False)
        assert_allclose(prof.q, [0.01, 0.455, 0.9], rtol=1e-12)

    def test_invert_reflects(self):
        bias = BiasVector(prior=np.exp(-np.array([0.0, 1.0, 2.0])),
                          log_bias=np.array([0.0, 1.0, 2.0]))
        prof = q_profile_from_bias(bias, alpha=0.01, beta=0.9, invert=True)
        assert_allclose(prof.q, [0.9, 0.455, 0.01], rtol=1e-12)

    def test_degenerate_spread_maps_to_midpoint(self):
        prof = q_profile_from_bias(BiasVector.uniform(5))
        assert_allclose(prof.q, np.full(5, 0.455))

    def test_interval_validation(self):
        bias = BiasVector.uniform(3)
        for alpha, beta in ((0.9, 0.1), (0.0, 0.5), (0.5, 1.0), (0.5, 0.5)):
            with pytest.raises(InvalidConfigError):
                q_profile_from_bias(bias, alpha=alpha, beta=beta)

    @settings(deadline=None, max_examples=60)
    @given(st.lists(st.floats(0.0, 30.0), min_size=2, max_size=40))
    def test_range_and_extremes(self, b_list):
        b = np.asarray(b_list)
        bias = BiasVector(prior=np.exp(-b), log_bias=b)
        prof = q_profile_from_bias(bias, alpha=0.05, beta=0.8)
        assert np.all((prof.q >= 0.05) & (prof.q <= 0.8))
        if b.max() - b.min() >= 1e-12:
            assert prof.q[np.argmin(b)] == 0.05
            assert prof.q[np.argmax(b)] == 0.8


class TestLogitAdjust:
    def test_uniform_prior_is_identity(self):
        p = np.array([0.2, 0.3, 0.5])
        assert_allclose(logit_adjust(p, BiasVector.uniform(3)), p, atol=1e-12)

    def test_known_adjustment_flips_argmax(self):
        prior = np.array([0.75, 0.25])
        bias = BiasVector(prior=prior, log_bias=-np.log(prior))
        adjusted = logit_adjust([0.6, 0.4], bias)
        assert_allclose(adjusted, [1 / 3, 2 / 3], rtol=1e-12)
        assert np.argmax(adjusted) != np.argmax([0.6, 0.4])

    def test_batch_rows_match_single(self):
        rng = np.random.default_rng(4)
        p = rng.exponential(size=(6, 4))
        p /= p.sum(axis=1, keepdims=True)
        prior = rng.uniform(0.1, 1.0, size=4)
        prior /= prior.sum()
        bias = BiasVector(prior=prior, log_bias=-np.log(prior))
        batch = logit_adjust(p, bias)
        assert_array_equal(batch, np.array([logit_adjust(row, bias) for row in p]))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            logit_adjust([0.5, 0.5], BiasVector.uniform(3))
