import itertools

import numpy as np
import pytest

from minreveal.coreset import (
    CoreSetQuery,
    CoreSetResult,
    optimal_min_core,
    run_core_test,
)
from minreveal.coreset import test_delta as delta_test
from minreveal.coreset import test_pure_linear as pure_linear_test
from minreveal.coreset import test_pure_nonlinear as pure_nonlinear_test
from minreveal.data import FeaturePartition
from minreveal.gaussian import GaussianStats
from minreveal.models import LinearModel, MlpModel, init_mlp

from conftest import random_spd_stats


def loan_query(loan_model, loan_stats, loan_partition, job, revealed=(), values=(), delta=0.0):
    return CoreSetQuery(
        model=loan_model,
        stats=loan_stats,
        partition=loan_partition,
        public_values=np.array([job]),
        revealed_idx=tuple(revealed),
        revealed_values=np.asarray(values, dtype=float),
        delta=delta,
    )


class TestPureLinear:
    def test_user_a_is_core_with_no_reveals(self, loan_model, loan_stats, loan_partition):
        result = pure_linear_test(loan_query(loan_model, loan_stats, loan_partition, job=1.0))
        assert result.is_core and result.label == 1
        assert result.confidence == 1.0

    def test_user_b_not_core_initially(self, loan_model, loan_stats, loan_partition):
        result = pure_linear_test(loan_query(loan_model, loan_stats, loan_partition, job=-0.9))
        assert not result.is_core
        assert result.label is None
        assert result.confidence < 1.0

    def test_user_b_core_after_revealing_loc(self, loan_model, loan_stats, loan_partition):
        query = loan_query(loan_model, loan_stats, loan_partition, job=-0.9, revealed=(1,), values=(1.0,))
        result = pure_linear_test(query)
        assert result.is_core and result.label == 0

    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            d = int(rng.integers(2, 9))
            n_known = int(rng.integers(0, d))
            theta = rng.normal(size=d)
            model = LinearModel(theta, float(rng.normal(scale=0.5)), 2)
            stats = GaussianStats(np.zeros(d), np.eye(d), 0.0)
            partition = FeaturePartition(tuple(range(n_known)), tuple(range(n_known, d)))
            x_pub = rng.uniform(-1, 1, n_known)
            query = CoreSetQuery(model, stats, partition, x_pub, (), np.array([]), 0.0)
            got = pure_linear_test(query)

            unrevealed = list(range(n_known, d))
            c = theta[:n_known] @ x_pub + model.bias
            labels = set()
            for corner in itertools.product([-1.0, 1.0], repeat=len(unrevealed)):
                labels.add(int(c + np.dot(corner, theta[unrevealed]) >= 0))
            expect_core = len(labels) == 1
            assert got.is_core == expect_core
            if expect_core:
                assert got.label == labels.pop()

    def test_superset_of_core_stays_core_with_same_label(self):
        rng = np.random.default_rng(1)
        found = 0
        while found < 50:
            d = int(rng.integers(3, 8))
            theta = rng.normal(size=d)
            model = LinearModel(theta, 0.0, 2)
            stats = GaussianStats(np.zeros(d), np.eye(d), 0.0)
            partition = FeaturePartition((0,), tuple(range(1, d)))
            x = rng.uniform(-1, 1, d)
            base = CoreSetQuery(model, stats, partition, x[:1], (), np.array([]), 0.0)
            r0 = pure_linear_test(base)
            if not r0.is_core:
                continue
            extra = int(rng.integers(1, d))
            bigger = CoreSetQuery(model, stats, partition, x[:1], (extra,), x[extra : extra + 1], 0.0)
            r1 = pure_linear_test(bigger)
            assert r1.is_core and r1.label == r0.label
            found += 1

    def test_requires_binary_linear(self, loan_stats, loan_partition):
        mlp = init_mlp(3, 2, seed=0)
        query = CoreSetQuery(mlp, loan_stats, loan_partition, np.array([0.0]), (), np.array([]), 0.0)
        with pytest.raises(ValueError, match="linear"):
            pure_linear_test(query)


class TestPureNonlinear:
    def test_empty_unrevealed_is_trivially_core(self, loan_stats, loan_partition):
        model = init_mlp(3, 2, seed=0)
        query = CoreSetQuery(
            model, loan_stats, loan_partition, np.array([0.3]), (1, 2), np.array([0.1, -0.2]), 0.0
        )
        result = pure_nonlinear_test(query, num_probe=10)
        assert result.is_core
        assert result.confidence == 1.0

    def test_zero_weights_on_unrevealed_always_core(self, loan_stats, loan_partition):
        w1 = np.zeros((3, 10))
        w1[0, :] = np.linspace(-1, 1, 10)  # only the public feature matters
        model = MlpModel(
            (w1, np.eye(10), np.ones((10, 1))),
            (np.zeros(10), np.zeros(10), np.array([0.1])),
            2,
        )
        query = CoreSetQuery(model, loan_stats, loan_partition, np.array([0.5]), (), np.array([]), 0.0)
        result = pure_nonlinear_test(query, num_probe=2000, seed=4)
        assert result.is_core

    def test_straddling_network_always_caught(self):
        # exact sign-of-product network: |x0+x1| - |x0-x1| >= 0 iff x0*x1 >= 0;
        # under a centered posterior each probe flips with probability 1/2,
        # so 1000 probes miss the straddle with probability 2^-999
        w1 = np.array([[1.0, -1.0, 1.0, -1.0], [1.0, -1.0, -1.0, 1.0]])
        model = MlpModel(
            (w1, np.eye(4), np.array([[1.0], [1.0], [-1.0], [-1.0]])),
            (np.zeros(4), np.zeros(4), np.zeros(1)),
            2,
        )
        stats = GaussianStats(np.zeros(2), np.eye(2), 0.0)
        partition = FeaturePartition((), (0, 1))
        query = CoreSetQuery(model, stats, partition, np.array([]), (), np.array([]), 0.0)
        for seed in range(100):
            result = pure_nonlinear_test(query, num_probe=1000, seed=seed)
            assert not result.is_core


class TestDelta:
    def make_query(self, mean, delta):
        # theta_public carries the whole mean; the single unrevealed feature
        # has unit weight and unit variance, so the law is Phi(mean / 1)
        model = LinearModel(np.array([mean, 1.0]), 0.0, 2)
        stats = GaussianStats(np.zeros(2), np.eye(2), 0.0)
        partition = FeaturePartition((0,), (1,))
        return CoreSetQuery(model, stats, partition, np.array([1.0]), (), np.array([]), delta)

    def test_confident_law_passes(self):
        # Phi(-1.6448...) = 0.05 -> law (0.95, 0.05)
        query = self.make_query(-1.6448536269514722, delta=0.1)
        result = delta_test(query)
        assert result.is_core and result.label == 0
        assert result.confidence == pytest.approx(0.95, abs=1e-9)

    def test_even_odds_never_passes(self):
        for delta in (0.05, 0.2, 0.4999):
            result = delta_test(self.make_query(0.0, delta))
            assert not result.is_core

    def test_phi_one_threshold_cases(self):
        assert delta_test(self.make_query(1.0, delta=0.2)).is_core
        result = delta_test(self.make_query(1.0, delta=0.2))
        assert result.label == 1
        assert not delta_test(self.make_query(1.0, delta=0.1)).is_core

    def test_delta_nesting(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            mean = float(rng.normal())
            d1, d2 = sorted(rng.uniform(0.01, 0.49, size=2))
            r1 = delta_test(self.make_query(mean, d1))
            r2 = delta_test(self.make_query(mean, d2))
            if r1.is_core:
                assert r2.is_core and r2.label == r1.label

    def test_pure_with_zero_variance_passes_every_delta(self):
        model = LinearModel(np.array([0.7, 0.0]), 0.0, 2)
        stats = GaussianStats(np.zeros(2), np.eye(2), 0.0)
        partition = FeaturePartition((0,), (1,))
        query = CoreSetQuery(model, stats, partition, np.array([1.0]), (), np.array([]), 0.0)
        pure = pure_linear_test(query)
        assert pure.is_core
        for delta in (0.01, 0.1, 0.4):
            q = CoreSetQuery(model, stats, partition, np.array([1.0]), (), np.array([]), delta)
            r = delta_test(q)
            assert r.is_core and r.label == pure.label and r.confidence == 1.0

    def test_delta_zero_rejected(self, loan_model, loan_stats, loan_partition):
        query = loan_query(loan_model, loan_stats, loan_partition, job=0.0, delta=0.0)
        with pytest.raises(ValueError, match="delta"):
            delta_test(query)

    def test_invalid_delta_rejected(self, loan_model, loan_stats, loan_partition):
        with pytest.raises(ValueError, match="delta"):
            loan_query(loan_model, loan_stats, loan_partition, job=0.0, delta=0.5)


class TestOptimalMinCore:
    def test_user_a_needs_nothing(self, loan_model, loan_stats, loan_partition):
        subset, label = optimal_min_core(
            loan_model, loan_stats, loan_partition, np.array([1.0, -0.4, 0.8]), delta=0.0
        )
        assert subset == () and label == 1

    def test_user_b_needs_only_loc(self, loan_model, loan_stats, loan_partition):
        subset, label = optimal_min_core(
            loan_model, loan_stats, loan_partition, np.array([-0.9, 1.0, 0.3]), delta=0.0
        )
        assert subset == (1,) and label == 0

    def test_exhaustive_fallback_returns_plug_in(self, loan_model, loan_stats, loan_partition):
        # full reveal is always a pure core set, so the search ends with at
        # most everything revealed and the plug-in label
        x = np.array([-0.2, 0.9, 0.9])
        subset, label = optimal_min_core(loan_model, loan_stats, loan_partition, x, delta=0.0)
        assert set(subset) <= {1, 2}
        from minreveal.models import hard_predict

        q = CoreSetQuery(loan_model, loan_stats, loan_partition, x[:1], subset, x[list(subset)], 0.0)
        assert pure_linear_test(q).label == label == hard_predict(loan_model, x)

    def test_budget_guard(self):
        d = 22
        model = LinearModel(np.ones(d), 0.0, 2)
        stats = GaussianStats(np.zeros(d), np.eye(d), 0.0)
        partition = FeaturePartition((0,), tuple(range(1, d)))
        with pytest.raises(ValueError, match="budget"):
            optimal_min_core(model, stats, partition, np.zeros(d), delta=0.0)

    def test_never_larger_than_any_core_subset(self, loan_model, loan_stats, loan_partition):
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = rng.uniform(-1, 1, 3)
            subset, _ = optimal_min_core(loan_model, loan_stats, loan_partition, x, delta=0.0)
            full = loan_query(loan_model, loan_stats, loan_partition, x[0], (1, 2), x[1:], 0.0)
            assert len(subset) <= 2
            assert pure_linear_test(full).is_core


class CountingArray(np.ndarray):
    """ndarray that counts how many elements indexing hands back."""

    touched = 0

    def __getitem__(self, key):
        out = super().__getitem__(key)
        CountingArray.touched += out.size if isinstance(out, np.ndarray) else 1
        return out


class TestComplexity:
    def test_pure_linear_touches_each_weight_once(self):
        # operation-count harness: the exact test must read theta O(d) times
        # (one pass for the revealed contribution, one for the l1 norm),
        # never enumerate the 2^|U| vertices
        for d in (64, 512, 4096):
            rng = np.random.default_rng(d)
            theta = rng.normal(size=d)
            model = LinearModel(theta, 2.0 * d, 2)  # bias dominates the l1 norm: always core
            object.__setattr__(model, "theta", theta.view(CountingArray))
            stats = GaussianStats(np.zeros(d), np.eye(d), 0.0)
            n_known = d // 2
            partition = FeaturePartition(tuple(range(n_known)), tuple(range(n_known, d)))
            query = CoreSetQuery(
                model, stats, partition, rng.uniform(-1, 1, n_known), (), np.array([]), 0.0
            )
            CountingArray.touched = 0
            result = pure_linear_test(query)
            assert result.is_core
            assert CountingArray.touched == d


class TestRunCoreTest:
    def test_dispatch_linear_pure(self, loan_model, loan_stats, loan_partition):
        result = run_core_test(loan_query(loan_model, loan_stats, loan_partition, job=1.0))
        assert result.is_core and result.confidence == 1.0

    def test_dispatch_delta(self, loan_model, loan_stats, loan_partition):
        query = loan_query(loan_model, loan_stats, loan_partition, job=0.9, delta=0.2)
        result = run_core_test(query)
        assert result.is_core

    def test_dispatch_nonlinear_uses_probes(self, loan_stats, loan_partition):
        model = init_mlp(3, 2, seed=1)
        query = CoreSetQuery(model, loan_stats, loan_partition, np.array([0.9]), (), np.array([]), 0.0)
        result = run_core_test(query, probe_samples=500, seed=0)
        assert isinstance(result, CoreSetResult)

    def test_core_result_requires_label(self):
        from minreveal.predictive import PredictiveLaw

        with pytest.raises(ValueError):
            CoreSetResult(True, None, 1.0, PredictiveLaw(np.array([1.0, 0.0])))
