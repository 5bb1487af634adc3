import itertools
import sys
import time
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
from scipy.optimize import minimize_scalar


PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from bridgeflow.config import OTConfig
from bridgeflow.errors import InputError
from bridgeflow.solvers import (
    SolverManager,
    entropic_gw,
    expected_matching_accuracy,
    fgw,
    sample_pairs,
    sinkhorn,
    sinkhorn_balanced,
    sinkhorn_unbalanced,
)
from bridgeflow.solvers.objectives import fgw_objective, gw_objective
from bridgeflow.types import CostMatrix, Coupling, PairedSet


def _intra(rng, n, dim=3):
    points = rng.normal(size=(n, dim))
    diff = points[:, None, :] - points[None, :, :]
    return CostMatrix(np.sqrt((diff ** 2).sum(axis=2)), "sq_euclidean")


class SinkhornTests(unittest.TestCase):
    def test_balanced_marginals_on_random_instances(self):
        rng = np.random.default_rng(0)
        cfg = OTConfig(epsilon=0.05)
        for _ in range(100):
            a = rng.dirichlet(np.full(50, 5.0))
            b = rng.dirichlet(np.full(50, 5.0))
            C = CostMatrix(rng.uniform(size=(50, 50)), "bridge")
            start = time.perf_counter()
            pi = sinkhorn(a, b, C, cfg)
            self.assertLess(time.perf_counter() - start, 1.0)
            self.assertTrue(pi.report.converged)
            self.assertLessEqual(pi.report.marginal_violation, 1e-6)
            self.assertLessEqual(pi.marginal_violation(), 1e-6)

    def test_two_by_two_coupling_has_gibbs_cross_ratio(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.dirichlet(np.ones(2))
            b = rng.dirichlet(np.ones(2))
            C = rng.uniform(size=(2, 2))
            eps = float(rng.uniform(0.2, 1.0))
            pi = sinkhorn(a, b, CostMatrix(C, "bridge"), OTConfig(epsilon=eps, tolerance=1e-12)).values
            cross = np.log(pi[0, 0] * pi[1, 1] / (pi[0, 1] * pi[1, 0]))
            self.assertAlmostEqual(cross, -(C[0, 0] + C[1, 1] - C[0, 1] - C[1, 0]) / eps, delta=1e-6)
            np.testing.assert_allclose(pi.sum(axis=1), a, atol=1e-6)
            np.testing.assert_allclose(pi.sum(axis=0), b, atol=1e-6)

    def test_two_by_two_matches_one_parameter_minimizer(self):
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        eps = 0.1

        def objective(p):
            pi = np.array([[p, 0.5 - p], [0.5 - p, p]])
            return float((pi * C).sum() + eps * (pi * np.log(pi)).sum())

        best = minimize_scalar(objective, bounds=(1e-12, 0.5 - 1e-12), method="bounded", options={"xatol": 1e-12}).x
        pi = sinkhorn([0.5, 0.5], [0.5, 0.5], CostMatrix(C, "bridge"), OTConfig(epsilon=eps, tolerance=1e-12)).values
        np.testing.assert_allclose(pi, [[best, 0.5 - best], [0.5 - best, best]], atol=1e-6)

    def test_unit_tau_reduces_to_balanced(self):
        rng = np.random.default_rng(2)
        a = np.full(20, 1 / 20)
        b = np.full(15, 1 / 15)
        M = rng.uniform(size=(20, 15))
        cfg = OTConfig(epsilon=0.1, tau_x=1.0, tau_y=1.0)
        balanced = sinkhorn_balanced(a, b, M, cfg)
        unbalanced = sinkhorn_unbalanced(a, b, M, cfg)
        np.testing.assert_allclose(unbalanced.values, balanced.values, rtol=0, atol=1e-8)
        self.assertEqual(unbalanced.report.solver, "linear")

    def test_unbalanced_run_reports_relaxed_solver(self):
        rng = np.random.default_rng(3)
        C = CostMatrix(rng.uniform(0.5, 1.5, size=(10, 12)), "bridge")
        pi = sinkhorn(np.full(10, 0.1), np.full(12, 1 / 12), C, OTConfig(epsilon=0.1, tau_x=0.9, tau_y=0.8))
        self.assertEqual(pi.report.solver, "linear_unbalanced")
        self.assertTrue(pi.report.converged)
        self.assertTrue(np.all(np.isfinite(pi.values)))
        self.assertLess(pi.total_mass, 1.0)

    def test_zero_cost_gives_independent_coupling(self):
        rng = np.random.default_rng(10)
        a = rng.dirichlet(np.ones(6))
        b = rng.dirichlet(np.ones(4))
        pi = sinkhorn(a, b, CostMatrix(np.zeros((6, 4)), "bridge"), OTConfig(epsilon=0.05))
        np.testing.assert_allclose(pi.values, np.outer(a, b), rtol=0, atol=1e-12)

    def test_marginals_must_sum_to_one(self):
        C = CostMatrix(np.ones((2, 2)), "bridge")
        with self.assertRaises(InputError):
            sinkhorn([0.5, 0.6], [0.5, 0.5], C, OTConfig())

    def test_debug_mode_tracks_non_increasing_objective(self):
        rng = np.random.default_rng(4)
        C = CostMatrix(rng.uniform(size=(8, 8)), "bridge")
        with patch.object(sys.modules["bridgeflow.solvers.sinkhorn"], "is_debug_enabled", return_value=True):
            pi = sinkhorn(np.full(8, 1 / 8), np.full(8, 1 / 8), C, OTConfig(epsilon=0.1))
        history = pi.report.objective_history
        self.assertGreater(len(history), 1)
        self.assertEqual(pi.report.warnings, [])
        self.assertTrue(all(later <= earlier + 1e-9 * max(1.0, abs(earlier)) for earlier, later in zip(history, history[1:])))


class GromovTests(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.C_XX = _intra(rng, 12)
        self.C_YY = _intra(rng, 10)
        self.C_XY = CostMatrix(rng.uniform(size=(12, 10)), "bridge")
        self.a = np.full(12, 1 / 12)
        self.b = np.full(10, 1 / 10)

    def test_alpha_zero_is_sinkhorn_on_squared_cost(self):
        cfg = OTConfig(epsilon=0.05, alpha=0.0)
        fused = fgw(self.C_XX, self.C_YY, self.C_XY, self.a, self.b, cfg)
        squared = CostMatrix(self.C_XY.values ** 2, "bridge")
        linear = sinkhorn(self.a, self.b, squared, cfg)
        np.testing.assert_array_equal(fused.values, linear.values)
        self.assertEqual(fused.report.to_dict(), linear.report.to_dict())

    def test_alpha_one_is_entropic_gw(self):
        cfg = OTConfig(epsilon=0.05, alpha=1.0, max_outer_iters=20)
        fused = fgw(self.C_XX, self.C_YY, self.C_XY, self.a, self.b, cfg)
        gw = entropic_gw(self.C_XX, self.C_YY, self.a, self.b, cfg)
        np.testing.assert_allclose(fused.values, gw.values, rtol=0, atol=1e-10)

    def test_gw_keeps_marginals(self):
        gw = entropic_gw(self.C_XX, self.C_YY, self.a, self.b, OTConfig(epsilon=0.05))
        self.assertLessEqual(gw.marginal_violation(), 1e-5)
        self.assertEqual(gw.report.solver, "gw")
        self.assertGreaterEqual(gw.report.outer_iterations, 1)

    def test_fused_recovers_permuted_copy(self):
        rng = np.random.default_rng(6)
        points = rng.normal(size=(8, 2)) * np.array([3.0, 1.0])
        permutation = rng.permutation(8)
        diff = points[:, None] - points[None, :]
        D = np.sqrt((diff ** 2).sum(axis=2))
        D = D / D.max()
        C_XX = CostMatrix(D, "sq_euclidean")
        C_YY = CostMatrix(D[np.ix_(permutation, permutation)], "sq_euclidean")
        C_XY = CostMatrix(1.0 - np.eye(8)[:, permutation], "bridge")
        pi = fgw(C_XX, C_YY, C_XY, np.full(8, 1 / 8), np.full(8, 1 / 8), OTConfig(epsilon=0.05, alpha=0.5))
        truth = PairedSet(np.stack([permutation, np.arange(8)], axis=1))
        self.assertGreater(expected_matching_accuracy(pi, truth), 0.9)

    @staticmethod
    def _permutation_couplings(n):
        for permutation in itertools.permutations(range(n)):
            coupling = np.zeros((n, n))
            coupling[np.arange(n), permutation] = 1.0 / n
            yield coupling

    def test_gw_beats_every_permutation_on_three_points(self):
        positions = np.array([0.0, 1.0, 3.0])
        D = np.abs(positions[:, None] - positions[None, :])
        shuffle = np.array([2, 0, 1])
        C_XX = CostMatrix(D, "sq_euclidean")
        C_YY = CostMatrix(D[np.ix_(shuffle, shuffle)], "sq_euclidean")
        uniform = np.full(3, 1 / 3)
        eps = 0.05
        pi = entropic_gw(C_XX, C_YY, uniform, uniform, OTConfig(epsilon=eps, tolerance=1e-9))
        value = gw_objective(pi.values, C_XX.values, C_YY.values, eps)
        best = min(
            gw_objective(coupling, C_XX.values, C_YY.values, eps) for coupling in self._permutation_couplings(3)
        )
        self.assertLessEqual(value, best + 1e-6)

    def test_gw_rows_follow_permuted_source(self):
        permutation = np.array([3, 0, 5, 1, 4, 2])
        rng = np.random.default_rng(12)
        C_XX = _intra(rng, 6)
        C_YY = _intra(rng, 5)
        permuted = CostMatrix(C_XX.values[np.ix_(permutation, permutation)], "sq_euclidean")
        cfg = OTConfig(epsilon=0.5)
        a, b = np.full(6, 1 / 6), np.full(5, 1 / 5)
        original = entropic_gw(C_XX, C_YY, a, b, cfg)
        shuffled = entropic_gw(permuted, C_YY, a, b, cfg)
        np.testing.assert_allclose(shuffled.values, original.values[permutation], rtol=0, atol=1e-8)

    def test_fgw_beats_permutations_and_independent_coupling(self):
        positions = np.array([0.0, 1.0, 3.0, 7.0])
        shuffle = np.array([1, 3, 0, 2])
        D = np.abs(positions[:, None] - positions[None, :])
        C_XX = CostMatrix(D, "sq_euclidean")
        C_YY = CostMatrix(D[np.ix_(shuffle, shuffle)], "sq_euclidean")
        C_XY = CostMatrix(np.abs(positions[:, None] - positions[shuffle][None, :]), "bridge")
        uniform = np.full(4, 1 / 4)
        eps = 0.05
        cfg = OTConfig(epsilon=eps, alpha=0.5, tolerance=1e-9)
        pi = fgw(C_XX, C_YY, C_XY, uniform, uniform, cfg)

        def objective(coupling):
            return fgw_objective(coupling, C_XX.values, C_YY.values, C_XY.values, 0.5, eps)

        value = objective(pi.values)
        candidates = list(self._permutation_couplings(4)) + [np.outer(uniform, uniform)]
        for coupling in candidates:
            self.assertLessEqual(value, objective(coupling) + 1e-6)

    def test_unbalanced_gw_is_rejected(self):
        with self.assertRaises(InputError):
            entropic_gw(self.C_XX, self.C_YY, self.a, self.b, OTConfig(tau_x=0.9))


class SamplingTests(unittest.TestCase):
    def setUp(self):
        values = np.array([[0.1, 0.2, 0.0], [0.3, 0.0, 0.4]])
        self.pi = Coupling(values, values.sum(axis=1), values.sum(axis=0))

    def test_empirical_frequencies_match_coupling(self):
        drawn = sample_pairs(self.pi, 200000, seed=0)
        counts = np.zeros((2, 3))
        np.add.at(counts, (drawn[:, 0], drawn[:, 1]), 1)
        np.testing.assert_allclose(counts / len(drawn), self.pi.values, atol=0.01)
        self.assertEqual(counts[0, 2], 0)
        self.assertEqual(counts[1, 1], 0)

    def test_fixed_seed_is_deterministic(self):
        np.testing.assert_array_equal(sample_pairs(self.pi, 50, 3), sample_pairs(self.pi, 50, 3))
        self.assertEqual(sample_pairs(self.pi, 50, 3).dtype, np.int64)

    def test_matches_row_then_column_inverse_cdf(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(size=(5, 7))
        values[2] = 0.0
        pi = Coupling(values / values.sum(), None, None)
        drawn = sample_pairs(pi, 300, seed=9)

        stream = np.random.default_rng(9)
        u_rows, u_cols = stream.random(300), stream.random(300)
        row_cdf = np.cumsum(pi.row_sums)
        for k, (i, j) in enumerate(drawn):
            self.assertEqual(i, np.searchsorted(row_cdf, u_rows[k] * row_cdf[-1], side="right"))
            col_cdf = np.cumsum(pi.values[i])
            self.assertEqual(j, np.searchsorted(col_cdf, u_cols[k] * col_cdf[-1], side="right"))
        self.assertNotIn(2, drawn[:, 0])

    def test_many_draws_from_a_large_coupling_stay_small(self):
        import tracemalloc

        pi = Coupling(np.full((1000, 1000), 1e-6), None, None)
        tracemalloc.start()
        try:
            drawn = sample_pairs(pi, 100000, seed=0)
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        self.assertEqual(drawn.shape, (100000, 2))
        # a per-draw copy of the rows would need 800 MB
        self.assertLess(peak, 64 * 1024 * 1024)

    def test_zero_mass_is_rejected(self):
        empty = Coupling(np.zeros((2, 2)), [0.5, 0.5], [0.5, 0.5])
        with self.assertRaises(InputError):
            sample_pairs(empty, 5)

    def test_matching_accuracy(self):
        identity = Coupling(np.eye(4) / 4, None, None)
        truth = PairedSet.identity(4)
        self.assertEqual(expected_matching_accuracy(identity, truth), 1.0)
        self.assertEqual(expected_matching_accuracy(identity, truth, samples=100, seed=1), 1.0)
        shifted = PairedSet(np.stack([np.arange(4), (np.arange(4) + 1) % 4], axis=1))
        self.assertEqual(expected_matching_accuracy(identity, shifted), 0.0)


class SolverManagerTests(unittest.TestCase):
    def test_uniform_weights_by_default(self):
        C = CostMatrix(np.random.default_rng(0).uniform(size=(5, 4)), "bridge")
        pi = SolverManager(OTConfig(epsilon=0.1)).solve("linear", C_XY=C)
        np.testing.assert_allclose(pi.row_sums, np.full(5, 0.2), atol=1e-6)
        np.testing.assert_allclose(pi.col_sums, np.full(4, 0.25), atol=1e-6)

    def test_unknown_solver(self):
        with self.assertRaises(InputError):
            SolverManager().get_solver("emd")

    def test_missing_costs(self):
        manager = SolverManager()
        with self.assertRaises(InputError):
            manager.solve("gw", C_XY=CostMatrix(np.ones((2, 2)), "bridge"))
        self.assertEqual(manager.get_available_solvers(), ["fgw", "gw", "linear"])


if __name__ == "__main__":
    unittest.main()
