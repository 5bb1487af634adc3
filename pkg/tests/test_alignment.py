import sys
import unittest
from pathlib import Path

import numpy as np


PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from bridgeflow.alignment import (
    AlignmentPlan,
    benchmark_alignment,
    global_align,
    local_batch_coupling,
    true_coupling,
    tune_alpha,
    tune_unbalancedness,
)
from bridgeflow.config import AlignmentConfig, OTConfig, SyntheticSpec
from bridgeflow.data_io import gen_paired_clusters
from bridgeflow.errors import InputError
from bridgeflow.solvers import expected_matching_accuracy
from bridgeflow.types import PairedSet

CFG = OTConfig(epsilon=0.05)


def _clusters(n=30, seed=0):
    spec = SyntheticSpec(
        kind="paired_gaussian_clusters",
        n=n,
        classes=3,
        noise_scale=0.2,
        separation=3.0,
        source_dim=5,
        target_dim=4,
        seed=seed,
    )
    return gen_paired_clusters(spec)


class TrueCouplingTests(unittest.TestCase):
    def test_mass_sits_on_pairs(self):
        P = PairedSet.from_list([(0, 2), (3, 1)])
        pi = true_coupling(P, 4, 3)
        self.assertEqual(pi.values[0, 2], 0.5)
        self.assertEqual(pi.values[3, 1], 0.5)
        self.assertEqual(pi.total_mass, 1.0)
        np.testing.assert_array_equal(pi.source_marginal, [0.5, 0.0, 0.0, 0.5])
        self.assertEqual(pi.marginal_violation(), 0.0)
        self.assertEqual(pi.report.solver, "true")

    def test_empty_pairs_rejected(self):
        with self.assertRaises(InputError):
            true_coupling(PairedSet.from_list([]), 3, 3)


class GlobalAlignTests(unittest.TestCase):
    def setUp(self):
        self.X, self.Y, self.truth = _clusters()

    def test_linear_bridge_favours_true_pairs(self):
        pi = global_align(self.X, self.Y, self.truth, "bridge", CFG)
        self.assertEqual(pi.shape, (30, 30))
        self.assertEqual(pi.report.solver, "linear")
        np.testing.assert_allclose(pi.row_sums, np.full(30, 1 / 30), atol=1e-5)
        same_class = self.X.labels[:, None] == self.Y.labels[None, :]
        self.assertGreater(float((pi.values * same_class).sum()), 0.9)

    def test_gw_ignores_pairs(self):
        pi = global_align(self.X, self.Y, PairedSet.from_list([]), "bridge", CFG, solver="gw")
        self.assertEqual(pi.report.solver, "gw")
        self.assertLessEqual(pi.marginal_violation(), 1e-4)

    def test_fgw_with_knn_cost(self):
        config = AlignmentConfig(knn_k=12)
        pi = global_align(self.X, self.Y, self.truth, "knn", CFG, solver="fgw", config=config)
        self.assertEqual(pi.report.solver, "fgw")
        self.assertTrue(np.all(np.isfinite(pi.values)))

    def test_unknown_solver(self):
        with self.assertRaises(InputError):
            global_align(self.X, self.Y, self.truth, "bridge", CFG, solver="emd")


class LocalBatchTests(unittest.TestCase):
    def setUp(self):
        self.X, self.Y, self.truth = _clusters()

    def test_global_anchor_scope_batch_shape(self):
        source_index = np.arange(0, 10)
        target_index = np.arange(5, 15)
        pi = local_batch_coupling(self.X, self.Y, self.truth, source_index, target_index, "bridge", CFG)
        self.assertEqual(pi.shape, (10, 10))
        np.testing.assert_allclose(pi.col_sums, np.full(10, 0.1), atol=1e-6)

    def test_batch_scope_without_pairs_falls_back_to_gw(self):
        P = PairedSet.identity(10)
        pi = local_batch_coupling(
            self.X, self.Y, P, np.arange(10, 20), np.arange(20, 30), "bridge", CFG, anchor_scope="batch"
        )
        self.assertEqual(pi.report.extra["fallback"], "gw")
        self.assertEqual(pi.report.solver, "gw")
        self.assertTrue(any("gw fallback" in message for message in pi.report.warnings))

    def test_batch_scope_uses_local_pairs(self):
        pi = local_batch_coupling(
            self.X, self.Y, self.truth, np.arange(10), np.arange(10), "bridge", CFG, anchor_scope="batch"
        )
        self.assertNotIn("fallback", pi.report.extra)

    def test_unknown_anchor_scope(self):
        with self.assertRaises(InputError):
            local_batch_coupling(
                self.X, self.Y, self.truth, np.arange(5), np.arange(5), "bridge", CFG, anchor_scope="all"
            )


class AlignmentPlanTests(unittest.TestCase):
    def setUp(self):
        self.X, self.Y, self.truth = _clusters()

    def test_fixed_plan_returns_identity_maps(self):
        plan = AlignmentPlan.build(self.X, self.Y, self.truth, AlignmentConfig(strategy="true"))
        coupling, rows, cols = plan.coupling_for_iteration(np.random.default_rng(0))
        self.assertIs(coupling, plan.coupling)
        np.testing.assert_array_equal(rows, np.arange(30))
        np.testing.assert_array_equal(cols, np.arange(30))

    def test_local_plan_draws_batches(self):
        config = AlignmentConfig(strategy="local", batch_size=8, ot=CFG)
        plan = AlignmentPlan.build(self.X, self.Y, self.truth, config)
        self.assertIsNone(plan.coupling)
        coupling, rows, cols = plan.coupling_for_iteration(np.random.default_rng(0))
        self.assertEqual(coupling.shape, (8, 8))
        self.assertEqual(len(set(rows.tolist())), 8)
        self.assertTrue(np.all(cols < 30))

    def test_local_batches_repeat_for_same_seed(self):
        plan = AlignmentPlan.build(
            self.X, self.Y, self.truth, AlignmentConfig(strategy="local", batch_size=8, ot=CFG)
        )
        first = plan.coupling_for_iteration(np.random.default_rng(4))
        second = plan.coupling_for_iteration(np.random.default_rng(4))
        np.testing.assert_array_equal(first[0].values, second[0].values)
        np.testing.assert_array_equal(first[1], second[1])

    def test_true_plan_needs_pairs(self):
        with self.assertRaises(InputError):
            AlignmentPlan.build(self.X, self.Y, PairedSet.from_list([]), AlignmentConfig(strategy="true"))


class TuningTests(unittest.TestCase):
    def setUp(self):
        self.X, self.Y, self.truth = _clusters(n=24, seed=1)
        self.P = PairedSet(self.truth.pairs[::2])

    def test_alpha_sweep_picks_best(self):
        sweep = tune_alpha(self.X, self.Y, self.P, self.truth, "bridge", alphas=(0.0, 0.5, 1.0), cfg=CFG)
        self.assertEqual(len(sweep.accuracies), 3)
        best = sweep.alphas[int(np.argmax(sweep.accuracies))]
        self.assertEqual(sweep.best_alpha, best)
        self.assertTrue(all(0.0 <= value <= 1.0 for value in sweep.accuracies))

    def test_empty_alpha_grid(self):
        with self.assertRaises(InputError):
            tune_alpha(self.X, self.Y, self.P, self.truth, "bridge", alphas=())

    def test_tau_sweep_covers_grid(self):
        sweep = tune_unbalancedness(
            self.X, self.Y, self.P, self.truth, "bridge", taus=(1.0, 0.9), cfg=CFG, sample_count=500
        )
        self.assertEqual(len(sweep.entries), 4)
        self.assertEqual(sweep.best["aes"], max(entry["aes"] for entry in sweep.entries))
        self.assertEqual(
            {(entry["tau_x"], entry["tau_y"]) for entry in sweep.entries},
            {(1.0, 1.0), (1.0, 0.9), (0.9, 1.0), (0.9, 0.9)},
        )

    def test_benchmark_reports_times(self):
        result = benchmark_alignment(self.X, self.Y, self.P, "bridge", CFG, batch_size=8, iterations=2)
        self.assertEqual(result.iterations, 2)
        self.assertGreater(result.global_seconds, 0.0)
        self.assertAlmostEqual(result.global_per_iteration, result.global_seconds / 2)
        self.assertEqual(set(result.to_dict()), {
            "global_seconds", "global_per_iteration", "local_per_iteration", "iterations",
        })


if __name__ == "__main__":
    unittest.main()
