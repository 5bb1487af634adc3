import sys
import unittest
from pathlib import Path

import networkx as nx
import numpy as np


PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from bridgeflow.config import AlignmentConfig, SyntheticSpec
from bridgeflow.costs import CostManager, bridge_cost, intra_cost, kcca_fused_cost, knn_fused_cost, normalize_by_mean
from bridgeflow.costs.knn import fused_knn_graph
from bridgeflow.data_io import gen_paired_clusters
from bridgeflow.errors import ConnectivityError, DegenerateInputError, InputError
from bridgeflow.types import CostMatrix, FeatureMatrix, PairedSet


def _random_pairs(rng, n, m, count):
    sources = rng.choice(n, size=count, replace=False)
    targets = rng.choice(m, size=count, replace=False)
    return PairedSet(np.stack([sources, targets], axis=1))


class IntraCostTests(unittest.TestCase):
    def test_symmetric_with_zero_diagonal(self):
        X = FeatureMatrix(np.random.default_rng(0).normal(size=(12, 4)))
        for metric in ("cosine", "sq_euclidean", "one_minus_pearson"):
            C = intra_cost(X, metric).values
            np.testing.assert_array_equal(C, C.T)
            np.testing.assert_array_equal(np.diag(C), np.zeros(12))
            self.assertTrue(np.all(C >= 0))

    def test_zero_norm_row_is_named(self):
        points = np.ones((4, 3))
        points[2] = 0.0
        with self.assertRaises(InputError) as ctx:
            intra_cost(FeatureMatrix(points), "cosine")
        self.assertIn("row 2", ctx.exception.message)

    def test_normalize_by_mean_rejects_all_zero(self):
        with self.assertRaises(DegenerateInputError):
            normalize_by_mean(CostMatrix(np.zeros((3, 3)), "cosine"))
        normalized = normalize_by_mean(CostMatrix(np.array([[1.0, 3.0]]), "bridge"))
        self.assertAlmostEqual(float(normalized.values.mean()), 1.0)
        self.assertTrue(normalized.normalized)


class BridgeCostTests(unittest.TestCase):
    def test_matches_exhaustive_anchor_search(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n, m = int(rng.integers(2, 31)), int(rng.integers(2, 31))
            X = FeatureMatrix(rng.normal(size=(n, 3)))
            Y = FeatureMatrix(rng.normal(size=(m, 5)))
            P = _random_pairs(rng, n, m, int(rng.integers(1, min(8, n, m) + 1)))
            C_XX, C_YY = intra_cost(X), intra_cost(Y)
            fused = bridge_cost(C_XX, C_YY, P).values

            expected = np.empty((n, m))
            paired = P.as_dict()
            for i in range(n):
                for j in range(m):
                    if paired.get(i) == j:
                        expected[i, j] = 0.0
                        continue
                    expected[i, j] = min(
                        C_XX.values[i, s] + C_YY.values[t, j] for s, t in P.pairs
                    )
            np.testing.assert_array_equal(fused, expected)

    def test_empty_pairs_are_rejected(self):
        X = FeatureMatrix(np.random.default_rng(0).normal(size=(4, 2)))
        with self.assertRaises(InputError):
            bridge_cost(intra_cost(X), intra_cost(X), PairedSet.from_list([]))

    def test_batch_over_whole_dataset_equals_full_build(self):
        rng = np.random.default_rng(3)
        X = FeatureMatrix(rng.normal(size=(10, 3)))
        Y = FeatureMatrix(rng.normal(size=(9, 3)))
        P = PairedSet.from_list([(0, 1), (4, 4), (7, 2)])
        builder = CostManager(AlignmentConfig()).get_builder("bridge")
        full = builder.build(X, Y, P).values
        batch = builder.build_for_batch(X, Y, P, np.arange(10), np.arange(9)).values
        np.testing.assert_array_equal(batch, full)


class KnnCostTests(unittest.TestCase):
    @staticmethod
    def _line(count, offset=0.0):
        return FeatureMatrix(np.stack([np.arange(count) + offset, np.zeros(count)], axis=1))

    def test_matches_floyd_warshall(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            n, m = int(rng.integers(8, 30)), int(rng.integers(8, 30))
            X = FeatureMatrix(np.cumsum(rng.uniform(0.9, 1.1, size=(n, 2)), axis=0))
            Y = FeatureMatrix(np.cumsum(rng.uniform(0.9, 1.1, size=(m, 2)), axis=0))
            P = _random_pairs(rng, n, m, 3)
            graph = fused_knn_graph(X, Y, P, k=3)
            reference = nx.floyd_warshall_numpy(graph, nodelist=range(n + m), weight="weight")[:n, n:]
            np.testing.assert_allclose(knn_fused_cost(X, Y, P, k=3).values, reference, rtol=0, atol=1e-12)

    def test_more_neighbours_never_lengthen_paths(self):
        rng = np.random.default_rng(8)
        X = FeatureMatrix(np.cumsum(rng.uniform(0.9, 1.1, size=(14, 2)), axis=0))
        Y = FeatureMatrix(np.cumsum(rng.uniform(0.9, 1.1, size=(11, 2)), axis=0))
        P = _random_pairs(rng, 14, 11, 3)
        previous = knn_fused_cost(X, Y, P, k=2).values
        for k in range(3, 10):
            current = knn_fused_cost(X, Y, P, k=k).values
            self.assertTrue(np.all(current <= previous + 1e-12), f"k={k}")
            previous = current

    def test_paired_points_cost_cross_weight(self):
        X, Y = self._line(6), self._line(6, offset=0.5)
        P = PairedSet.from_list([(0, 0), (3, 3)])
        C = knn_fused_cost(X, Y, P, k=2).values
        self.assertEqual(C[0, 0], 0.0)
        self.assertEqual(C[3, 3], 0.0)
        self.assertAlmostEqual(C[1, 0], 1.0)

    def test_disconnected_graph_lists_components(self):
        X = FeatureMatrix(np.array([[0.0, 0], [1, 0], [2, 0], [100, 0], [101, 0], [102, 0]]))
        Y = self._line(6)
        with self.assertRaises(ConnectivityError) as ctx:
            knn_fused_cost(X, Y, PairedSet.from_list([(0, 0)]), k=2)
        self.assertGreaterEqual(len(ctx.exception.details["components"]), 2)
        self.assertEqual(ctx.exception.code, "disconnected_graph")

    def test_k_out_of_range(self):
        X = self._line(4)
        with self.assertRaises(InputError):
            knn_fused_cost(X, X, PairedSet.from_list([(0, 0)]), k=4)


class KccaCostTests(unittest.TestCase):
    def setUp(self):
        spec = SyntheticSpec(
            kind="paired_gaussian_clusters", n=80, classes=4, noise_scale=0.2,
            separation=2.0, source_dim=6, target_dim=4, seed=1,
        )
        self.X, self.Y, truth = gen_paired_clusters(spec)
        self.P = PairedSet(truth.pairs[:30])

    def test_cost_is_bounded_cosine_distance(self):
        C = kcca_fused_cost(self.X, self.Y, self.P, components=3).values
        self.assertEqual(C.shape, (80, 80))
        self.assertTrue(np.all(C >= 0.0) and np.all(C <= 2.0))

    def test_true_partner_is_usually_cheaper_than_average(self):
        C = kcca_fused_cost(self.X, self.Y, self.P, components=3).values
        diagonal = np.diag(C).mean()
        self.assertLess(diagonal, C.mean())

    def test_identical_spaces_give_zero_diagonal(self):
        C = kcca_fused_cost(self.X, self.X, PairedSet.identity(self.X.n), components=3).values
        np.testing.assert_allclose(np.diag(C), np.zeros(self.X.n), atol=1e-8)

    def test_needs_two_anchors(self):
        builder = CostManager(AlignmentConfig(cost_kind="kcca")).get_builder()
        with self.assertRaises(InputError):
            builder.build(self.X, self.Y, PairedSet(self.P.pairs[:1]))


class CostManagerTests(unittest.TestCase):
    def test_options_flow_from_config(self):
        manager = CostManager(AlignmentConfig(knn_k=4, knn_cross_weight=0.5, intra_metric="sq_euclidean"))
        knn = manager.get_builder("knn")
        self.assertEqual((knn.k, knn.cross_weight), (4, 0.5))
        self.assertEqual(manager.get_builder("bridge").intra_metric, "sq_euclidean")
        self.assertIs(manager.get_builder("knn"), knn)
        self.assertEqual(manager.get_available_costs(), ["bridge", "kcca", "knn"])

    def test_unknown_kind(self):
        with self.assertRaises(InputError):
            CostManager().get_builder("manhattan")


if __name__ == "__main__":
    unittest.main()
