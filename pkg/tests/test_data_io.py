import struct
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np


PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from bridgeflow.config import SyntheticSpec
from bridgeflow.data_io import (
    gen_paired_clusters,
    gen_spiral,
    gen_swiss_roll,
    generate,
    load_cost,
    load_coupling,
    load_features,
    load_pairs,
    save_cost,
    save_coupling,
    save_features,
    save_pairs,
    subsample_pairs,
)
from bridgeflow.data_io.formats import decode_features, encode_features
from bridgeflow.errors import InputError, ParseError, ValidationError
from bridgeflow.metrics import feature_overlap
from bridgeflow.types import CostMatrix, Coupling, FeatureMatrix, PairedSet, SolverReport


class GeneratorTests(unittest.TestCase):
    def test_swiss_roll_lies_on_surface(self):
        X, params = gen_swiss_roll(200, seed=1, return_params=True)
        t, h = params[:, 0], params[:, 1]
        np.testing.assert_allclose(X.points[:, 0], t * np.cos(t))
        np.testing.assert_allclose(X.points[:, 1], h)
        np.testing.assert_allclose(X.points[:, 2], t * np.sin(t))
        self.assertTrue(np.all((t >= 1.5 * np.pi) & (t <= 4.5 * np.pi)))
        self.assertTrue(np.all((h >= 0.0) & (h <= 21.0)))

    def test_spiral_radius_grows_with_angle(self):
        X, theta = gen_spiral(150, seed=2, return_params=True)
        np.testing.assert_allclose(np.linalg.norm(X.points, axis=1), 0.5 * theta[:, 0])
        self.assertEqual(X.dim, 2)

    def test_same_seed_same_points(self):
        np.testing.assert_array_equal(gen_swiss_roll(50, 0.1, 3).points, gen_swiss_roll(50, 0.1, 3).points)
        self.assertFalse(np.array_equal(gen_spiral(50, 0.1, 3).points, gen_spiral(50, 0.1, 4).points))

    def test_too_few_points(self):
        with self.assertRaises(InputError):
            gen_swiss_roll(5)
        with self.assertRaises(InputError):
            gen_spiral(9)

    def test_clusters_are_paired_and_labelled(self):
        spec = SyntheticSpec(kind="paired_gaussian_clusters", n=90, classes=3, source_dim=6, target_dim=4, seed=5)
        X, Y, truth = gen_paired_clusters(spec)
        self.assertEqual((X.n, X.dim, Y.n, Y.dim), (90, 6, 90, 4))
        np.testing.assert_array_equal(X.labels, Y.labels)
        self.assertEqual(len(truth), 90)
        self.assertEqual(np.bincount(X.labels).tolist(), [30, 30, 30])
        again = generate(spec)
        np.testing.assert_array_equal(again[0].points, X.points)

    def test_separation_controls_overlap(self):
        apart = SyntheticSpec(
            kind="paired_gaussian_clusters", n=200, classes=2, separation=5.0, noise_scale=0.1,
            source_dim=3, target_dim=3, seed=6,
        )
        mixed = apart.model_copy(update={"separation": 0.0})
        X_apart, _, _ = gen_paired_clusters(apart)
        X_mixed, _, _ = gen_paired_clusters(mixed)
        self.assertEqual(feature_overlap(X_apart).value, 0.0)
        self.assertTrue(0.35 <= feature_overlap(X_mixed).value <= 0.65)

    def test_latent_dim_bounded_by_modalities(self):
        spec = SyntheticSpec(
            kind="paired_gaussian_clusters", n=20, classes=2, source_dim=3, target_dim=2, latent_dim=3
        )
        with self.assertRaises(InputError):
            gen_paired_clusters(spec)


class SubsampleTests(unittest.TestCase):
    def test_ratio_rounds_up(self):
        truth = PairedSet.identity(10)
        subset = subsample_pairs(truth, 0.25, seed=0)
        self.assertEqual(len(subset), 3)
        self.assertTrue(np.all(np.diff(subset.sources) > 0))

    def test_full_ratio_keeps_everything(self):
        truth = PairedSet.identity(7)
        np.testing.assert_array_equal(subsample_pairs(truth, 1.0).pairs, truth.pairs)

    def test_seed_fixes_selection(self):
        truth = PairedSet.identity(100)
        np.testing.assert_array_equal(subsample_pairs(truth, 0.1, 4).pairs, subsample_pairs(truth, 0.1, 4).pairs)

    def test_bad_ratio(self):
        with self.assertRaises(InputError):
            subsample_pairs(PairedSet.identity(4), 0.0)


class FeatureFormatTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        rng = np.random.default_rng(0)
        self.features = FeatureMatrix(rng.normal(size=(5, 3)), labels=np.array([0, 1, 1, 2, 0]))

    def tearDown(self):
        self.tmp.cleanup()

    def test_binary_and_csv_keep_values_exactly(self):
        for name in ("x.brgf", "x.csv"):
            loaded = load_features(save_features(self.dir / name, self.features))
            np.testing.assert_array_equal(loaded.points, self.features.points)
            np.testing.assert_array_equal(loaded.labels, self.features.labels)

    def test_unlabelled_csv(self):
        loaded = load_features(save_features(self.dir / "u.csv", FeatureMatrix(np.eye(2))))
        self.assertFalse(loaded.has_labels())

    def test_bad_csv_cell_names_row_and_column(self):
        path = self.dir / "bad.csv"
        path.write_text("dim0,dim1\n1.0,2.0\n3.0,abc\n")
        with self.assertRaises(ParseError) as ctx:
            load_features(path)
        self.assertEqual(ctx.exception.details["row"], 3)
        self.assertEqual(ctx.exception.details["column"], 1)

    def test_ragged_csv_row(self):
        path = self.dir / "ragged.csv"
        path.write_text("dim0,dim1\n1.0\n")
        with self.assertRaises(ParseError) as ctx:
            load_features(path)
        self.assertEqual(ctx.exception.details["row"], 2)

    def test_non_finite_csv_value(self):
        path = self.dir / "nan.csv"
        path.write_text("dim0\nnan\n")
        with self.assertRaises(ValidationError):
            load_features(path)

    def test_binary_errors_carry_offsets(self):
        data = encode_features(self.features)
        with self.assertRaises(ParseError) as ctx:
            decode_features(b"XXXX" + data[4:])
        self.assertEqual(ctx.exception.details["byte_offset"], 0)
        with self.assertRaises(ParseError) as ctx:
            decode_features(data + b"\x00")
        self.assertEqual(ctx.exception.details["byte_offset"], len(data))
        with self.assertRaises(ParseError):
            decode_features(data[:20])
        bad_flag = data[:12] + struct.pack("<B", 7) + data[13:]
        with self.assertRaises(ParseError) as ctx:
            decode_features(bad_flag)
        self.assertEqual(ctx.exception.details["byte_offset"], 12)

    def test_unsupported_extension(self):
        with self.assertRaises(InputError):
            save_features(self.dir / "x.npy", self.features)


class PairCostCouplingFormatTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_pairs_round_trip_and_range_check(self):
        pairs = PairedSet.from_list([(0, 3), (2, 1)])
        path = save_pairs(self.dir / "pairs.csv", pairs)
        self.assertEqual(path.read_text(), "source,target\n0,3\n2,1\n")
        np.testing.assert_array_equal(load_pairs(path).pairs, pairs.pairs)
        with self.assertRaises(ValidationError) as ctx:
            load_pairs(path, 3, 3)
        self.assertEqual(ctx.exception.details["file"], str(path))

    def test_duplicate_pair_source(self):
        path = self.dir / "dup.csv"
        path.write_text("source,target\n0,1\n0,2\n")
        with self.assertRaises(ValidationError):
            load_pairs(path)

    def test_cost_formats_keep_kind(self):
        cost = CostMatrix(np.random.default_rng(1).uniform(size=(3, 4)), "knn")
        for name in ("c.bfcm", "c.csv"):
            loaded = load_cost(save_cost(self.dir / name, cost))
            np.testing.assert_array_equal(loaded.values, cost.values)
            self.assertEqual(loaded.kind, "knn")

    def test_binary_coupling_keeps_marginals_and_report(self):
        values = np.array([[0.2, 0.1], [0.0, 0.5]])
        report = SolverReport(solver="linear", iterations=12, converged=True, marginal_violation=1e-7)
        pi = Coupling(values, [0.4, 0.6], [0.3, 0.7], report=report)
        loaded = load_coupling(save_coupling(self.dir / "pi.bfpi", pi))
        np.testing.assert_array_equal(loaded.values, values)
        np.testing.assert_array_equal(loaded.source_marginal, [0.4, 0.6])
        self.assertEqual(loaded.report.to_dict(), report.to_dict())

    def test_csv_coupling_uses_realized_sums(self):
        values = np.array([[0.2, 0.1], [0.0, 0.5]])
        pi = Coupling(values, [0.4, 0.6], [0.3, 0.7])
        loaded = load_coupling(save_coupling(self.dir / "pi.csv", pi))
        np.testing.assert_array_equal(loaded.values, values)
        np.testing.assert_allclose(loaded.source_marginal, [0.3, 0.5])
        self.assertEqual(loaded.report.solver, "file")


if __name__ == "__main__":
    unittest.main()
