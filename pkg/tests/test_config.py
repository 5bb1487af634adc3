import io
import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from pydantic import ValidationError as PydanticValidationError


PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from bridgeflow.config import (
    BridgeflowSettings,
    ExperimentConfig,
    OTConfig,
    canonical_json,
    config_hash,
    load_experiment_config,
    load_settings,
)
from bridgeflow.errors import ConnectivityError, InputError, NumericalError, TrainingError
from bridgeflow.log import debug_print, get_log_level, is_debug_enabled, set_log_level


CLUSTERS = {"kind": "paired_gaussian_clusters", "n": 40, "classes": 2}


class SettingsTests(unittest.TestCase):
    @mock.patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        settings = BridgeflowSettings(_env_file=None)
        self.assertEqual(settings.threads, 1)
        self.assertEqual(settings.log_level, "INFO")
        self.assertFalse(settings.debug)
        self.assertEqual(settings.effective_log_level(), "INFO")

    @mock.patch.dict(
        os.environ,
        {"BRIDGEFLOW_THREADS": "4", "BRIDGEFLOW_LOG_LEVEL": "warning", "BRIDGEFLOW_DATA_DIR": "/data/x"},
        clear=True,
    )
    def test_environment_overrides(self):
        settings = BridgeflowSettings(_env_file=None)
        self.assertEqual(settings.threads, 4)
        self.assertEqual(settings.log_level, "WARNING")
        self.assertEqual(settings.resolve_data_path("a.csv"), Path("/data/x") / "a.csv")
        self.assertEqual(settings.resolve_data_path("/abs/a.csv"), Path("/abs/a.csv"))

    @mock.patch.dict(os.environ, {"BRIDGEFLOW_DEBUG": "true"}, clear=True)
    def test_debug_wins_over_level(self):
        self.assertEqual(BridgeflowSettings(_env_file=None).effective_log_level(), "DEBUG")

    @mock.patch.dict(os.environ, {"BRIDGEFLOW_THREADS": "0"}, clear=True)
    def test_invalid_threads(self):
        with mock.patch("bridgeflow.config.BridgeflowSettings", lambda: BridgeflowSettings(_env_file=None)):
            with self.assertRaises(ValueError):
                load_settings()


class ExperimentConfigTests(unittest.TestCase):
    def test_exactly_one_dataset(self):
        with self.assertRaises(PydanticValidationError):
            ExperimentConfig()
        with self.assertRaises(PydanticValidationError):
            ExperimentConfig(synthetic=CLUSTERS, dataset={"x_path": "x.csv", "y_path": "y.csv"})
        self.assertEqual(ExperimentConfig(synthetic=CLUSTERS).arch, "adaln_small")

    def test_single_space_kind_needs_target(self):
        with self.assertRaises(PydanticValidationError):
            ExperimentConfig(synthetic={"kind": "spiral_2d", "n": 50})
        config = ExperimentConfig(
            synthetic={"kind": "spiral_2d", "n": 50},
            target_synthetic={"kind": "swiss_roll_3d", "n": 50},
            alignment={"solver": "gw"},
        )
        self.assertEqual(config.alignment.solver, "gw")

    def test_unknown_fields_rejected(self):
        with self.assertRaises(PydanticValidationError):
            ExperimentConfig(synthetic=CLUSTERS, learning_rate=0.1)
        with self.assertRaises(PydanticValidationError):
            OTConfig(tau_x=1.5)

    def test_hash_is_stable_and_sensitive(self):
        first = ExperimentConfig(synthetic=CLUSTERS, seed=3)
        second = ExperimentConfig.model_validate_json(canonical_json(first))
        self.assertEqual(config_hash(first), config_hash(second))
        self.assertEqual(len(config_hash(first)), 64)
        changed = ExperimentConfig(synthetic=CLUSTERS, seed=4)
        self.assertNotEqual(config_hash(first), config_hash(changed))

    def test_train_seed_follows_top_level_seed(self):
        config = ExperimentConfig(synthetic=CLUSTERS, seed=7)
        self.assertEqual(config.train.seed, 7)
        reloaded = ExperimentConfig.model_validate_json(canonical_json(config))
        self.assertEqual(reloaded.train.seed, 7)
        self.assertEqual(config_hash(reloaded), config_hash(config))

        pinned = ExperimentConfig(synthetic=CLUSTERS, seed=7, train={"seed": 3})
        self.assertEqual(pinned.train.seed, 3)

        first = ExperimentConfig(synthetic=CLUSTERS, seed=1)
        second = ExperimentConfig(synthetic=CLUSTERS, seed=2)
        self.assertNotEqual(first.train.seed, second.train.seed)

    def test_load_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "exp.json"
            path.write_text(json.dumps({"synthetic": CLUSTERS, "train": {"T_iter": 5}}))
            config = load_experiment_config(str(path))
        self.assertEqual(config.train.T_iter, 5)
        self.assertEqual(config.referenced_files(), [])
        with self.assertRaises(FileNotFoundError):
            load_experiment_config("/nonexistent/exp.json")

    def test_referenced_files(self):
        config = ExperimentConfig(dataset={"x_path": "x.csv", "y_path": "y.csv", "pairs_path": "p.csv"})
        self.assertEqual(config.referenced_files(), ["x.csv", "y.csv", "p.csv"])


class LoggingTests(unittest.TestCase):
    def tearDown(self):
        set_log_level("INFO")

    def test_level_filtering(self):
        set_log_level("warning")
        self.assertEqual(get_log_level(), "WARNING")
        self.assertFalse(is_debug_enabled())
        with mock.patch("sys.stderr", new_callable=io.StringIO) as stderr:
            debug_print("[INFO] hidden")
            debug_print("[ERROR] shown")
        self.assertEqual(stderr.getvalue(), "[ERROR] shown\n")

    def test_debug_level(self):
        set_log_level("DEBUG")
        self.assertTrue(is_debug_enabled())
        with self.assertRaises(ValueError):
            set_log_level("LOUD")


class ErrorPayloadTests(unittest.TestCase):
    def test_codes_and_hierarchy(self):
        error = ConnectivityError("graph split", {"components": 2})
        self.assertIsInstance(error, InputError)
        self.assertEqual(error.to_dict()["details"], {"components": 2})
        self.assertIsInstance(TrainingError("nan"), NumericalError)
        self.assertNotEqual(InputError("x").code, NumericalError("x").code)
        self.assertEqual(InputError("x").to_dict(), {"code": InputError.code, "message": "x", "details": {}})


if __name__ == "__main__":
    unittest.main()
