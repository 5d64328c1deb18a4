"""End-to-end checks on the bundled presets."""
import unittest
import shutil
import os

import numpy as np
import pandas as pd

from pyiol import bench
from pyiol import export
from pyiol import preset
from pyiol import util
from pyiol.settings import DATA_DIR, TOL_REPRODUCTION, TOL_SIMULATION


SLOW = os.getenv("PYIOL_SLOW") == "1"
TMP_DIR = "/tmp/iol_acceptance"


def have_dataset(name):
    return os.path.isfile(os.path.join(DATA_DIR, name))


class TestBoundSatisfaction(unittest.TestCase):
    """Cumulative regret stays under its bound on synthetic batch runs."""

    def test_bounds(self):
        """> 50 clipped trials per style, regret below the bound."""
        cfg = preset.file("synthetic_batch", reps=50, workers=1)
        report = bench.run_experiment(cfg)

        for style in ("ridge", "forward"):
            records = report.select(style)
            self.assertEqual(len(records), 50)

            for record in records:
                self.assertLessEqual(record.scalars["final_cr"],
                                     record.scalars["final_bound"])
                cr = record.series["cr"][1:]
                bound = record.series["cr_bound"][1:]
                self.assertTrue(np.all(cr <= bound))


@unittest.skipUnless(SLOW, "set PYIOL_SLOW=1 for the 200-trial simulation")
class TestSimulation(unittest.TestCase):
    """Oracle distances and regrets of the full synthetic batch simulation."""

    @classmethod
    def setUpClass(cls):
        cls.report = bench.simulate(preset.file("synthetic_batch"))
        cls.T = cls.report.config["stream"]["T"]

    def distances(self, style):
        return self.report.scalar(style, "final_oracle_distance")

    def test_ridge_distance(self):
        """> Mean final ridge distance near 0.521."""
        self.assertAlmostEqual(self.distances("ridge").mean(), 0.521,
                               delta=TOL_SIMULATION * 0.521)

    def test_forward_shrinkage(self):
        """> Forward ends above ridge by less than the tolerance."""
        ridge = self.distances("ridge").mean()
        forward = self.distances("forward").mean()
        self.assertGreater(forward, ridge)
        self.assertAlmostEqual(forward, ridge, delta=TOL_SIMULATION * ridge)

    @unittest.expectedFailure
    def test_forward_distance_reference(self):
        """> Mean final forward distance near 0.430, below ridge in 90%."""
        self.assertAlmostEqual(self.distances("forward").mean(), 0.430,
                               delta=TOL_SIMULATION * 0.430)
        self.assertGreaterEqual(self.report.below(
            "forward", "ridge", "final_oracle_distance"), 0.9)

    @unittest.expectedFailure
    def test_forward_cumulative_regret(self):
        """> Forward cumulative regret below ridge in 90% of trials."""
        self.assertGreaterEqual(self.report.below("forward", "ridge",
                                                  "final_cr"), 0.9)

    def test_immediate_regret_decays(self):
        """> Mean ridge immediate regret at T is below its value at T/10."""
        mean = self.report.aggregate("ridge")["ir"][0]
        self.assertLess(mean[self.T], mean[self.T // 10])

    def test_forward_terms_meet(self):
        """> The forward term gap at T is under 10% of the gap at T/10."""
        mean = self.report.aggregate("forward")["irt"][0]
        self.assertLess(abs(mean[self.T]), 0.1 * abs(mean[self.T // 10]))


class TestBaselines(unittest.TestCase):
    """Final ensemble metrics on the fetched datasets."""

    @unittest.skipUnless(have_dataset("wizmir.csv"),
                         "run pyiol/scripts/fetch_datasets.py first")
    def test_weather(self):
        """> Forward RMSE near 0.0213."""
        report = bench.run_experiment(preset.file("weather_izmir_baseline",
                                                  styles=["forward"]))
        rmse = report.final("forward", "test_rmse")
        self.assertAlmostEqual(rmse, 0.0213, delta=TOL_REPRODUCTION * 0.0213)

    @unittest.skipUnless(have_dataset("letter-recognition.csv"),
                         "run pyiol/scripts/fetch_datasets.py first")
    def test_letters(self):
        """> Forward accuracy near 0.9262 and above ridge."""
        report = bench.run_experiment(preset.file("letters_baseline"))
        forward = report.final("forward", "test_accuracy")
        ridge = report.final("ridge", "test_accuracy")

        self.assertAlmostEqual(forward, 0.9262,
                               delta=TOL_REPRODUCTION * 0.9262)
        self.assertGreater(forward, ridge)


class TestDeterminism(unittest.TestCase):
    """Equal seeds give byte-identical exports."""

    def tearDown(self):
        """> Clean up exports."""
        shutil.rmtree(TMP_DIR, ignore_errors=True)

    def export_twice(self, cfg):
        contents = []

        for run in ("a", "b"):
            out_dir = os.path.join(TMP_DIR, run)
            path = export.export_report(bench.run_experiment(cfg),
                                        "csv_long", out_dir)
            with open(path, "rb") as file:
                contents.append(file.read())
            os.remove(path)

        return contents

    def test_synthetic_preset(self):
        """> Two runs of a preset export the same bytes."""
        cfg = preset.file("synthetic_single", reps=2, workers=1)
        first, second = self.export_twice(cfg)
        self.assertEqual(first, second)

    def test_baseline_series(self):
        """> Exports carry the ensemble curve and per-layer box data."""
        cfg = bench.ExperimentConfig.from_dict({
            "name": "regression",
            "task": "regression_csv",
            "network": {"L": 4, "N": 8, "lambda": 0.1},
            "stream": {"path": os.path.abspath(
                "tests/test_files/regression.csv"),
                       "target_columns": ["y"], "batch_fraction": 0.1},
            "reps": 2,
        })
        first, second = self.export_twice(cfg)
        self.assertEqual(first, second)

        util.create_dir(TMP_DIR)
        path = os.path.join(TMP_DIR, "series.csv")
        with open(path, "wb") as file:
            file.write(first)

        series = set(pd.read_csv(path)["series"])
        for stat in ("min", "q1", "median", "q3", "max", "mean"):
            self.assertIn("layer_rmse_%s" % stat, series)
        for name in ("test_rmse", "test_rmse_cummean", "train_rmse"):
            self.assertIn(name, series)


if __name__ == "__main__":
    unittest.main()
