"""Test preset functions."""
import unittest
import os

from pyiol import preset
from pyiol import util
from pyiol.errors import ConfigError
from pyiol.settings import MODULE_DIR


class TestPresets(unittest.TestCase):
    """Test preset functions."""

    def test_list(self):
        """> List bundled presets."""
        names = {p.name for p in preset.list_presets()}
        self.assertIn("synthetic_batch.json", names)
        self.assertIn("weather_izmir_baseline.json", names)

    def test_find(self):
        """> Resolve a bundled preset by name."""
        result = preset.find("synthetic_single")
        self.assertTrue(result.endswith("synthetic_single.json"))
        self.assertTrue(os.path.isfile(result))

    def test_find_path(self):
        """> Resolve a preset given as a path."""
        path = os.path.join(MODULE_DIR, "presets", "synthetic_batch.json")
        self.assertTrue(os.path.isfile(preset.find(path)))

    def test_unknown(self):
        """> Unknown presets are a config error."""
        with self.assertRaises(ConfigError):
            preset.find("does_not_exist")

    def test_file(self):
        """> Load a synthetic preset."""
        cfg = preset.file("synthetic_batch")
        self.assertEqual(cfg.task, "synthetic_batch")
        self.assertEqual(cfg.lambdas(), 0.005)
        self.assertEqual(cfg.stream["k"], 24)

    def test_overrides(self):
        """> Top-level overrides replace preset values, None is ignored."""
        cfg = preset.file("synthetic_single", reps=3, seed=None)
        self.assertEqual(cfg.reps, 3)
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.synthetic_args(0)["b"], 1)

    def test_bad_override(self):
        """> Unknown override keys are rejected."""
        with self.assertRaises(ConfigError):
            preset.file("synthetic_single", colour="red")

    def test_bundled_keys(self):
        """> Every bundled preset has the required sections."""
        for entry in preset.list_presets():
            data = util.read_file_json(entry.path)
            for key in ("name", "task", "network", "stream"):
                self.assertIn(key, data, entry.name)
            self.assertEqual(data["name"] + ".json", entry.name)

    def test_csv_presets(self):
        """> Dataset presets point at the fetched files."""
        data = util.read_file_json(os.path.join(
            MODULE_DIR, "presets", "letters_baseline.json"))
        self.assertEqual(data["network"]["L"], 3)
        self.assertEqual(data["network"]["N"], 720)
        self.assertEqual(data["network"]["log2_inv_lambda"], 5)

    def test_bad_json(self):
        """> Broken preset files are a config error."""
        tmp_file = "/tmp/iol_bad_preset.json"
        util.save_file("{", tmp_file)

        with self.assertRaises(ConfigError):
            preset.parse(tmp_file)

        os.remove(tmp_file)


if __name__ == "__main__":
    unittest.main()
