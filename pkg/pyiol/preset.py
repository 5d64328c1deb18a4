"""
Experiment preset handling.
"""
import logging
import os

from .bench import ExperimentConfig
from .errors import ConfigError
from .settings import CONF_DIR, MODULE_DIR
from . import util


def list_out():
    """List all presets in a pretty format."""
    presets = [preset.name.replace(".json", "") for preset in list_presets()]
    user_presets = [preset.name.replace(".json", "")
                    for preset in list_presets_user()]

    if user_presets:
        print("\033[1;32mUser Presets\033[0m:")
        print(" -", "\n - ".join(sorted(user_presets)))

    print("\033[1;32mPresets\033[0m:")
    print(" -", "\n - ".join(sorted(presets)))


def list_presets():
    """List all bundled preset files."""
    presets = os.scandir(os.path.join(MODULE_DIR, "presets"))
    return [p for p in presets if p.name.endswith(".json")]


def list_presets_user():
    """List user preset files."""
    preset_dir = os.path.join(CONF_DIR, "presets")

    if not os.path.isdir(preset_dir):
        return []

    return [p for p in os.scandir(preset_dir) if p.name.endswith(".json")]


def parse(preset_file):
    """Parse a preset file into an ExperimentConfig."""
    try:
        data = util.read_file_json(preset_file)
    except ValueError as err:
        raise ConfigError("'%s' is not valid JSON: %s"
                          % (preset_file, err)) from None

    return ExperimentConfig.from_dict(data)


def find(name):
    """Resolve a preset name or path to a file."""
    preset_name = name if name.endswith(".json") else name + ".json"

    user_preset_file = os.path.join(CONF_DIR, "presets", preset_name)
    preset_file = os.path.join(MODULE_DIR, "presets", preset_name)

    for path in (user_preset_file, preset_file, name):
        if os.path.isfile(path):
            return path

    raise ConfigError("No preset named '%s' found." % name)


def file(name, **overrides):
    """Load a preset by name or path, top-level keys overridden."""
    preset_file = find(name)
    logging.info("Using preset \033[1;37m%s\033[0m.",
                 os.path.basename(preset_file))

    if not overrides:
        return parse(preset_file)

    data = util.read_file_json(preset_file)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)
