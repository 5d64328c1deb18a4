"""
Misc helper functions.
"""
import base64
import hashlib
import json
import logging
import os
import sys

import numpy as np

from .errors import ConfigError
from .settings import DEFAULT_RNG


def read_file_json(input_file):
    """Read data from a json file."""
    with open(input_file, "r") as json_file:
        return json.load(json_file)


def read_file_raw(input_file):
    """Read data from a file as is, don't strip
       newlines or other special characters.."""
    with open(input_file, "r") as file:
        return file.readlines()


def save_file(data, export_file):
    """Write data to a file."""
    create_dir(os.path.dirname(export_file))

    with open(export_file, "w") as file:
        file.write(data)


def save_file_json(data, export_file):
    """Write data to a json file."""
    create_dir(os.path.dirname(export_file))

    with open(export_file, "w") as file:
        json.dump(data, file, indent=4)


def create_dir(directory):
    """Alias to create a directory, no-op for ''."""
    if directory:
        os.makedirs(directory, exist_ok=True)


def setup_logging(level=logging.INFO):
    """Logging config."""
    logging.basicConfig(format=("[%(levelname)s\033[0m] "
                                "\033[1;31m%(module)s\033[0m: "
                                "%(message)s"),
                        level=level,
                        stream=sys.stdout)
    logging.addLevelName(logging.ERROR, '\033[1;31mE')
    logging.addLevelName(logging.INFO, '\033[1;32mI')
    logging.addLevelName(logging.WARNING, '\033[1;33mW')
    logging.addLevelName(logging.DEBUG, '\033[1;34mD')


def make_rng(seed, name=DEFAULT_RNG):
    """Create a named, seeded numpy generator."""
    try:
        bit_generator = getattr(np.random, name)
    except AttributeError:
        raise ConfigError("Unknown RNG '%s'." % name) from None

    return np.random.Generator(bit_generator(seed))


def frozen(array, dtype=float):
    """Return a read-only float copy of an array."""
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def encode_array(array):
    """Encode a matrix as row-major little-endian float64 base64."""
    array = np.ascontiguousarray(array, dtype="<f8")
    return {
        "shape": list(array.shape),
        "dtype": "<f8",
        "order": "C",
        "data": base64.b64encode(array.tobytes()).decode("ascii"),
    }


def decode_array(data):
    """Inverse of encode_array()."""
    raw = base64.b64decode(data["data"])
    return np.frombuffer(raw, dtype=data["dtype"]).reshape(data["shape"])


def array_digest(*arrays):
    """SHA-256 of a sequence of arrays (shape and bytes)."""
    digest = hashlib.sha256()

    for array in arrays:
        array = np.ascontiguousarray(array, dtype="<f8")
        digest.update(str(array.shape).encode())
        digest.update(array.tobytes())

    return digest.hexdigest()
