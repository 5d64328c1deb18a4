#!/usr/bin/env python3
"""
Download the datasets used by the shipped presets into the data directory.

    python3 -m pyiol.scripts.fetch_datasets [name ...]

Files land in $PYIOL_DATA_DIR (default ~/.cache/iol/datasets) as plain
CSV with a header row, the layout the presets expect.
"""
import io
import logging
import os
import sys
import urllib.request
import zipfile

import pandas as pd

from pyiol.settings import DATA_DIR
from pyiol import util


UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
KEEL = "https://sci2s.ugr.es/keel/dataset/data/regression"

LETTER_COLUMNS = ["letter", "x-box", "y-box", "width", "high", "onpix",
                  "x-bar", "y-bar", "x2bar", "y2bar", "xybar", "x2ybr",
                  "xy2br", "x-ege", "xegvy", "y-ege", "yegvx"]

POKER_COLUMNS = ["S1", "C1", "S2", "C2", "S3", "C3", "S4", "C4", "S5", "C5",
                 "hand"]


def download(url):
    """Fetch a URL into memory."""
    logging.info("Downloading %s", url)

    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def parse_keel(text):
    """Parse a KEEL .dat file: '@' header lines then comma rows."""
    columns = []
    rows = []

    for line in text.splitlines():
        line = line.strip()

        if line.lower().startswith("@attribute"):
            columns.append(line.split()[1])

        elif line and not line.startswith("@"):
            rows.append(line)

    frame = pd.read_csv(io.StringIO("\n".join(rows)), header=None,
                        skipinitialspace=True)
    frame.columns = columns
    return frame


def fetch_wizmir():
    """Weather Izmir (KEEL), target Mean_temperature."""
    archive = zipfile.ZipFile(io.BytesIO(download(KEEL + "/wizmir.zip")))
    text = archive.read("wizmir.dat").decode("utf-8")
    return parse_keel(text)


def fetch_letters():
    """UCI letter recognition, letters mapped to 0..25."""
    raw = download(UCI + "/letter-recognition/letter-recognition.data")
    frame = pd.read_csv(io.BytesIO(raw), header=None, names=LETTER_COLUMNS)
    frame["letter"] = frame["letter"].map(lambda c: ord(c) - ord("A"))
    return frame


def fetch_poker():
    """UCI poker hand, training split."""
    raw = download(UCI + "/poker/poker-hand-training-true.data")
    return pd.read_csv(io.BytesIO(raw), header=None, names=POKER_COLUMNS)


DATASETS = {
    "wizmir.csv": fetch_wizmir,
    "letter-recognition.csv": fetch_letters,
    "poker-hand.csv": fetch_poker,
}


def main(names=None):
    """Fetch the requested (default all) datasets."""
    util.setup_logging()
    util.create_dir(DATA_DIR)

    for name in names or DATASETS:
        if name not in DATASETS:
            logging.error("Unknown dataset '%s', pick from %s.",
                          name, ", ".join(DATASETS))
            sys.exit(2)

        path = os.path.join(DATA_DIR, name)

        if os.path.isfile(path):
            logging.info("%s already present.", path)
            continue

        DATASETS[name]().to_csv(path, index=False)
        logging.info("Wrote %s.", path)


if __name__ == "__main__":
    main(sys.argv[1:])
