"""
Export experiment reports in various formats.
"""
import logging
import os

import numpy as np
import pandas as pd

from .bench import ExperimentReport, RunRecord
from .errors import ConfigError, IOLError
from .settings import CACHE_DIR, MODULE_DIR
from .stream import save_stream_meta
from . import util


COLUMNS = ["run_id", "style", "rep", "t", "series", "stat", "value"]


def template(data, input_file, output_file=None):
    """Read template file, substitute markers and
       save the file elsewhere."""
    template_data = util.read_file_raw(input_file)

    try:
        template_data = "".join(template_data).format(**data)
    except (KeyError, ValueError):
        raise ConfigError("Syntax error in template file '%s'." % input_file)

    util.save_file(template_data, output_file)


def get_export_type(export_type):
    """Convert export type to the right file suffix."""
    return {
        "csv_long": ".csv",
        "json": ".json",
        "summary": "-summary.txt",
    }.get(export_type)


def report_rows(report):
    """Long-format rows: every series per repetition, then mean/std."""
    rows = []

    for record in report.records:
        for name in sorted(record.series):
            for t, value in enumerate(record.series[name]):
                rows.append((report.run_id, record.style, str(record.rep), t,
                             name, "value", value))

    for style in report.styles():
        for name, (mean, std) in report.aggregate(style).items():
            for t in range(len(mean)):
                rows.append((report.run_id, style, "all", t, name, "mean",
                             mean[t]))
                rows.append((report.run_id, style, "all", t, name, "std",
                             std[t]))

    return pd.DataFrame(rows, columns=COLUMNS)


def report_json(report):
    """JSON tree of a report, wall-clock timings included."""
    return {
        "version": report.version,
        "run_id": report.run_id,
        "config": report.config,
        "records": [{
            "style": r.style,
            "rep": r.rep,
            "series": {k: [float(x) for x in v] for k, v in r.series.items()},
            "scalars": {k: float(v) for k, v in r.scalars.items()},
            "meta": r.meta,
            "step_seconds": list(r.step_seconds),
        } for r in report.records],
    }


def summary_table(report):
    """Final values per style, mean (std) across repetitions."""
    lines = []

    for style in report.styles():
        lines.append("[%s]" % style)
        names = sorted(report.select(style)[0].scalars)

        for name in names:
            values = report.scalar(style, name)
            lines.append("  %-28s %.6g (%.3g)"
                         % (name, np.mean(values), np.std(values)))

    return "\n".join(lines)


def export_report(report, export_type="csv_long", output_dir=CACHE_DIR):
    """Write a report and return the file path."""
    suffix = get_export_type(export_type)

    if suffix is None:
        raise ConfigError("Unknown export format '%s'." % export_type)

    name = report.config.get("name", "report")
    output_file = os.path.join(output_dir,
                               "%s-%s%s" % (name, report.run_id, suffix))

    try:
        if export_type == "csv_long":
            util.create_dir(output_dir)
            report_rows(report).to_csv(output_file, index=False)

        elif export_type == "json":
            util.save_file_json(report_json(report), output_file)

        else:
            data = {
                "version": report.version,
                "name": name,
                "run_id": report.run_id,
                "task": report.config.get("task"),
                "styles": ", ".join(report.styles()),
                "reps": report.config.get("reps"),
                "table": summary_table(report),
            }
            template(data, os.path.join(MODULE_DIR, "templates",
                                        "summary.txt"), output_file)

    except OSError as err:
        raise IOLError("Can't write '%s': %s" % (output_file, err)) from None

    logging.info("Exported %s to %s.", export_type, output_file)
    return output_file


def stream_frame(stream):
    """One row per sample, tagged with its batch index."""
    frames = []

    for t, batch in enumerate(stream):
        data = {"batch": np.full(batch.size, t)}
        data.update(("x%d" % j, col) for j, col in enumerate(batch.x.T))
        data.update(("y%d" % j, col) for j, col in enumerate(batch.y.T))
        frames.append(pd.DataFrame(data))

    return pd.concat(frames, ignore_index=True)


def export_stream(stream, name, output_dir=CACHE_DIR):
    """Write a stream's rows and its metadata JSON side by side."""
    base = os.path.join(output_dir,
                        "%s-%s-stream" % (name, stream.digest()[:12]))
    output_file = base + ".csv"
    meta_file = base + ".json"

    try:
        util.create_dir(output_dir)
        stream_frame(stream).to_csv(output_file, index=False)
        save_stream_meta(stream, meta_file)

    except OSError as err:
        raise IOLError("Can't write '%s': %s" % (output_file, err)) from None

    logging.info("Exported stream to %s.", output_file)
    return output_file, meta_file


def load_report(input_file):
    """Read a report written with the json export type."""
    try:
        data = util.read_file_json(input_file)
    except (OSError, ValueError) as err:
        raise ConfigError("Can't read report '%s': %s"
                          % (input_file, err)) from None

    records = [RunRecord(r["style"], r["rep"],
                         {k: np.asarray(v, dtype=float)
                          for k, v in r["series"].items()},
                         r["scalars"], r["meta"], r["step_seconds"])
               for r in data["records"]]
    return ExperimentReport(data["run_id"], data["config"], records,
                            data["version"])
