import math
import os
from pathlib import Path

import orjson

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2


def output_dir(path: str | Path) -> Path:
    os.makedirs(path, exist_ok=True)
    return Path(path)


def _finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_finite(v) for v in value]
    return value


def write_json(path: str | Path, payload) -> str:
    """Sorted-key JSON with non-finite floats written as null."""
    Path(path).write_bytes(orjson.dumps(_finite(payload), option=JSON_OPTIONS))
    return str(path)


def write_plot_json(
    path: str | Path,
    data_file: str,
    x: str,
    series: list[str],
    title: str,
    x_label: str | None = None,
    y_label: str | None = None,
    log_log: bool = False,
) -> str:
    """Axis and series description of a CSV, for rendering elsewhere."""
    payload = {
        "title": title,
        "data": os.path.basename(data_file),
        "x": {"column": x, "label": x_label or x, "scale": "log" if log_log else "linear"},
        "y": {"label": y_label or "", "scale": "log" if log_log else "linear"},
        "series": [{"column": name, "label": name} for name in series],
    }
    return write_json(path, payload)
