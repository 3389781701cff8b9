"""CSV and JSON input/output with deterministic formatting.

All floating-point output is formatted at 12 significant digits so repeated
runs with the same seed produce byte-identical files. A single non-numeric
column is tolerated on input when it is the class-label column (named
``class`` with a header, or the last column without one); it is split out and
returned separately.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import time
from typing import Any, Iterable

import numpy as np

FLOAT_FMT = "%.12g"


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def read_matrix_csv(
    path: str, header: bool = True
) -> tuple[np.ndarray, list[str] | None, np.ndarray | None]:
    """Read a dense numeric CSV; returns (data, col_names, class_labels).

    ``class_labels`` is non-None only when exactly one non-numeric column is
    present and identifiable as the label column.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    names: list[str] | None = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    numeric = [all(_is_float(r[j]) for r in rows) for j in range(width)]
    bad = [j for j, ok in enumerate(numeric) if not ok]
    class_labels = None
    if bad:
        j = bad[0]
        named_class = names is not None and names[j].lower() == "class"
        last_unnamed = names is None and j == width - 1
        if len(bad) > 1 or not (named_class or last_unnamed):
            cols = ", ".join(
                names[j] if names else f"column {j}" for j in bad
            )
            raise ValueError(f"{path}: non-numeric columns: {cols}")
        class_labels = np.array([r[j] for r in rows])
        rows = [r[:j] + r[j + 1 :] for r in rows]
        if names is not None:
            names = names[:j] + names[j + 1 :]
    data = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    return data, names, class_labels


def write_matrix_csv(
    path: str,
    data: np.ndarray,
    col_names: Iterable[str] | None = None,
    class_labels: np.ndarray | None = None,
    fmt: str = FLOAT_FMT,
) -> None:
    data = np.asarray(data)
    if data.ndim == 1:
        data = data[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if col_names is not None:
            hdr = list(col_names)
            if class_labels is not None:
                hdr.append("class")
            writer.writerow(hdr)
        for i in range(data.shape[0]):
            row = [fmt % v for v in data[i]]
            if class_labels is not None:
                row.append(str(class_labels[i]))
            writer.writerow(row)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(FLOAT_FMT % float(obj))
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def dumps_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(
    path: str,
    subcommand: str,
    arguments: dict,
    input_paths: Iterable[str],
    outputs: Iterable[str],
    seed: int | None,
    started: float,
    version: str,
) -> None:
    """Atomic run manifest written alongside every output set."""
    payload = {
        "subcommand": subcommand,
        "arguments": _jsonable(arguments),
        "input_sha256": {p: sha256_file(p) for p in input_paths},
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "seed": seed,
        "tool_version": version,
        "elapsed_seconds": round(time.perf_counter() - started, 6),
    }
    write_json(path, payload)
