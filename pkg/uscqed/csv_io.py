"""Result files: ``<prefix>_<experiment>.csv`` plus a JSON sidecar with the
resolved configuration and run metadata."""

from __future__ import annotations

import csv
import json
import math
import pathlib
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % value
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return None  # arrays belong in the CSV
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


class ResultWriter:
    def __init__(self, directory: str | pathlib.Path, prefix: str):
        self.directory = pathlib.Path(directory)
        self.prefix = prefix

    def path_for(self, experiment: str, suffix: str = "csv", tag: str = "") -> pathlib.Path:
        stem = f"{self.prefix}_{experiment}" + (f"_{tag}" if tag else "")
        return self.directory / f"{stem}.{suffix}"

    def write_rows(
        self,
        experiment: str,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        *,
        tag: str = "",
    ) -> pathlib.Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(experiment, tag=tag)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(list(header))
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(f"row has {len(row)} columns, header has {len(header)}")
                writer.writerow([format_value(v) for v in row])
        return path

    def write_sidecar(self, experiment: str, payload: Mapping[str, Any], *, tag: str = "") -> pathlib.Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(experiment, suffix="json", tag=tag)
        document = {"uscqed_version": __version__, **_jsonable(dict(payload))}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
        return path

    def write_diagnostics(self, experiment: str, payload: Mapping[str, Any]) -> pathlib.Path:
        return self.write_sidecar(experiment, payload, tag="diagnostics")


class ResultReader:
    @staticmethod
    def load_csv(path: str | pathlib.Path) -> tuple[list[str], np.ndarray]:
        with open(path, "r", newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader)
            rows = [[float(cell) for cell in row] for row in reader if row]
        data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
        return header, data

    @staticmethod
    def load_sidecar(path: str | pathlib.Path) -> dict[str, Any]:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)


__all__ = ["ResultWriter", "ResultReader", "format_value"]
