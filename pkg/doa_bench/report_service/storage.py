"""Запись таблиц результатов в CSV."""

import csv
import io
import math
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from ..core.models import MonteCarloReport, Spectrum, SweepRow
from .config import config


def format_number(value: float) -> str:
    """Не зависит от локали: точка как разделитель, inf/-inf/nan словами."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, config.FLOAT_FORMAT)


def spectrum_rows(spectrum: Spectrum) -> list[list[str]]:
    """Строки (угол, значение, значение в дБ относительно максимума)."""
    values = np.asarray(spectrum.values, dtype=float)
    peak = float(np.max(values))
    with np.errstate(divide="ignore"):
        relative_db = 10.0 * np.log10(values / peak)
    return [
        [format_number(angle), format_number(value), format_number(value_db)]
        for angle, value, value_db in zip(spectrum.grid, values, relative_db, strict=True)
    ]


def _sweep_cells(row: SweepRow) -> list[str]:
    return [
        format_number(row.snr_db),
        str(row.estimator),
        row.preprocessing_label,
        format_number(row.rmse_deg),
        format_number(row.resolution_rate),
        format_number(row.mean_spurious_db),
        str(row.runs),
    ]


def sweep_rows(report: MonteCarloReport) -> list[list[str]]:
    return [_sweep_cells(row) for row in report.rows]


def snapshot_sweep_rows(report: MonteCarloReport) -> list[list[str]]:
    """Строки свипа по числу отсчётов: N первым столбцом, далее как в sweep.csv."""
    return [[str(row.num_snapshots)] + _sweep_cells(row) for row in report.snapshot_rows]


class CsvStorage:
    """Атомарная запись CSV-таблиц с фиксированным порядком столбцов."""

    def write_table(
        self, path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]
    ) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        self._atomic_write(path, buffer.getvalue())
        return path

    def save_spectrum(self, path: Path, spectrum: Spectrum) -> Path:
        return self.write_table(path, config.SPECTRUM_COLUMNS, spectrum_rows(spectrum))

    def save_sweep(self, path: Path, report: MonteCarloReport) -> Path:
        return self.write_table(path, config.SWEEP_COLUMNS, sweep_rows(report))

    def save_snapshot_sweep(self, path: Path, report: MonteCarloReport) -> Path:
        return self.write_table(path, config.SNAPSHOT_SWEEP_COLUMNS, snapshot_sweep_rows(report))

    def _atomic_write(self, path: Path, text: str) -> None:
        """Атомарная запись данных в файл (через временный файл)."""
        with tempfile.NamedTemporaryFile(
            mode="w", encoding="utf-8", dir=path.parent, delete=False, suffix=".tmp", newline=""
        ) as tmp_file:
            tmp_file.write(text)
            tmp_file.flush()
            os.fsync(tmp_file.fileno())

        os.replace(tmp_file.name, path)
