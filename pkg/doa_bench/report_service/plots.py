"""SVG-графики: пространственный спектр, СКО в зависимости от ОСШ и от числа отсчётов."""

import math
from collections.abc import Sequence
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from ..core.models import ALL_COMPARISONS, MonteCarloReport, Spectrum
from .config import config


def _save_svg(figure: Figure, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": config.SVG_HASHSALT}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def plot_spectrum(
    spectrum: Spectrum, truth_deg: Sequence[float], path: Path, title: str = ""
) -> Path:
    """Нормированный спектр в дБ с вертикальными отметками истинных направлений."""
    values = np.asarray(spectrum.values, dtype=float)
    with np.errstate(divide="ignore"):
        relative_db = 10.0 * np.log10(values / np.max(values))

    figure = Figure(figsize=config.FIGURE_SIZE_IN)
    axes = figure.add_subplot()
    axes.plot(spectrum.grid, relative_db, linewidth=1.0, label=str(spectrum.kind))
    for index, angle in enumerate(truth_deg):
        axes.axvline(
            angle, color="tab:red", linestyle="--", linewidth=0.8,
            label="истинное направление" if index == 0 else None,
        )
    axes.set_xlabel("Угол прихода, °")
    axes.set_ylabel("Псевдоспектр, дБ")
    axes.set_xlim(float(spectrum.grid[0]), float(spectrum.grid[-1]))
    axes.set_title(title or str(spectrum.kind))
    axes.grid(True, alpha=0.3)
    axes.legend(loc="upper right")
    figure.tight_layout()
    return _save_svg(figure, path)


def _rmse_curves(
    report: MonteCarloReport, path: Path, by_snapshots: bool, labels: tuple[str, str]
) -> Path:
    figure = Figure(figsize=config.FIGURE_SIZE_IN)
    axes = figure.add_subplot()
    source = report.snapshot_rows if by_snapshots else report.rows
    present = {(row.estimator, row.preprocessing) for row in source}
    ordered = [c for c in ALL_COMPARISONS if (c.estimator, c.preprocessing) in present]

    for comparison in ordered:
        rows = report.rows_for(comparison.estimator, comparison.preprocessing, by_snapshots)
        points = [
            (r.num_snapshots if by_snapshots else r.snr_db, r.rmse_deg)
            for r in rows
            if not math.isnan(r.rmse_deg)
        ]
        if not points:
            continue
        x, rmse = zip(*sorted(points), strict=True)
        axes.plot(x, rmse, marker="o", label=comparison.label)

    xlabel, title = labels
    if by_snapshots:
        axes.set_xscale("log")
    axes.set_xlabel(xlabel)
    axes.set_ylabel("СКО, °")
    axes.set_title(title)
    axes.grid(True, alpha=0.3)
    axes.legend(loc="upper right")
    figure.tight_layout()
    return _save_svg(figure, path)


def plot_sweep(report: MonteCarloReport, path: Path, title: str = "") -> Path:
    """Кривые СКО от ОСШ, по одной на каждую комбинацию оценщика и предобработки."""
    return _rmse_curves(report, path, False, ("ОСШ, дБ", title or "СКО оценки направления"))


def plot_snapshot_sweep(report: MonteCarloReport, path: Path, title: str = "") -> Path:
    """СКО от числа отсчётов N (логарифмическая ось) при фиксированном ОСШ."""
    return _rmse_curves(
        report, path, True, ("Число отсчётов N", title or "СКО в зависимости от числа отсчётов")
    )
