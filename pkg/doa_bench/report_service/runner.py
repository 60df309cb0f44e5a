"""Координация команд: сценарий → вычисления → CSV и SVG."""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional

from ..core.exceptions import ConfigurationError
from ..core.models import Comparison, EstimatorKind, ScenarioConfig
from ..core.montecarlo import run_sweep, run_trial
from ..core.utils import validate_positive_int, validate_scenario
from ..decorators import log_action
from ..infra.scenario_store import scenarios
from ..infra.settings import settings
from .config import config
from .plots import plot_snapshot_sweep, plot_spectrum, plot_sweep
from .storage import CsvStorage


def _with_suffix(path: Path) -> Path:
    return path.with_name(f"{path.stem}{config.SNAPSHOT_SUFFIX}{path.suffix}")


class ExperimentRunner:
    """Координатор экспериментов для CLI."""

    def __init__(self):
        self.storage = CsvStorage()
        self.logger = logging.getLogger(__name__)

    @log_action("LOAD_SCENARIO")
    def prepare(
        self,
        scenario_path: str,
        seed: Optional[int] = None,
        runs: Optional[int] = None,
        snr_db: Optional[float] = None,
        estimator: Optional[str] = None,
        preprocess: Optional[bool] = None,
    ) -> ScenarioConfig:
        """Загрузка сценария и применение переопределений из командной строки."""
        scenario = scenarios.load(scenario_path)
        changes: dict[str, Any] = {}
        comparisons = list(scenario.comparisons)

        if seed is not None:
            changes["base_seed"] = validate_positive_int(seed, "seed", minimum=0)
        if runs is not None:
            changes["num_runs"] = validate_positive_int(runs, "runs")
        if snr_db is not None:
            changes["snr_db"] = snr_db
            changes["snr_sweep_db"] = (snr_db,)
        if estimator is not None:
            try:
                kind = EstimatorKind(estimator)
            except ValueError:
                raise ConfigurationError("--estimator", f"неизвестный оценщик '{estimator}'") from None
            changes["estimator"] = kind
            comparisons = [c for c in comparisons if c.estimator == kind] or [
                Comparison(kind, False),
                Comparison(kind, True),
            ]
        if preprocess is not None:
            changes["preprocessing"] = replace(scenario.preprocessing, enabled=preprocess)
            matching = [c for c in comparisons if c.preprocessing == preprocess]
            comparisons = matching or [Comparison(c.estimator, preprocess) for c in comparisons]
        if estimator is not None or preprocess is not None:
            changes["comparisons"] = tuple(dict.fromkeys(comparisons))

        if changes:
            scenario = scenario.with_overrides(**changes)
            self.logger.info(f"Переопределены параметры: {', '.join(sorted(changes))}")
        return validate_scenario(scenario)

    def _output(self, requested: Optional[str], default_name: str) -> Path:
        if requested:
            return Path(requested)
        return settings.output_dir / default_name

    def run_spectrum(
        self,
        scenario: ScenarioConfig,
        seed: int,
        out_csv: Optional[str] = None,
        out_svg: Optional[str] = None,
    ) -> dict[str, Any]:
        """Одно испытание с записью спектра."""
        trial = run_trial(scenario, seed)
        csv_path = self.storage.save_spectrum(
            self._output(out_csv, config.SPECTRUM_CSV), trial.spectrum
        )
        svg_path = plot_spectrum(
            trial.spectrum,
            trial.truth_deg,
            self._output(out_svg, config.SPECTRUM_SVG),
            title=f"{scenario.name}: {scenario.estimator}, ОСШ {scenario.snr_db:g} дБ",
        )
        self.logger.info(f"Спектр сохранён: {csv_path}, {svg_path}")
        return {"trial": trial, "csv": csv_path, "svg": svg_path}

    def run_sweep(
        self,
        scenario: ScenarioConfig,
        threads: int = 1,
        out_csv: Optional[str] = None,
        out_svg: Optional[str] = None,
    ) -> dict[str, Any]:
        """Монте-Карло свип с записью таблицы и графика СКО.

        Свип по числу отсчётов пишется рядом, с суффиксом _snapshots в имени файла.
        """
        report = run_sweep(scenario, threads=threads)
        csv_path = self.storage.save_sweep(self._output(out_csv, config.SWEEP_CSV), report)
        svg_path = plot_sweep(
            report, self._output(out_svg, config.SWEEP_SVG), title=f"{scenario.name}"
        )
        result: dict[str, Any] = {"report": report, "csv": csv_path, "svg": svg_path}
        if report.snapshot_rows:
            result["snapshots_csv"] = self.storage.save_snapshot_sweep(
                _with_suffix(csv_path), report
            )
            result["snapshots_svg"] = plot_snapshot_sweep(
                report,
                _with_suffix(svg_path),
                title=f"{scenario.name}: ОСШ {scenario.snr_db:g} дБ",
            )
        if report.failed_runs:
            self.logger.warning(f"Неудачных прогонов: {report.failed_runs}")
        saved = ", ".join(str(v) for k, v in result.items() if k != "report")
        self.logger.info(f"Свип сохранён: {saved}")
        return result
