"""Консольный интерфейс приложения с обработкой ошибок."""

import logging
import math
import sys
from collections.abc import Sequence
from typing import Any, Optional

from prettytable import PrettyTable

from doa_bench.core.exceptions import (
    ConfigurationError,
    ContractError,
    DoaBenchError,
    ModelViolationError,
    ScenarioParseError,
)
from doa_bench.core.models import ScenarioConfig, SweepRow
from doa_bench.infra.settings import settings
from doa_bench.logging_config import setup_logging
from doa_bench.report_service.runner import ExperimentRunner
from doa_bench.report_service.storage import format_number

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_RUNTIME_ERROR = 3

HELP_TEXT = """
Использование:
  doa-bench spectrum <сценарий> [--seed K] [--out-csv P] [--out-svg P]
  doa-bench sweep <сценарий> [--seed K] [--out-csv P] [--out-svg P] [--threads T]
  doa-bench validate <сценарий>

<сценарий>: путь к TOML-файлу или имя встроенного (paper_default, paper_cyclic_4mhz,
low_snr_pipeline, snapshot_sweep).

Дополнительные параметры:
  --runs N             число прогонов Монте-Карло
  --snr-db X           единственное значение ОСШ вместо списка из сценария
  --estimator E        music | cyclic_music
  --preprocess on|off  включить/выключить шумоподавление и фильтрацию по OBW
  --threads T          число потоков свипа (0: по числу процессоров)
  --log-level L        DEBUG | INFO | WARNING | ERROR

Коды возврата: 0 успех, 2 ошибка входных данных, 3 ошибка вычислений.
"""

_INPUT_ERRORS = (ScenarioParseError, ConfigurationError, ModelViolationError, ContractError)


class UsageError(Exception):
    """Неверные аргументы командной строки."""


def _flatten(value: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(value, dict):
        items = []
        for key, nested in value.items():
            items.extend(_flatten(nested, f"{prefix}.{key}" if prefix else str(key)))
        return items
    if isinstance(value, (list, tuple)) and any(isinstance(v, dict) for v in value):
        items = []
        for index, nested in enumerate(value):
            items.extend(_flatten(nested, f"{prefix}[{index}]"))
        return items
    return [(prefix, value)]


def _render(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    return str(value)


def _sweep_table(rows: Sequence[SweepRow], with_snapshots: bool = False) -> PrettyTable:
    numeric = ["ОСШ, дБ", "СКО, °", "Разрешение", "Паразит., дБ", "Прогонов"]
    if with_snapshots:
        numeric.insert(0, "N")
    table = PrettyTable()
    table.field_names = (["N"] if with_snapshots else []) + [
        "ОСШ, дБ", "Оценщик", "Предобработка", "СКО, °", "Разрешение", "Паразит., дБ", "Прогонов"
    ]
    for column in numeric:
        table.align[column] = "r"
    for row in rows:
        cells = [
            f"{row.snr_db:g}",
            str(row.estimator),
            row.preprocessing_label,
            "н/д" if math.isnan(row.rmse_deg) else f"{row.rmse_deg:.4f}",
            "н/д" if math.isnan(row.resolution_rate) else f"{row.resolution_rate:.3f}",
            format_number(round(row.mean_spurious_db, 2)),
            f"{row.runs}" + (f" (+{row.failed_runs} ошибок)" if row.failed_runs else ""),
        ]
        table.add_row(([str(row.num_snapshots)] if with_snapshots else []) + cells)
    return table


class CLI:
    """Консольный интерфейс симулятора."""

    def __init__(self):
        self.runner = ExperimentRunner()
        self.logger = logging.getLogger(__name__)

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """Выполнение одной команды; возвращает код завершения."""
        argv = list(sys.argv[1:] if argv is None else argv)
        if not argv or argv[0] in ("help", "--help", "-h"):
            print(HELP_TEXT)
            return EXIT_OK if argv else EXIT_INPUT_ERROR

        command = argv[0].lower()
        try:
            positional, args = self._parse_args(argv[1:])
            self._setup_logging(args)
            if len(positional) != 1:
                raise UsageError("требуется ровно один аргумент <сценарий>")
            scenario_path = positional[0]

            if command == "spectrum":
                return self._cmd_spectrum(scenario_path, args)
            if command == "sweep":
                return self._cmd_sweep(scenario_path, args)
            if command == "validate":
                return self._cmd_validate(scenario_path, args)
            raise UsageError(f"неизвестная команда: {command}. Введите 'help' для справки.")
        except UsageError as e:
            print(f"❌ {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR

    def _parse_args(self, arg_list: list[str]) -> tuple[list[str], dict[str, Any]]:
        """Парсинг позиционных аргументов и пар вида --key value."""
        positional: list[str] = []
        args: dict[str, Any] = {}
        i = 0
        while i < len(arg_list):
            token = arg_list[i]
            if token.startswith("--"):
                key = token[2:]
                if i + 1 < len(arg_list) and not arg_list[i + 1].startswith("--"):
                    args[key] = arg_list[i + 1]
                    i += 2
                else:
                    args[key] = True
                    i += 1
            else:
                positional.append(token)
                i += 1
        return positional, args

    def _setup_logging(self, args: dict[str, Any]) -> None:
        level = settings.log_level
        if "log-level" in args:
            level = logging.getLevelName(str(args["log-level"]).upper())
            if not isinstance(level, int):
                raise UsageError(f"неизвестный уровень логирования: {args['log-level']}")
        setup_logging(
            log_file=settings.log_file, level=level, json_format=settings.log_json
        )

    @staticmethod
    def _option(args: dict[str, Any], key: str, cast: type) -> Any:
        if key not in args:
            return None
        value = args[key]
        if value is True:
            raise UsageError(f"для --{key} требуется значение")
        try:
            return cast(value)
        except ValueError:
            raise UsageError(f"некорректное значение --{key}: {value}") from None

    def _preprocess_flag(self, args: dict[str, Any]) -> Optional[bool]:
        value = self._option(args, "preprocess", str)
        if value is None:
            return None
        if value.lower() not in ("on", "off"):
            raise UsageError(f"--preprocess принимает on|off, получено {value}")
        return value.lower() == "on"

    def _load(self, scenario_path: str, args: dict[str, Any]) -> Optional[ScenarioConfig]:
        """Фаза загрузки: любые ошибки здесь считаются ошибками входных данных."""
        try:
            return self.runner.prepare(
                scenario_path,
                seed=self._option(args, "seed", int),
                runs=self._option(args, "runs", int),
                snr_db=self._option(args, "snr-db", float),
                estimator=self._option(args, "estimator", str),
                preprocess=self._preprocess_flag(args),
            )
        except ScenarioParseError as e:
            print(f"❌ Сценарий: {e}", file=sys.stderr)
        except ModelViolationError as e:
            print(f"❌ Модель: {e}", file=sys.stderr)
        except (ConfigurationError, ContractError) as e:
            print(f"❌ Конфигурация: {e}", file=sys.stderr)
        return None

    def _compute(self, action, *args, **kwargs) -> tuple[int, Any]:
        """Фаза вычислений: ошибки отображаются в код 3."""
        try:
            return EXIT_OK, action(*args, **kwargs)
        except DoaBenchError as e:
            print(f"❌ Ошибка вычислений: {e}", file=sys.stderr)
        except (OSError, ValueError, ArithmeticError) as e:
            print(f"❌ Ошибка выполнения: {type(e).__name__}: {e}", file=sys.stderr)
            self.logger.exception("Ошибка при выполнении команды")
        return EXIT_RUNTIME_ERROR, None

    def _cmd_spectrum(self, scenario_path: str, args: dict[str, Any]) -> int:
        scenario = self._load(scenario_path, args)
        if scenario is None:
            return EXIT_INPUT_ERROR

        status, result = self._compute(
            self.runner.run_spectrum,
            scenario,
            scenario.base_seed,
            out_csv=self._option(args, "out-csv", str),
            out_svg=self._option(args, "out-svg", str),
        )
        if status != EXIT_OK:
            return status

        trial = result["trial"]
        table = PrettyTable()
        table.field_names = ["Направление", "Оценка, °", "Пик"]
        table.align["Оценка, °"] = "r"
        table.align["Пик"] = "r"
        for index, (angle, peak) in enumerate(
            zip(trial.estimation.doas_deg, trial.estimation.peak_values, strict=True)
        ):
            table.add_row([index + 1, f"{angle:.3f}", f"{peak:.4g}"])

        print(f"\n{scenario.name}: {scenario.estimator}, предобработка "
              f"{'вкл' if scenario.preprocessing.enabled else 'выкл'}, "
              f"ОСШ {scenario.snr_db:g} дБ, seed={trial.seed}")
        print(table)
        print(f"Истинные направления: {', '.join(f'{t:g}°' for t in trial.truth_deg)}")
        print(f"spurious_peak_db = {format_number(trial.spurious_db)}")
        for warning in trial.spectrum.warnings:
            print(f"⚠️  {warning}")
        if not trial.estimation.complete:
            print("⚠️  Найдено меньше максимумов, чем предполагаемых источников")
        print(f"✅ CSV: {result['csv']}\n✅ SVG: {result['svg']}")
        return EXIT_OK

    def _cmd_sweep(self, scenario_path: str, args: dict[str, Any]) -> int:
        scenario = self._load(scenario_path, args)
        if scenario is None:
            return EXIT_INPUT_ERROR
        threads = self._option(args, "threads", int)
        if threads is None:
            threads = settings.default_threads
        if threads < 0:
            print("❌ --threads не может быть отрицательным", file=sys.stderr)
            return EXIT_INPUT_ERROR

        status, result = self._compute(
            self.runner.run_sweep,
            scenario,
            threads=threads,
            out_csv=self._option(args, "out-csv", str),
            out_svg=self._option(args, "out-svg", str),
        )
        if status != EXIT_OK:
            return status

        report = result["report"]
        print(f"\n{scenario.name}: {scenario.num_runs} прогонов на точку, "
              f"{report.elapsed_s:.1f} с")
        print(_sweep_table(report.rows))
        print(f"✅ CSV: {result['csv']}\n✅ SVG: {result['svg']}")
        if report.snapshot_rows:
            print(f"\nСвип по числу отсчётов при ОСШ {scenario.snr_db:g} дБ")
            print(_sweep_table(report.snapshot_rows, with_snapshots=True))
            print(f"✅ CSV: {result['snapshots_csv']}\n✅ SVG: {result['snapshots_svg']}")
        return EXIT_OK

    def _cmd_validate(self, scenario_path: str, args: dict[str, Any]) -> int:
        scenario = self._load(scenario_path, args)
        if scenario is None:
            return EXIT_INPUT_ERROR

        table = PrettyTable()
        table.field_names = ["Параметр", "Значение"]
        table.align["Параметр"] = "l"
        table.align["Значение"] = "l"
        for key, value in _flatten(scenario.to_dict()):
            table.add_row([key, _render(value)])
        print(table)
        print(f"✅ Сценарий '{scenario.name}' корректен")
        return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Точка входа консольного скрипта doa-bench."""
    sys.exit(CLI().run(argv))
