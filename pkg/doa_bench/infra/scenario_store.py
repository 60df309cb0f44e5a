"""Загрузка сценариев из TOML: встроенные по имени или файлы по пути."""

import logging
import re
import threading
import tomllib
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

from ..core.exceptions import ConfigurationError, ScenarioParseError
from ..core.models import (
    ArrayGeometry,
    Comparison,
    CyclicSettings,
    DenoiseConfig,
    GridSpec,
    PreprocessSettings,
    QpskSource,
    ScenarioConfig,
)
from ..core.utils import db_to_power, validate_scenario

logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = "doa_bench.scenarios"

_SECTIONS: dict[str, frozenset[str]] = {
    "scenario": frozenset({"name", "description"}),
    "array": frozenset({"num_elements", "carrier_freq_hz", "spacing_m", "spacing_wavelengths"}),
    "sources": frozenset(
        {"doa_deg", "bit_rate_bps", "samples_per_bit", "power_linear", "isr_db", "role", "label"}
    ),
    "channel": frozenset({"fading"}),
    "noise": frozenset({"snr_db", "snr_sweep_db"}),
    "estimator": frozenset({"kind", "n_sources", "guard_deg"}),
    "cyclic": frozenset({"alpha_hz", "lag_samples", "conjugate_variant", "n_cyclic_sources"}),
    "preprocessing": frozenset(
        {
            "enabled",
            "wavelet",
            "level",
            "threshold_rule",
            "mode",
            "fixed_threshold",
            "beta_fraction",
            "order",
            "obw_spectrum",
            "reference_element",
        }
    ),
    "grid": frozenset({"start_deg", "stop_deg", "step_deg"}),
    "montecarlo": frozenset(
        {
            "num_snapshots",
            "snapshots_sweep",
            "num_runs",
            "base_seed",
            "match_tolerance_deg",
            "miss_penalty_deg",
            "spurious_floor_db",
            "comparisons",
        }
    ),
}

_LOCATION = re.compile(r"\(at line (\d+), column (\d+)\)")


def _decode_location(error: tomllib.TOMLDecodeError) -> tuple[Optional[int], Optional[int]]:
    line = getattr(error, "lineno", None)
    column = getattr(error, "colno", None)
    if line is None:
        found = _LOCATION.search(str(error))
        if found:
            line, column = int(found.group(1)), int(found.group(2))
    return line, column


def _section(document: dict[str, Any], name: str) -> dict[str, Any]:
    value = document.get(name, {})
    if not isinstance(value, dict):
        raise ConfigurationError(name, "ожидается таблица [секция]")
    _reject_unknown(value, _SECTIONS[name], name)
    return value


def _reject_unknown(table: dict[str, Any], allowed: frozenset[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigurationError(f"{path}.{key}", "неизвестный ключ")


def _build(path: str, factory: Callable[..., Any], **kwargs: Any) -> Any:
    """Создаёт объект модели, дописывая к пути ключа префикс секции."""
    try:
        return factory(**kwargs)
    except ConfigurationError as e:
        if "." not in e.field:
            raise ConfigurationError(path, e.message) from None
        leaf = e.field.split(".")[-1]
        raise ConfigurationError(f"{path}.{leaf}", e.message) from None
    except (TypeError, ValueError) as e:
        raise ConfigurationError(path, str(e)) from None


def _pick(table: dict[str, Any], mapping: dict[str, str]) -> dict[str, Any]:
    return {target: table[key] for key, target in mapping.items() if key in table}


def _geometry(table: dict[str, Any]) -> ArrayGeometry:
    if "spacing_m" in table and "spacing_wavelengths" in table:
        raise ConfigurationError("array.spacing_m", "задайте либо spacing_m, либо spacing_wavelengths")
    kwargs = _pick(table, {"num_elements": "num_elements", "carrier_freq_hz": "carrier_freq_hz"})
    geometry = _build("array", ArrayGeometry, **kwargs)
    if "spacing_m" in table:
        return _build("array", ArrayGeometry, spacing_m=table["spacing_m"], **kwargs)
    if "spacing_wavelengths" in table:
        spacing = table["spacing_wavelengths"]
        if not isinstance(spacing, (int, float)) or isinstance(spacing, bool) or spacing <= 0:
            raise ConfigurationError("array.spacing_wavelengths", "должно быть положительным числом")
        return _build("array", ArrayGeometry, spacing_m=spacing * geometry.wavelength, **kwargs)
    return geometry


def _sources(entries: Any) -> tuple[QpskSource, ...]:
    if not isinstance(entries, list) or not entries:
        raise ConfigurationError("sources", "нужен хотя бы один блок [[sources]]")
    built: list[QpskSource] = []
    for index, table in enumerate(entries):
        path = f"sources[{index}]"
        if not isinstance(table, dict):
            raise ConfigurationError(path, "ожидается таблица")
        _reject_unknown(table, _SECTIONS["sources"], path)
        if "doa_deg" not in table:
            raise ConfigurationError(f"{path}.doa_deg", "обязательный ключ")
        if "power_linear" in table and "isr_db" in table:
            raise ConfigurationError(f"{path}.isr_db", "задайте либо power_linear, либо isr_db")

        kwargs = _pick(
            table,
            {
                "doa_deg": "doa_deg",
                "bit_rate_bps": "bit_rate_bps",
                "samples_per_bit": "samples_per_bit",
                "power_linear": "power",
                "role": "role",
                "label": "label",
            },
        )
        if "isr_db" in table:
            if index == 0:
                raise ConfigurationError(f"{path}.isr_db", "первый источник задаёт опорную мощность")
            isr = table["isr_db"]
            if not isinstance(isr, (int, float)) or isinstance(isr, bool):
                raise ConfigurationError(f"{path}.isr_db", "должно быть числом")
            kwargs["power"] = built[0].power * db_to_power(isr)
        kwargs.setdefault("label", f"source{index}")
        built.append(_build(path, QpskSource, **kwargs))
    return tuple(built)


def _preprocessing(table: dict[str, Any]) -> PreprocessSettings:
    denoise = _build(
        "preprocessing",
        DenoiseConfig,
        **_pick(
            table,
            {
                "wavelet": "wavelet",
                "level": "level",
                "threshold_rule": "threshold_rule",
                "mode": "mode",
                "fixed_threshold": "fixed_threshold",
            },
        ),
    )
    return _build(
        "preprocessing",
        PreprocessSettings,
        denoise=denoise,
        **_pick(
            table,
            {
                "enabled": "enabled",
                "beta_fraction": "beta",
                "order": "order",
                "obw_spectrum": "obw_spectrum",
                "reference_element": "reference_element",
            },
        ),
    )


def _comparisons(value: Any) -> tuple[Comparison, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigurationError("montecarlo.comparisons", "ожидается список строк")
    return tuple(Comparison.from_label(v) for v in value)


def build_scenario(document: dict[str, Any], default_name: str = "custom") -> ScenarioConfig:
    """Собирает ScenarioConfig из разобранного TOML-документа и проверяет его."""
    for key in document:
        if key not in _SECTIONS:
            raise ConfigurationError(key, "неизвестная секция")

    meta = _section(document, "scenario")
    channel = _section(document, "channel")
    noise = _section(document, "noise")
    estimator = _section(document, "estimator")
    montecarlo = _section(document, "montecarlo")

    kwargs: dict[str, Any] = {
        "name": meta.get("name", default_name),
        "geometry": _geometry(_section(document, "array")),
        "sources": _sources(document.get("sources")),
        "cyclic": _build("cyclic", CyclicSettings, **_section(document, "cyclic")),
        "preprocessing": _preprocessing(_section(document, "preprocessing")),
        "grid": _build("grid", GridSpec, **_section(document, "grid")),
    }
    kwargs.update(_pick(channel, {"fading": "channel"}))
    kwargs.update(_pick(noise, {"snr_db": "snr_db", "snr_sweep_db": "snr_sweep_db"}))
    kwargs.update(
        _pick(estimator, {"kind": "estimator", "n_sources": "n_sources", "guard_deg": "guard_deg"})
    )
    kwargs.update(
        _pick(
            montecarlo,
            {
                "num_snapshots": "num_snapshots",
                "snapshots_sweep": "snapshots_sweep",
                "num_runs": "num_runs",
                "base_seed": "base_seed",
                "match_tolerance_deg": "match_tolerance_deg",
                "miss_penalty_deg": "miss_penalty_deg",
                "spurious_floor_db": "spurious_floor_db",
            },
        )
    )
    if "snapshots_sweep" in montecarlo and not isinstance(montecarlo["snapshots_sweep"], list):
        raise ConfigurationError("montecarlo.snapshots_sweep", "ожидается список целых чисел")
    if "comparisons" in montecarlo:
        kwargs["comparisons"] = _comparisons(montecarlo["comparisons"])

    scenario = _build_top_level(kwargs)
    return validate_scenario(scenario)


_TOP_LEVEL_PATHS = {
    "channel": "channel.fading",
    "snr_db": "noise.snr_db",
    "snr_sweep_db": "noise.snr_sweep_db",
    "estimator": "estimator.kind",
}


def _build_top_level(kwargs: dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as e:
        for name, path in _TOP_LEVEL_PATHS.items():
            if name in kwargs and str(kwargs[name]) in str(e):
                raise ConfigurationError(path, str(e)) from None
        raise ConfigurationError("scenario", str(e)) from None


class ScenarioStore:
    """Разрешает имена встроенных сценариев и пути к файлам, кэширует разбор."""

    _instance = None
    _lock = threading.RLock()

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self._initialized = True
        self._cache: dict[str, ScenarioConfig] = {}

    def bundled_names(self) -> list[str]:
        root = resources.files(BUNDLED_PACKAGE)
        return sorted(
            entry.name.removesuffix(".toml")
            for entry in root.iterdir()
            if entry.name.endswith(".toml")
        )

    def _read_text(self, reference: str) -> tuple[str, str]:
        """Возвращает (текст, имя по умолчанию)."""
        if reference in self.bundled_names():
            resource = resources.files(BUNDLED_PACKAGE) / f"{reference}.toml"
            return resource.read_text(encoding="utf-8"), reference

        path = Path(reference)
        try:
            return path.read_text(encoding="utf-8"), path.stem
        except FileNotFoundError:
            raise ScenarioParseError(reference, "файл не найден") from None
        except (OSError, UnicodeDecodeError) as e:
            raise ScenarioParseError(reference, f"не удалось прочитать файл: {e}") from None

    def load(self, reference: str) -> ScenarioConfig:
        """Загрузка сценария по имени встроенного или по пути к файлу."""
        with self._lock:
            if reference in self._cache:
                return self._cache[reference]

        text, default_name = self._read_text(reference)
        scenario = self.parse(text, source=reference, default_name=default_name)
        logger.debug(f"Сценарий '{reference}' загружен: {scenario.name}")
        # файлы на диске могут меняться между вызовами, кэшируются только встроенные
        if reference in self.bundled_names():
            with self._lock:
                self._cache[reference] = scenario
        return scenario

    def parse(
        self, text: str, source: str = "<string>", default_name: str = "custom"
    ) -> ScenarioConfig:
        try:
            document = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            line, column = _decode_location(e)
            message = _LOCATION.sub("", str(e)).strip()
            raise ScenarioParseError(source, message, line, column) from None
        return build_scenario(document, default_name)

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()


scenarios = ScenarioStore()
