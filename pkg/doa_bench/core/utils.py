"""Вспомогательные функции: валидация сценария, генераторы случайных чисел, децибелы."""

import math
from enum import IntEnum
from typing import Any

import numpy as np

from .exceptions import ConfigurationError, ModelViolationError
from .models import EstimatorKind, GridSpec, RealArray, ScenarioConfig


class StreamRole(IntEnum):
    """Независимые потоки случайных чисел внутри одного испытания."""

    SOURCE_BITS = 0
    FADING = 1
    NOISE = 2


def rng_stream(seed: int, role: StreamRole, index: int = 0) -> np.random.Generator:
    """Счётчиковый генератор Philox, ключ (seed, роль, индекс)."""
    if seed < 0:
        raise ConfigurationError("seed", "должен быть неотрицательным")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(role), int(index)))
    return np.random.Generator(np.random.Philox(sequence))


def angle_grid(spec: GridSpec) -> RealArray:
    offsets = np.arange(spec.num_points, dtype=float) * spec.step_deg
    grid = np.round(spec.start_deg + offsets, 10)
    return grid[grid <= spec.stop_deg + 1e-9]


def power_to_db(value: float) -> float:
    if value <= 0:
        return -math.inf
    return 10.0 * math.log10(value)


def db_to_power(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def validate_positive_int(value: Any, field_name: str, minimum: int = 1) -> int:
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigurationError(field_name, "должно быть целым числом") from None
    if isinstance(value, float) and not value.is_integer():
        raise ConfigurationError(field_name, "должно быть целым числом")
    if number < minimum:
        raise ConfigurationError(field_name, f"должно быть не меньше {minimum}")
    return number


def validate_scenario(scenario: ScenarioConfig) -> ScenarioConfig:
    """Межполевые проверки сценария; вызывается до любых вычислений."""
    m = scenario.geometry.num_elements

    if len(scenario.sources) >= m:
        raise ModelViolationError(
            f"число источников {len(scenario.sources)} должно быть меньше числа элементов {m}"
        )
    if scenario.n_sources >= m:
        raise ModelViolationError(f"n_sources={scenario.n_sources} должно быть меньше m={m}")

    doas = sorted(scenario.doas_deg)
    for left, right in zip(doas, doas[1:], strict=False):
        if abs(right - left) < 1e-9:
            raise ConfigurationError("sources.doa_deg", f"повторяющееся направление {left}°")

    rate = scenario.sample_rate_hz
    for index, src in enumerate(scenario.sources):
        if not math.isclose(src.sample_rate_hz, rate, rel_tol=1e-9):
            raise ConfigurationError(
                f"sources[{index}].samples_per_bit",
                f"частота дискретизации {src.sample_rate_hz:g} Гц не совпадает с {rate:g} Гц",
            )

    uses_cyclic = scenario.estimator == EstimatorKind.CYCLIC_MUSIC or any(
        c.estimator == EstimatorKind.CYCLIC_MUSIC for c in scenario.comparisons
    )
    if uses_cyclic:
        cyclic = scenario.cyclic
        if cyclic.n_cyclic_sources >= m:
            raise ModelViolationError(
                f"n_cyclic_sources={cyclic.n_cyclic_sources} должно быть меньше m={m}"
            )
        targets = scenario.cyclic_targets()
        if cyclic.n_cyclic_sources > len(targets):
            raise ConfigurationError(
                "cyclic.n_cyclic_sources",
                f"на частоте α={scenario.alpha_hz:g} Гц циклостационарны только "
                f"{len(targets)} полезных источника(ов)",
            )
        if cyclic.lag_samples >= scenario.num_snapshots:
            raise ConfigurationError("cyclic.lag_samples", "должен быть меньше num_snapshots")
        if any(cyclic.lag_samples >= n for n in scenario.snapshots_sweep):
            raise ConfigurationError(
                "montecarlo.snapshots_sweep", "каждое значение должно превышать cyclic.lag_samples"
            )

    if scenario.preprocessing.reference_element >= m:
        raise ConfigurationError(
            "preprocessing.reference_element", f"должен быть меньше числа элементов {m}"
        )
    return scenario
