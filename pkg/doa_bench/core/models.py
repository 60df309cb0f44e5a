"""Модели данных: геометрия решётки, источники, матрицы, спектры и отчёты."""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import StrEnum
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from .exceptions import ConfigurationError

SPEED_OF_LIGHT = 3e8

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]


class ChannelVariant(StrEnum):
    NO_FADING = "none"
    COHERENT_WAVEFRONT = "coherent"
    NON_COHERENT_ELEMENT = "non_coherent"


class SourceRole(StrEnum):
    SIGNAL = "signal"
    INTERFERER = "interferer"


class EstimatorKind(StrEnum):
    MUSIC = "music"
    CYCLIC_MUSIC = "cyclic_music"


class SpectrumKind(StrEnum):
    MUSIC_PSEUDO = "music_pseudo"
    CYCLIC_MUSIC_PSEUDO = "cyclic_music_pseudo"


class WaveletFamily(StrEnum):
    HAAR = "haar"


class ThresholdRule(StrEnum):
    UNIVERSAL = "universal"
    HEURISTIC_SURE = "heuristic_sure"


class PipelineOrder(StrEnum):
    DENOISE_FIRST = "denoise_first"
    OBW_FIRST = "obw_first"


class ObwSpectrumMode(StrEnum):
    REFERENCE = "reference"
    AVERAGED = "averaged"


def _is_finite_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


@dataclass(frozen=True)
class ArrayGeometry:
    """Равномерная линейная решётка.

    Угол прихода отсчитывается от оси решётки: 0° соответствует оси,
    90° нормали. Фазовый набег между элементами φ = (2π/λ)·d·cos θ.
    """

    num_elements: int = 16
    carrier_freq_hz: float = 2.4e9
    spacing_m: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.num_elements, bool) or not isinstance(self.num_elements, int):
            raise ConfigurationError("array.num_elements", "должно быть целым числом")
        if self.num_elements < 2:
            raise ConfigurationError("array.num_elements", "должно быть не меньше 2")
        if not _is_finite_number(self.carrier_freq_hz) or self.carrier_freq_hz <= 0:
            raise ConfigurationError("array.carrier_freq_hz", "должна быть положительным числом")
        if self.spacing_m is None:
            object.__setattr__(self, "spacing_m", self.wavelength / 2)
        elif not _is_finite_number(self.spacing_m) or self.spacing_m <= 0:
            raise ConfigurationError("array.spacing_m", "должен быть положительным числом")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def spacing_wavelengths(self) -> float:
        return float(self.spacing_m) / self.wavelength


@dataclass(frozen=True, eq=False)
class SteeringVector:
    """Отклик решётки на плоскую волну единичной амплитуды."""

    entries: ComplexArray
    electrical_phase: float


@dataclass(frozen=True)
class QpskSource:
    """Источник QPSK с прямоугольной формой импульса."""

    doa_deg: float
    bit_rate_bps: float = 2e6
    samples_per_bit: int = 10
    power: float = 1.0
    role: SourceRole = SourceRole.SIGNAL
    label: str = ""

    def __post_init__(self):
        if not _is_finite_number(self.doa_deg) or not 0.0 <= self.doa_deg <= 180.0:
            raise ConfigurationError("sources.doa_deg", "угол должен лежать в диапазоне [0, 180]")
        if not _is_finite_number(self.bit_rate_bps) or self.bit_rate_bps <= 0:
            raise ConfigurationError("sources.bit_rate_bps", "должна быть положительным числом")
        if isinstance(self.samples_per_bit, bool) or not isinstance(self.samples_per_bit, int):
            raise ConfigurationError("sources.samples_per_bit", "должно быть целым числом")
        if self.samples_per_bit < 1:
            raise ConfigurationError("sources.samples_per_bit", "должно быть не меньше 1")
        if not _is_finite_number(self.power) or self.power <= 0:
            raise ConfigurationError("sources.power_linear", "должна быть положительным числом")
        object.__setattr__(self, "role", SourceRole(self.role))

    @property
    def bit_duration_s(self) -> float:
        return 1.0 / self.bit_rate_bps

    @property
    def sample_rate_hz(self) -> float:
        return self.bit_rate_bps * self.samples_per_bit

    @property
    def samples_per_symbol(self) -> int:
        return 2 * self.samples_per_bit

    @property
    def symbol_rate_hz(self) -> float:
        return self.bit_rate_bps / 2

    def has_cycle_frequency(self, alpha_hz: float) -> bool:
        """Прямоугольный QPSK циклостационарен на всех кратных символьной частоты."""
        ratio = alpha_hz / self.symbol_rate_hz
        return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Модель канала с реализацией коэффициентов замираний.

    Для когерентного фронта fading_coeffs имеет форму (n,), для поэлементных
    замираний (m, n), без замираний None.
    """

    variant: ChannelVariant = ChannelVariant.NO_FADING
    fading_coeffs: Optional[ComplexArray] = None


@dataclass(frozen=True)
class NoiseSpec:
    """Шум задаётся отношением сигнал/шум на элемент относительно полезного сигнала."""

    snr_db: float = 10.0

    def __post_init__(self):
        if not isinstance(self.snr_db, (int, float)) or math.isnan(self.snr_db):
            raise ConfigurationError("noise.snr_db", "должно быть числом")
        if self.snr_db == -math.inf:
            raise ConfigurationError("noise.snr_db", "бесконечный шум недопустим")

    def noise_power(self, signal_power: float = 1.0) -> float:
        if math.isinf(self.snr_db):
            return 0.0
        return signal_power * 10.0 ** (-self.snr_db / 10.0)


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """Отсчёты решётки: строка соответствует элементу, столбец моменту времени."""

    data: ComplexArray
    sample_rate_hz: float = 1.0

    @property
    def num_elements(self) -> int:
        return int(self.data.shape[0])

    @property
    def num_snapshots(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    matrix: ComplexArray
    num_snapshots: int


@dataclass(frozen=True, eq=False)
class CyclicCorrelationMatrix:
    """Циклическая корреляционная матрица; в общем случае не эрмитова."""

    matrix: ComplexArray
    cycle_freq_hz: float
    lag_samples: int
    conjugate_variant: bool
    num_snapshots: int


@dataclass(frozen=True, eq=False)
class EvdResult:
    eigenvalues: RealArray
    eigenvectors: ComplexArray


@dataclass(frozen=True, eq=False)
class SvdResult:
    left_vectors: ComplexArray
    singular_values: RealArray
    right_vectors: ComplexArray


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Псевдоспектр на сетке углов; источники соответствуют максимумам."""

    grid: RealArray
    values: RealArray
    kind: SpectrumKind
    null_values: Optional[RealArray] = None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class EstimationResult:
    doas_deg: tuple[float, ...]
    peak_values: tuple[float, ...]
    num_sources_assumed: int
    complete: bool = True


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    bin_freqs_hz: RealArray
    powers: RealArray


@dataclass(frozen=True)
class ObwLimits:
    """Границы занимаемой полосы; индексы относятся к сетке PowerSpectrum."""

    f_low_hz: float
    f_high_hz: float
    beta: float
    low_index: int
    high_index: int


@dataclass(frozen=True)
class DenoiseConfig:
    """Параметры вейвлет-шумоподавления (один уровень, мягкий порог)."""

    wavelet: WaveletFamily = WaveletFamily.HAAR
    level: int = 1
    threshold_rule: ThresholdRule = ThresholdRule.UNIVERSAL
    mode: str = "soft"
    fixed_threshold: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "wavelet", WaveletFamily(self.wavelet))
        object.__setattr__(self, "threshold_rule", ThresholdRule(self.threshold_rule))
        if self.level != 1:
            raise ConfigurationError("preprocessing.level", "поддерживается только уровень 1")
        if self.mode != "soft":
            raise ConfigurationError("preprocessing.mode", "поддерживается только мягкий порог")
        if self.fixed_threshold is not None and (
            not _is_finite_number(self.fixed_threshold) or self.fixed_threshold < 0
        ):
            raise ConfigurationError(
                "preprocessing.fixed_threshold", "должен быть неотрицательным числом"
            )


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Результат предобработки со всеми промежуточными продуктами."""

    covariance: CovarianceMatrix
    denoised: SnapshotMatrix
    filtered: SnapshotMatrix
    power_spectrum: PowerSpectrum
    limits: ObwLimits


@dataclass(frozen=True)
class PreprocessSettings:
    enabled: bool = False
    denoise: DenoiseConfig = field(default_factory=DenoiseConfig)
    beta: float = 0.01
    order: PipelineOrder = PipelineOrder.DENOISE_FIRST
    obw_spectrum: ObwSpectrumMode = ObwSpectrumMode.REFERENCE
    reference_element: int = 0

    def __post_init__(self):
        object.__setattr__(self, "order", PipelineOrder(self.order))
        object.__setattr__(self, "obw_spectrum", ObwSpectrumMode(self.obw_spectrum))
        if not _is_finite_number(self.beta) or not 0.0 < self.beta < 1.0:
            raise ConfigurationError("preprocessing.beta_fraction", "должна лежать в (0, 1)")
        if isinstance(self.reference_element, bool) or not isinstance(self.reference_element, int):
            raise ConfigurationError("preprocessing.reference_element", "должен быть целым")
        if self.reference_element < 0:
            raise ConfigurationError("preprocessing.reference_element", "не может быть отрицательным")


@dataclass(frozen=True)
class CyclicSettings:
    """Параметры Cyclic MUSIC. alpha_hz=None означает символьную частоту первого источника."""

    alpha_hz: Optional[float] = None
    lag_samples: int = 2
    conjugate_variant: bool = True
    n_cyclic_sources: int = 1

    def __post_init__(self):
        if self.alpha_hz is not None and not _is_finite_number(self.alpha_hz):
            raise ConfigurationError("cyclic.alpha_hz", "должна быть конечным числом")
        if isinstance(self.lag_samples, bool) or not isinstance(self.lag_samples, int):
            raise ConfigurationError("cyclic.lag_samples", "должен быть целым числом")
        if self.lag_samples < 0:
            raise ConfigurationError("cyclic.lag_samples", "не может быть отрицательным")
        if self.lag_samples % 2:
            raise ConfigurationError("cyclic.lag_samples", "lag должен быть чётным")
        if isinstance(self.n_cyclic_sources, bool) or not isinstance(self.n_cyclic_sources, int):
            raise ConfigurationError("cyclic.n_cyclic_sources", "должно быть целым числом")
        if self.n_cyclic_sources < 1:
            raise ConfigurationError("cyclic.n_cyclic_sources", "должно быть не меньше 1")


@dataclass(frozen=True)
class GridSpec:
    start_deg: float = 0.0
    stop_deg: float = 180.0
    step_deg: float = 0.1

    def __post_init__(self):
        for name in ("start_deg", "stop_deg", "step_deg"):
            if not _is_finite_number(getattr(self, name)):
                raise ConfigurationError(f"grid.{name}", "должно быть конечным числом")
        if not 0.0 <= self.start_deg < self.stop_deg <= 180.0:
            raise ConfigurationError("grid", "требуется 0 <= start_deg < stop_deg <= 180")
        if self.step_deg <= 0:
            raise ConfigurationError("grid.step_deg", "шаг должен быть положительным")

    @property
    def num_points(self) -> int:
        return int(round((self.stop_deg - self.start_deg) / self.step_deg)) + 1


@dataclass(frozen=True)
class Comparison:
    """Комбинация оценщика и режима предобработки в рамках одного прогона."""

    estimator: EstimatorKind
    preprocessing: bool

    def __post_init__(self):
        object.__setattr__(self, "estimator", EstimatorKind(self.estimator))

    @property
    def label(self) -> str:
        return f"{self.estimator}/{'pipeline' if self.preprocessing else 'raw'}"

    @classmethod
    def from_label(cls, label: str) -> "Comparison":
        estimator, _, mode = label.strip().partition("/")
        if mode not in ("raw", "pipeline"):
            raise ConfigurationError(
                "montecarlo.comparisons", f"'{label}': ожидается '<оценщик>/raw|pipeline'"
            )
        try:
            kind = EstimatorKind(estimator)
        except ValueError:
            raise ConfigurationError(
                "montecarlo.comparisons", f"неизвестный оценщик '{estimator}'"
            ) from None
        return cls(estimator=kind, preprocessing=mode == "pipeline")


ALL_COMPARISONS: tuple[Comparison, ...] = (
    Comparison(EstimatorKind.MUSIC, False),
    Comparison(EstimatorKind.MUSIC, True),
    Comparison(EstimatorKind.CYCLIC_MUSIC, False),
    Comparison(EstimatorKind.CYCLIC_MUSIC, True),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Полное описание эксперимента."""

    sources: tuple[QpskSource, ...]
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    channel: ChannelVariant = ChannelVariant.NO_FADING
    snr_db: float = 10.0
    snr_sweep_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    snapshots_sweep: tuple[int, ...] = ()
    estimator: EstimatorKind = EstimatorKind.MUSIC
    n_sources: Optional[int] = None
    guard_deg: float = 2.0
    cyclic: CyclicSettings = field(default_factory=CyclicSettings)
    preprocessing: PreprocessSettings = field(default_factory=PreprocessSettings)
    grid: GridSpec = field(default_factory=GridSpec)
    num_snapshots: int = 1000
    num_runs: int = 1000
    base_seed: int = 0
    match_tolerance_deg: float = 1.0
    miss_penalty_deg: float = 2.0
    spurious_floor_db: float = -60.0
    comparisons: tuple[Comparison, ...] = ALL_COMPARISONS
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "snr_sweep_db", tuple(float(s) for s in self.snr_sweep_db))
        object.__setattr__(self, "snapshots_sweep", tuple(self.snapshots_sweep))
        object.__setattr__(self, "comparisons", tuple(self.comparisons))
        object.__setattr__(self, "channel", ChannelVariant(self.channel))
        object.__setattr__(self, "estimator", EstimatorKind(self.estimator))
        if not self.sources:
            raise ConfigurationError("sources", "нужен хотя бы один источник")
        NoiseSpec(self.snr_db)
        for snr in self.snr_sweep_db:
            NoiseSpec(snr)
        if self.n_sources is None:
            object.__setattr__(self, "n_sources", len(self.sources))
        elif isinstance(self.n_sources, bool) or not isinstance(self.n_sources, int):
            raise ConfigurationError("estimator.n_sources", "должно быть целым числом")
        if self.n_sources < 1:
            raise ConfigurationError("estimator.n_sources", "должно быть не меньше 1")
        for name, minimum in (("num_snapshots", 2), ("num_runs", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                raise ConfigurationError(f"montecarlo.{name}", f"должно быть целым >= {minimum}")
        for value in self.snapshots_sweep:
            if isinstance(value, bool) or not isinstance(value, int) or value < 2:
                raise ConfigurationError(
                    "montecarlo.snapshots_sweep", "значения должны быть целыми >= 2"
                )
        if len(set(self.snapshots_sweep)) != len(self.snapshots_sweep):
            raise ConfigurationError("montecarlo.snapshots_sweep", "значения повторяются")
        if isinstance(self.base_seed, bool) or not isinstance(self.base_seed, int):
            raise ConfigurationError("montecarlo.base_seed", "должно быть целым числом")
        if self.base_seed < 0:
            raise ConfigurationError("montecarlo.base_seed", "не может быть отрицательным")
        if not _is_finite_number(self.guard_deg) or self.guard_deg < 0:
            raise ConfigurationError("estimator.guard_deg", "должно быть неотрицательным")
        for name in ("match_tolerance_deg", "miss_penalty_deg"):
            value = getattr(self, name)
            if not _is_finite_number(value) or value <= 0:
                raise ConfigurationError(f"montecarlo.{name}", "должно быть положительным")
        if not _is_finite_number(self.spurious_floor_db):
            raise ConfigurationError("montecarlo.spurious_floor_db", "должно быть конечным")
        if not self.comparisons:
            raise ConfigurationError("montecarlo.comparisons", "список сравнений пуст")

    @property
    def sample_rate_hz(self) -> float:
        return self.sources[0].sample_rate_hz

    @property
    def signal_power(self) -> float:
        """Мощность полезного сигнала (первого источника), опорная для ОСШ."""
        return self.sources[0].power

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.snr_db)

    @property
    def alpha_hz(self) -> float:
        if self.cyclic.alpha_hz is None:
            return self.sources[0].symbol_rate_hz
        return float(self.cyclic.alpha_hz)

    @property
    def doas_deg(self) -> tuple[float, ...]:
        return tuple(src.doa_deg for src in self.sources)

    def cyclic_targets(self) -> tuple[QpskSource, ...]:
        """Полезные источники, циклостационарные на частоте α."""
        alpha = self.alpha_hz
        return tuple(
            src
            for src in self.sources
            if src.role == SourceRole.SIGNAL and src.has_cycle_frequency(alpha)
        )

    def target_doas(self, estimator: Optional[EstimatorKind] = None) -> tuple[float, ...]:
        estimator = EstimatorKind(estimator or self.estimator)
        if estimator == EstimatorKind.CYCLIC_MUSIC:
            return tuple(src.doa_deg for src in self.cyclic_targets())
        return self.doas_deg

    def num_peaks(self, estimator: Optional[EstimatorKind] = None) -> int:
        estimator = EstimatorKind(estimator or self.estimator)
        if estimator == EstimatorKind.CYCLIC_MUSIC:
            return self.cyclic.n_cyclic_sources
        return int(self.n_sources)

    def with_comparison(self, comparison: Comparison) -> "ScenarioConfig":
        return replace(
            self,
            estimator=comparison.estimator,
            preprocessing=replace(self.preprocessing, enabled=comparison.preprocessing),
        )

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Эффективная конфигурация, включая производные величины."""
        data = asdict(self)
        data["geometry"]["wavelength_m"] = self.geometry.wavelength
        data["geometry"]["spacing_m"] = float(self.geometry.spacing_m)
        data["sample_rate_hz"] = self.sample_rate_hz
        data["cyclic"]["alpha_hz"] = self.alpha_hz
        data["comparisons"] = [c.label for c in self.comparisons]
        return data


@dataclass(frozen=True, eq=False)
class TrialResult:
    """Результат одного испытания: данные, спектр, оценки и метрики."""

    seed: int
    snr_db: float
    estimator: EstimatorKind
    preprocessing: bool
    snapshots: SnapshotMatrix
    spectrum: Spectrum
    estimation: EstimationResult
    truth_deg: tuple[float, ...]
    spurious_db: float


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    estimator: EstimatorKind
    preprocessing: bool
    rmse_deg: float
    resolution_rate: float
    mean_spurious_db: float
    runs: int
    failed_runs: int = 0
    num_snapshots: Optional[int] = None

    @property
    def preprocessing_label(self) -> str:
        return "pipeline" if self.preprocessing else "raw"


@dataclass(frozen=True)
class MonteCarloReport:
    """Строки свипа по ОСШ и, если задан montecarlo.snapshots_sweep, по числу отсчётов."""

    rows: tuple[SweepRow, ...]
    config: dict[str, Any]
    elapsed_s: float
    snapshot_rows: tuple[SweepRow, ...] = ()

    @property
    def failed_runs(self) -> int:
        return sum(row.failed_runs for row in self.rows + self.snapshot_rows)

    def rows_for(
        self, estimator: EstimatorKind, preprocessing: bool, by_snapshots: bool = False
    ) -> tuple[SweepRow, ...]:
        source = self.snapshot_rows if by_snapshots else self.rows
        return tuple(
            row
            for row in source
            if row.estimator == estimator and row.preprocessing == preprocessing
        )
