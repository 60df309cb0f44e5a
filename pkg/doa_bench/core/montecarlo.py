"""Монте-Карло: испытания с фиксированным зерном, СКО оценок, паразитные пики, свипы по ОСШ
и по числу отсчётов."""

import logging
import math
import os
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..decorators import log_action
from .array_model import synthesize_snapshots
from .estimators import (
    cyclic_correlation,
    cyclic_music_spectrum,
    find_peaks,
    local_maxima,
    music_spectrum,
    sample_covariance,
)
from .exceptions import ContractError, DoaBenchError
from .models import (
    Comparison,
    EstimationResult,
    EstimatorKind,
    MonteCarloReport,
    ScenarioConfig,
    SnapshotMatrix,
    Spectrum,
    SweepRow,
    TrialResult,
)
from .preprocess import preprocess_pipeline
from .utils import angle_grid, power_to_db, validate_positive_int, validate_scenario

logger = logging.getLogger(__name__)

EstimateLike = Union[EstimationResult, Sequence[float]]


@dataclass(frozen=True)
class Match:
    """Пара «истинное направление, оценка»; estimate=None означает пропуск."""

    truth_deg: float
    estimate_deg: Optional[float]

    @property
    def error_deg(self) -> Optional[float]:
        if self.estimate_deg is None:
            return None
        return abs(self.estimate_deg - self.truth_deg)


def _doas(estimate: EstimateLike) -> tuple[float, ...]:
    if isinstance(estimate, EstimationResult):
        return estimate.doas_deg
    return tuple(float(x) for x in estimate)


def match_estimates(estimates: EstimateLike, truth: Sequence[float]) -> list[Match]:
    """Сопоставление оценок истинным углам с минимальной суммарной абсолютной ошибкой."""
    truth = [float(t) for t in truth]
    if not truth:
        raise ContractError("match_estimates", "список истинных направлений пуст")
    doas = _doas(estimates)
    if not doas:
        return [Match(t, None) for t in truth]

    cost = np.abs(np.subtract.outer(np.asarray(truth), np.asarray(doas)))
    rows, cols = linear_sum_assignment(cost)
    assigned = dict(zip(rows.tolist(), cols.tolist(), strict=True))
    return [
        Match(t, doas[assigned[i]] if i in assigned else None) for i, t in enumerate(truth)
    ]


def _squared_errors(estimate: EstimateLike, truth: Sequence[float], penalty_deg: float):
    for match in match_estimates(estimate, truth):
        error = match.error_deg
        yield (penalty_deg if error is None else error) ** 2


def rmse(
    estimates: Sequence[EstimateLike], truth: Sequence[float], penalty_deg: float = 2.0
) -> float:
    """СКО по всем прогонам и всем истинным направлениям.

    Пропущенное направление даёт ошибку penalty_deg.
    """
    if not estimates:
        raise ContractError("rmse", "нет ни одного прогона")
    if not truth:
        raise ContractError("rmse", "список истинных направлений пуст")
    if penalty_deg < 0:
        raise ContractError("rmse", "штраф за пропуск не может быть отрицательным")
    squares = [sq for est in estimates for sq in _squared_errors(est, truth, penalty_deg)]
    return math.sqrt(math.fsum(squares) / len(squares))


def is_resolved(estimate: EstimateLike, truth: Sequence[float], tolerance_deg: float = 1.0) -> bool:
    """Все истинные направления найдены с точностью tolerance_deg."""
    return all(
        m.error_deg is not None and m.error_deg <= tolerance_deg
        for m in match_estimates(estimate, truth)
    )


def spurious_peak_db(spectrum: Spectrum, truth: Sequence[float], guard_deg: float = 2.0) -> float:
    """Уровень наибольшего паразитного пика относительно наименьшего истинного, дБ.

    -inf: паразитных максимумов нет; nan: у какого-то истинного направления
    в окне ±guard_deg нет ни одного максимума.
    """
    grid = np.asarray(spectrum.grid, dtype=float)
    values = np.asarray(spectrum.values, dtype=float)
    if values.size < 3 or not np.all(np.isfinite(values)) or not np.max(values) > 0:
        raise ContractError("spurious_peak_db", "спектр вырожден")
    if not truth:
        raise ContractError("spurious_peak_db", "список истинных направлений пуст")

    maxima = local_maxima(values)
    inside_any = np.zeros(maxima.size, dtype=bool)
    true_levels = []
    for angle in truth:
        inside = np.abs(grid[maxima] - angle) <= guard_deg
        if not np.any(inside):
            logger.warning(f"spurious_peak_db: нет максимума возле истинного угла {angle}°")
            return math.nan
        true_levels.append(float(np.max(values[maxima[inside]])))
        inside_any |= inside

    spurious = maxima[~inside_any]
    if spurious.size == 0:
        return -math.inf
    return power_to_db(float(np.max(values[spurious])) / min(true_levels))


def _estimate(scenario: ScenarioConfig, snapshots: SnapshotMatrix) -> Spectrum:
    grid = angle_grid(scenario.grid)
    prep = scenario.preprocessing
    pipeline = None
    if prep.enabled:
        pipeline = preprocess_pipeline(
            snapshots,
            prep.denoise,
            prep.beta,
            snapshots.sample_rate_hz,
            order=prep.order,
            obw_spectrum=prep.obw_spectrum,
            reference_element=prep.reference_element,
        )

    if scenario.estimator == EstimatorKind.CYCLIC_MUSIC:
        data = pipeline.filtered if pipeline is not None else snapshots
        correlation = cyclic_correlation(
            data,
            scenario.alpha_hz,
            scenario.cyclic.lag_samples,
            conjugate=scenario.cyclic.conjugate_variant,
            sample_rate_hz=snapshots.sample_rate_hz,
        )
        return cyclic_music_spectrum(
            correlation, scenario.cyclic.n_cyclic_sources, scenario.geometry, grid
        )

    covariance = pipeline.covariance if pipeline is not None else sample_covariance(snapshots)
    return music_spectrum(covariance, scenario.n_sources, scenario.geometry, grid)


def evaluate_trial(scenario: ScenarioConfig, snapshots: SnapshotMatrix, seed: int) -> TrialResult:
    """Предобработка, оценщик и поиск пиков на уже синтезированных данных."""
    spectrum = _estimate(scenario, snapshots)
    estimation = find_peaks(spectrum, scenario.num_peaks(), scenario.guard_deg)
    truth = scenario.target_doas()
    return TrialResult(
        seed=seed,
        snr_db=scenario.snr_db,
        estimator=scenario.estimator,
        preprocessing=scenario.preprocessing.enabled,
        snapshots=snapshots,
        spectrum=spectrum,
        estimation=estimation,
        truth_deg=truth,
        spurious_db=spurious_peak_db(spectrum, truth, scenario.guard_deg),
    )


@log_action("RUN_TRIAL", level=logging.DEBUG)
def run_trial(scenario: ScenarioConfig, seed: int, snr_db: Optional[float] = None) -> TrialResult:
    """Одно испытание: синтез → (предобработка) → оценщик → пики.

    Данные зависят только от (seed, ОСШ), поэтому разные оценщики с одним зерном
    получают одинаковую матрицу снимков.
    """
    if snr_db is not None:
        scenario = scenario.with_overrides(snr_db=snr_db)
    validate_scenario(scenario)
    snapshots = synthesize_snapshots(scenario, seed)
    return evaluate_trial(scenario, snapshots, seed)


@dataclass(frozen=True)
class SweepPoint:
    """Точка свипа: ОСШ и число отсчётов."""

    snr_db: float
    num_snapshots: int


@dataclass(frozen=True)
class _Outcome:
    """Итог одного прогона для одной комбинации сравнения."""

    run_index: int
    estimation: Optional[EstimationResult]
    spurious_db: float
    error: Optional[str] = None


def _run_paired(scenario: ScenarioConfig, point: SweepPoint, run_index: int) -> list[_Outcome]:
    """Один набор данных на все сравнения; ошибки фиксируются по каждому сравнению."""
    seed = scenario.base_seed + run_index
    variant = scenario.with_overrides(snr_db=point.snr_db, num_snapshots=point.num_snapshots)
    try:
        snapshots = synthesize_snapshots(variant, seed)
    except DoaBenchError as e:
        return [_Outcome(run_index, None, math.nan, str(e)) for _ in scenario.comparisons]

    outcomes = []
    for comparison in scenario.comparisons:
        try:
            trial = evaluate_trial(variant.with_comparison(comparison), snapshots, seed)
        except DoaBenchError as e:
            outcomes.append(_Outcome(run_index, None, math.nan, str(e)))
            continue
        outcomes.append(_Outcome(run_index, trial.estimation, trial.spurious_db))
    return outcomes


def _mean_spurious(values: Sequence[float], floor_db: float) -> float:
    usable = [max(v, floor_db) for v in values if not math.isnan(v)]
    if not usable:
        return math.nan
    return math.fsum(usable) / len(usable)


def _aggregate(
    scenario: ScenarioConfig, comparison: Comparison, point: SweepPoint, outcomes: list[_Outcome]
) -> SweepRow:
    target = scenario.with_comparison(comparison)
    truth = target.target_doas()
    succeeded = sorted((o for o in outcomes if o.estimation is not None), key=lambda o: o.run_index)
    failed = len(outcomes) - len(succeeded)
    if failed:
        first_error = next(o.error for o in outcomes if o.estimation is None)
        logger.warning(
            f"{comparison.label} @ {point.snr_db:g} дБ, N={point.num_snapshots}: "
            f"{failed} неудачных прогонов ({first_error})"
        )

    if not succeeded:
        return SweepRow(
            snr_db=point.snr_db,
            estimator=comparison.estimator,
            preprocessing=comparison.preprocessing,
            rmse_deg=math.nan,
            resolution_rate=math.nan,
            mean_spurious_db=math.nan,
            runs=0,
            failed_runs=failed,
            num_snapshots=point.num_snapshots,
        )

    estimations = [o.estimation for o in succeeded]
    resolved = sum(is_resolved(e, truth, scenario.match_tolerance_deg) for e in estimations)
    return SweepRow(
        snr_db=point.snr_db,
        estimator=comparison.estimator,
        preprocessing=comparison.preprocessing,
        rmse_deg=rmse(estimations, truth, scenario.miss_penalty_deg),
        resolution_rate=resolved / len(succeeded),
        mean_spurious_db=_mean_spurious(
            [o.spurious_db for o in succeeded], scenario.spurious_floor_db
        ),
        runs=len(succeeded),
        failed_runs=failed,
        num_snapshots=point.num_snapshots,
    )


def resolve_threads(threads: int) -> int:
    """0 означает число процессоров."""
    if threads == 0:
        return os.cpu_count() or 1
    return validate_positive_int(threads, "threads")


def _sweep_points(
    scenario: ScenarioConfig, points: list[SweepPoint], workers: int
) -> list[SweepRow]:
    tasks = [(point, i) for point in points for i in range(scenario.num_runs)]
    if workers == 1:
        results = [_run_paired(scenario, point, i) for point, i in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda task: _run_paired(scenario, *task), tasks))

    by_point: dict[SweepPoint, list[list[_Outcome]]] = {}
    for (point, _), outcomes in zip(tasks, results, strict=True):
        by_point.setdefault(point, []).append(outcomes)

    rows = []
    for position, comparison in enumerate(scenario.comparisons):
        for point in points:
            outcomes = [per_run[position] for per_run in by_point[point]]
            rows.append(_aggregate(scenario, comparison, point, outcomes))
    return rows


@log_action("RUN_SWEEP")
def run_sweep(scenario: ScenarioConfig, threads: int = 1) -> MonteCarloReport:
    """Свип по ОСШ для всех сравнений сценария, затем по числу отсчётов при ОСШ snr_db.

    Прогон i использует зерно base_seed + i в любой точке свипа; агрегаты считаются
    в порядке индексов прогонов и не зависят от числа потоков.
    """
    validate_scenario(scenario)
    for comparison in scenario.comparisons:
        validate_scenario(scenario.with_comparison(comparison))
    if not scenario.snr_sweep_db:
        raise ContractError("run_sweep", "список ОСШ пуст")
    if len(set(scenario.snr_sweep_db)) != len(scenario.snr_sweep_db):
        raise ContractError("run_sweep", "значения ОСШ повторяются")

    workers = resolve_threads(threads)
    started = time.perf_counter()
    snr_points = [SweepPoint(snr, scenario.num_snapshots) for snr in scenario.snr_sweep_db]
    rows = _sweep_points(scenario, snr_points, workers)
    snapshot_points = [SweepPoint(scenario.snr_db, n) for n in scenario.snapshots_sweep]
    snapshot_rows = _sweep_points(scenario, snapshot_points, workers) if snapshot_points else []

    elapsed = time.perf_counter() - started
    datasets = (len(snr_points) + len(snapshot_points)) * scenario.num_runs
    logger.info(
        f"run_sweep: {len(rows)} строк по ОСШ, {len(snapshot_rows)} по числу отсчётов, "
        f"{datasets} наборов данных, потоков {workers}, {elapsed:.2f} с"
    )
    return MonteCarloReport(
        rows=tuple(rows),
        config=scenario.to_dict(),
        elapsed_s=elapsed,
        snapshot_rows=tuple(snapshot_rows),
    )
