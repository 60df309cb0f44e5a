"""Выборочная ковариация, MUSIC, циклические корреляционные матрицы, Cyclic MUSIC и поиск пиков."""

import logging
from collections.abc import Sequence
from typing import Union

import numpy as np
from scipy import signal

from .array_model import steering_matrix
from .exceptions import ContractError, DegenerateInputError, ModelViolationError
from .models import (
    ArrayGeometry,
    ComplexArray,
    CovarianceMatrix,
    CyclicCorrelationMatrix,
    EstimationResult,
    SnapshotMatrix,
    Spectrum,
    SpectrumKind,
)
from .numerics import hermitian_evd, svd

logger = logging.getLogger(__name__)

SPECTRUM_FLOOR = 1e-12

SnapshotLike = Union[SnapshotMatrix, np.ndarray]


def as_snapshot_data(snapshots: SnapshotLike, operation: str) -> ComplexArray:
    data = snapshots.data if isinstance(snapshots, SnapshotMatrix) else snapshots
    data = np.asarray(data, dtype=complex)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ContractError(operation, f"ожидается матрица m×N, получена форма {data.shape}")
    if data.shape[1] < 1:
        raise ContractError(operation, "нет ни одного снимка")
    if not np.all(np.isfinite(data)):
        raise ContractError(operation, "снимки содержат нечисловые значения")
    return data


def hermitize(matrix: ComplexArray) -> ComplexArray:
    return 0.5 * (matrix + matrix.conj().T)


def sample_covariance(snapshots: SnapshotLike) -> CovarianceMatrix:
    """R = (1/N)·Σ y(t)yᴴ(t), принудительно эрмитова."""
    data = as_snapshot_data(snapshots, "sample_covariance")
    n = data.shape[1]
    return CovarianceMatrix(matrix=hermitize(data @ data.conj().T / n), num_snapshots=n)


def _check_model_order(n: int, geometry: ArrayGeometry, grid: Sequence[float], operation: str):
    m = geometry.num_elements
    if n < 1:
        raise ContractError(operation, "число источников должно быть >= 1")
    if n >= m:
        raise ModelViolationError(f"{operation}: число источников {n} должно быть меньше m={m}")
    if len(grid) == 0:
        raise ContractError(operation, "пустая сетка углов")


def _subspace_spectrum(
    noise_basis: ComplexArray,
    geometry: ArrayGeometry,
    grid: Sequence[float],
    kind: SpectrumKind,
    warnings: tuple[str, ...] = (),
) -> Spectrum:
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ContractError("spectrum", "сетка углов должна строго возрастать")
    projections = noise_basis.conj().T @ steering_matrix(geometry, grid)
    null_values = np.sum(np.abs(projections) ** 2, axis=0)
    values = 1.0 / np.maximum(null_values, SPECTRUM_FLOOR)
    return Spectrum(grid=grid, values=values, kind=kind, null_values=null_values, warnings=warnings)


def music_spectrum(
    covariance: CovarianceMatrix, n_sources: int, geometry: ArrayGeometry, grid: Sequence[float]
) -> Spectrum:
    """Псевдоспектр MUSIC 1/max(aᴴGGᴴa, ε), G: шумовое подпространство."""
    _check_model_order(n_sources, geometry, grid, "music_spectrum")
    matrix = covariance.matrix
    if matrix.shape != (geometry.num_elements, geometry.num_elements):
        raise ContractError("music_spectrum", "размер ковариации не совпадает с решёткой")

    evd = hermitian_evd(matrix)
    warnings: tuple[str, ...] = ()
    eigenvalues = evd.eigenvalues
    if eigenvalues[0] - eigenvalues[-1] <= 1e-12 * max(abs(eigenvalues[0]), 1e-300):
        message = "все собственные значения равны: ковариация не несёт информации о направлении"
        logger.warning(f"music_spectrum: {message}")
        warnings = (message,)

    noise_basis = evd.eigenvectors[:, n_sources:]
    return _subspace_spectrum(noise_basis, geometry, grid, SpectrumKind.MUSIC_PSEUDO, warnings)


def cyclic_correlation(
    snapshots: SnapshotLike,
    alpha_hz: float,
    lag_samples: int,
    conjugate: bool = True,
    sample_rate_hz: float = 1.0,
) -> CyclicCorrelationMatrix:
    """Оценка циклической корреляционной матрицы.

    R^α(τ) = (1/N′)·Σ y(t_n+τ/2)·yᴴ(t_n−τ/2)·e^{−j2παt_n}; при conjugate=False
    вместо yᴴ используется yᵀ. N′ = N − τ: число слагаемых без выхода за края.
    """
    data = as_snapshot_data(snapshots, "cyclic_correlation")
    if lag_samples < 0 or lag_samples % 2:
        raise ContractError("cyclic_correlation", f"lag должен быть чётным, получено {lag_samples}")
    if sample_rate_hz <= 0:
        raise ContractError("cyclic_correlation", "частота дискретизации должна быть > 0")
    n = data.shape[1]
    if n <= lag_samples:
        raise ContractError("cyclic_correlation", f"N={n} должно превышать lag={lag_samples}")

    half = lag_samples // 2
    count = n - lag_samples
    centers = np.arange(half, n - half)
    weights = np.exp(-2j * np.pi * alpha_hz * centers / sample_rate_hz)
    leading = data[:, lag_samples:] * weights[np.newaxis, :]
    lagging = data[:, :count]
    second = lagging.conj().T if conjugate else lagging.T
    return CyclicCorrelationMatrix(
        matrix=leading @ second / count,
        cycle_freq_hz=float(alpha_hz),
        lag_samples=int(lag_samples),
        conjugate_variant=bool(conjugate),
        num_snapshots=n,
    )


def cyclic_music_spectrum(
    correlation: CyclicCorrelationMatrix,
    n_cyclic_sources: int,
    geometry: ArrayGeometry,
    grid: Sequence[float],
) -> Spectrum:
    """Псевдоспектр Cyclic MUSIC 1/max(‖U_nᴴa‖², ε) по SVD циклической матрицы."""
    _check_model_order(n_cyclic_sources, geometry, grid, "cyclic_music_spectrum")
    decomposition = svd(correlation.matrix)
    if not decomposition.singular_values[0] > 0:
        raise DegenerateInputError(
            "cyclic_music_spectrum",
            f"циклическая матрица нулевая: нет циклостационарности на α={correlation.cycle_freq_hz:g} Гц",
        )
    noise_basis = decomposition.left_vectors[:, n_cyclic_sources:]
    return _subspace_spectrum(noise_basis, geometry, grid, SpectrumKind.CYCLIC_MUSIC_PSEUDO)


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Индексы локальных максимумов; для плато берётся левый край."""
    _, properties = signal.find_peaks(np.asarray(values, dtype=float), plateau_size=1)
    return np.asarray(properties["left_edges"], dtype=int)


def _refine(grid: np.ndarray, values: np.ndarray, index: int) -> float:
    """Уточнение по параболе через три точки логарифма спектра."""
    if index == 0 or index == grid.size - 1:
        return float(grid[index])
    y = np.log(np.maximum(values[index - 1 : index + 2], np.finfo(float).tiny))
    denominator = y[0] - 2.0 * y[1] + y[2]
    if denominator >= 0:
        return float(grid[index])
    offset = float(np.clip(0.5 * (y[0] - y[2]) / denominator, -0.5, 0.5))
    step = grid[index + 1] - grid[index] if offset > 0 else grid[index] - grid[index - 1]
    return float(grid[index] + offset * step)


def find_peaks(spectrum: Spectrum, n: int, guard_deg: float = 2.0) -> EstimationResult:
    """Выбор до n наибольших локальных максимумов, разнесённых не менее чем на guard_deg."""
    if n < 1:
        raise ContractError("find_peaks", "n должно быть >= 1")
    if guard_deg < 0:
        raise ContractError("find_peaks", "guard_deg не может быть отрицательным")

    grid = np.asarray(spectrum.grid, dtype=float)
    values = np.asarray(spectrum.values, dtype=float)
    candidates = sorted(local_maxima(values), key=lambda i: (-values[i], i))

    selected: list[int] = []
    for index in candidates:
        if all(abs(grid[index] - grid[other]) >= guard_deg for other in selected):
            selected.append(int(index))
        if len(selected) == n:
            break

    complete = len(selected) == n
    if not complete:
        logger.warning(f"find_peaks: найдено {len(selected)} максимумов из {n} запрошенных")
    return EstimationResult(
        doas_deg=tuple(_refine(grid, values, i) for i in selected),
        peak_values=tuple(float(values[i]) for i in selected),
        num_sources_assumed=n,
        complete=complete,
    )
