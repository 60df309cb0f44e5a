"""Предобработка: спектр мощности, занимаемая полоса 99 %, вейвлет-шумоподавление,
ковариация по отфильтрованной полосе."""

import logging
import math

import numpy as np
import pywt

from .estimators import SnapshotLike, as_snapshot_data, hermitize
from .exceptions import ContractError
from .models import (
    CovarianceMatrix,
    DenoiseConfig,
    ObwLimits,
    ObwSpectrumMode,
    PipelineOrder,
    PipelineResult,
    PowerSpectrum,
    SnapshotMatrix,
    ThresholdRule,
)
from .numerics import dft, dwt_level1, idft, idwt_level1

logger = logging.getLogger(__name__)

MAD_TO_SIGMA = 0.6745


def _shifted_freqs(length: int, sample_rate_hz: float) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftfreq(length, d=1.0 / sample_rate_hz))


def power_spectrum(samples, sample_rate_hz: float = 1.0) -> PowerSpectrum:
    """P_y(f_k) = |X[k]|², бины по возрастанию частоты (отрицательные ниже нуля)."""
    samples = np.asarray(samples, dtype=complex).reshape(-1)
    if samples.size < 2:
        raise ContractError("power_spectrum", "нужно не менее двух отсчётов")
    powers = np.fft.fftshift(np.abs(dft(samples)) ** 2)
    return PowerSpectrum(bin_freqs_hz=_shifted_freqs(samples.size, sample_rate_hz), powers=powers)


def obw_limits(spectrum: PowerSpectrum, beta: float = 0.01) -> ObwLimits:
    """Границы занимаемой полосы: по β/2 суммарной мощности отсекается с каждого края."""
    if not 0.0 < beta < 1.0:
        raise ContractError("obw_limits", f"beta должна лежать в (0, 1), получено {beta}")
    powers = np.asarray(spectrum.powers, dtype=float)
    total = float(np.sum(powers))
    if not total > 0:
        raise ContractError("obw_limits", "спектр тождественно нулевой")

    edge_power = total * beta / 2.0
    lower_cumulative = np.cumsum(powers)
    upper_cumulative = np.cumsum(powers[::-1])[::-1]

    low_index = int(np.argmax(lower_cumulative >= edge_power))
    high_index = int(np.flatnonzero(upper_cumulative >= edge_power)[-1])
    return ObwLimits(
        f_low_hz=float(spectrum.bin_freqs_hz[low_index]),
        f_high_hz=float(spectrum.bin_freqs_hz[high_index]),
        beta=float(beta),
        low_index=low_index,
        high_index=high_index,
    )


def soft_threshold(coeffs: np.ndarray, threshold: float) -> np.ndarray:
    """d ← sign(d)·max(|d| − λ, 0)."""
    coeffs = np.asarray(coeffs, dtype=float)
    # pywt.threshold делит 0/0 на нулевых коэффициентах при λ = 0
    if threshold <= 0.0:
        return coeffs.copy()
    return pywt.threshold(coeffs, threshold, mode="soft")


def _sure_threshold(normalized: np.ndarray) -> float:
    squares = np.sort(normalized**2)
    n = squares.size
    ranks = np.arange(1, n + 1)
    risks = (n - 2.0 * ranks + np.cumsum(squares) + (n - ranks) * squares) / n
    return float(math.sqrt(squares[int(np.argmin(risks))]))


def estimate_threshold(detail: np.ndarray, rule: ThresholdRule, length: int) -> float:
    """Порог для вещественных детализирующих коэффициентов.

    σ̂ = median(|d|)/0.6745; universal: λ = σ̂·√(2 ln L);
    heuristic_sure: SURE, если коэффициенты заметно энергичнее шума, иначе universal.
    """
    detail = np.asarray(detail, dtype=float)
    if detail.size == 0:
        return 0.0
    sigma = float(np.median(np.abs(detail))) / MAD_TO_SIGMA
    if sigma == 0.0:
        return 0.0
    universal = math.sqrt(2.0 * math.log(max(length, 2)))
    if ThresholdRule(rule) == ThresholdRule.UNIVERSAL:
        return sigma * universal

    normalized = detail / sigma
    n = normalized.size
    energy = (float(np.sum(normalized**2)) - n) / n
    critical = math.log2(max(n, 2)) ** 1.5 / math.sqrt(n)
    if energy < critical:
        return sigma * universal
    return sigma * min(_sure_threshold(normalized), universal)


def _denoise_real(part: np.ndarray, cfg: DenoiseConfig, length: int) -> np.ndarray:
    approx, detail = dwt_level1(part, cfg.wavelet)
    if cfg.fixed_threshold is not None:
        threshold = cfg.fixed_threshold
    else:
        threshold = estimate_threshold(detail, cfg.threshold_rule, length)
    return idwt_level1(approx, soft_threshold(detail, threshold), cfg.wavelet)


def wavelet_denoise(samples, cfg: DenoiseConfig) -> np.ndarray:
    """Одноуровневое вейвлет-шумоподавление с мягким порогом.

    Вещественная и мнимая части обрабатываются независимо, аппроксимация не меняется.
    Нечётная длина дополняется нулём и усекается после восстановления.
    """
    samples = np.asarray(samples)
    if samples.ndim != 1 or samples.size < 2:
        raise ContractError("wavelet_denoise", "нужен вектор длины не менее 2")
    length = samples.size
    padded = np.concatenate([samples, np.zeros(1, dtype=samples.dtype)]) if length % 2 else samples

    if np.iscomplexobj(padded):
        real = _denoise_real(padded.real, cfg, length)
        imag = _denoise_real(padded.imag, cfg, length)
        return (real + 1j * imag)[:length]
    return _denoise_real(padded.astype(float), cfg, length)[:length]


def _band_mask(limits: ObwLimits, num_samples: int, sample_rate_hz: float) -> np.ndarray:
    nyquist = sample_rate_hz / 2.0
    if limits.f_low_hz < -nyquist - 1e-9 or limits.f_high_hz > nyquist + 1e-9:
        raise ContractError("band_filtered_covariance", "границы полосы вне диапазона Найквиста")
    freqs = _shifted_freqs(num_samples, sample_rate_hz)
    tolerance = 1e-9 * sample_rate_hz
    mask = (freqs >= limits.f_low_hz - tolerance) & (freqs <= limits.f_high_hz + tolerance)
    if not np.any(mask):
        raise ContractError("band_filtered_covariance", "в полосе не осталось ни одного бина")
    return mask


def _band_spectrum(data: np.ndarray, limits: ObwLimits, sample_rate_hz: float):
    spectra = np.fft.fftshift(dft(data), axes=-1)
    mask = _band_mask(limits, data.shape[1], sample_rate_hz)
    return spectra, mask


def band_filtered_covariance(
    snapshots: SnapshotLike, limits: ObwLimits, sample_rate_hz: float
) -> CovarianceMatrix:
    """R[f_L; f_H] = (1/(N·K))·Σ_{k ∈ полоса} X_k X_kᴴ; при полной полосе совпадает с выборочной."""
    data = as_snapshot_data(snapshots, "band_filtered_covariance")
    spectra, mask = _band_spectrum(data, limits, sample_rate_hz)
    retained = spectra[:, mask]
    n, k = data.shape[1], retained.shape[1]
    return CovarianceMatrix(
        matrix=hermitize(retained @ retained.conj().T / (n * k)), num_snapshots=n
    )


def band_filtered_snapshots(
    snapshots: SnapshotLike, limits: ObwLimits, sample_rate_hz: float
) -> SnapshotMatrix:
    """Отсчёты после идеального полосового фильтра [f_L; f_H]."""
    data = as_snapshot_data(snapshots, "band_filtered_snapshots")
    spectra, mask = _band_spectrum(data, limits, sample_rate_hz)
    spectra[:, ~mask] = 0.0
    filtered = idft(np.fft.ifftshift(spectra, axes=-1))
    return SnapshotMatrix(data=filtered, sample_rate_hz=sample_rate_hz)


def _obw_spectrum(
    data: np.ndarray, mode: ObwSpectrumMode, reference_element: int, sample_rate_hz: float
) -> PowerSpectrum:
    if ObwSpectrumMode(mode) == ObwSpectrumMode.AVERAGED:
        spectra = [power_spectrum(row, sample_rate_hz) for row in data]
        powers = np.mean([s.powers for s in spectra], axis=0)
        return PowerSpectrum(bin_freqs_hz=spectra[0].bin_freqs_hz, powers=powers)
    if not 0 <= reference_element < data.shape[0]:
        raise ContractError("preprocess_pipeline", f"нет элемента {reference_element}")
    return power_spectrum(data[reference_element], sample_rate_hz)


def preprocess_pipeline(
    snapshots: SnapshotLike,
    cfg: DenoiseConfig,
    beta: float,
    sample_rate_hz: float,
    order: PipelineOrder = PipelineOrder.DENOISE_FIRST,
    obw_spectrum: ObwSpectrumMode = ObwSpectrumMode.REFERENCE,
    reference_element: int = 0,
) -> PipelineResult:
    """Шумоподавление по элементам → спектр опорного элемента → OBW → ковариация в полосе."""
    data = as_snapshot_data(snapshots, "preprocess_pipeline")
    denoised = np.vstack([wavelet_denoise(row, cfg) for row in data])

    measured = denoised if PipelineOrder(order) == PipelineOrder.DENOISE_FIRST else data
    spectrum = _obw_spectrum(measured, obw_spectrum, reference_element, sample_rate_hz)
    limits = obw_limits(spectrum, beta)
    logger.debug(
        f"preprocess_pipeline: OBW [{limits.f_low_hz:.4g}; {limits.f_high_hz:.4g}] Гц, "
        f"бины {limits.low_index}..{limits.high_index}"
    )

    return PipelineResult(
        covariance=band_filtered_covariance(denoised, limits, sample_rate_hz),
        denoised=SnapshotMatrix(data=denoised, sample_rate_hz=sample_rate_hz),
        filtered=band_filtered_snapshots(denoised, limits, sample_rate_hz),
        power_spectrum=spectrum,
        limits=limits,
    )
