"""Синтез принимаемых данных: векторы управления, QPSK, замирания и шум."""

import math
from collections.abc import Sequence
from typing import Optional, Union

import numpy as np

from .exceptions import ConfigurationError, ContractError
from .models import (
    ArrayGeometry,
    ChannelModel,
    ChannelVariant,
    ComplexArray,
    QpskSource,
    ScenarioConfig,
    SnapshotMatrix,
    SteeringVector,
)
from .utils import StreamRole, rng_stream, validate_scenario

# Код Грея: 00 → (1+j)/√2, 01 → (−1+j)/√2, 11 → (−1−j)/√2, 10 → (1−j)/√2
GRAY_QPSK: dict[tuple[int, int], complex] = {
    (0, 0): complex(1, 1) / math.sqrt(2),
    (0, 1): complex(-1, 1) / math.sqrt(2),
    (1, 1): complex(-1, -1) / math.sqrt(2),
    (1, 0): complex(1, -1) / math.sqrt(2),
}

_GRAY_TABLE = np.array(
    [GRAY_QPSK[(0, 0)], GRAY_QPSK[(0, 1)], GRAY_QPSK[(1, 0)], GRAY_QPSK[(1, 1)]]
)

SeedLike = Union[int, np.random.Generator]


def electrical_phase(geometry: ArrayGeometry, theta_deg: float) -> float:
    return 2.0 * math.pi / geometry.wavelength * float(geometry.spacing_m) * math.cos(
        math.radians(theta_deg)
    )


def steering_vector(geometry: ArrayGeometry, theta_deg: float) -> SteeringVector:
    """a(θ) = [1, e^{−jφ}, …, e^{−j(m−1)φ}]ᵀ."""
    if not 0.0 <= theta_deg <= 180.0:
        raise ConfigurationError("theta_deg", f"угол {theta_deg} вне диапазона [0, 180]")
    phi = electrical_phase(geometry, theta_deg)
    k = np.arange(geometry.num_elements)
    return SteeringVector(entries=np.exp(-1j * k * phi), electrical_phase=phi)


def steering_matrix(geometry: ArrayGeometry, thetas_deg: Sequence[float]) -> ComplexArray:
    """Матрица m×k из векторов управления для набора углов."""
    thetas = np.asarray(thetas_deg, dtype=float)
    phases = (
        2.0 * np.pi / geometry.wavelength * float(geometry.spacing_m) * np.cos(np.deg2rad(thetas))
    )
    k = np.arange(geometry.num_elements)[:, np.newaxis]
    return np.exp(-1j * k * phases[np.newaxis, :])


def _generator(seed: SeedLike, role: StreamRole, index: int = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_stream(int(seed), role, index)


def qpsk_symbols(bits) -> ComplexArray:
    """Отображение пар бит в символы QPSK по коду Грея."""
    bits = np.asarray(bits, dtype=int).reshape(-1)
    if bits.size % 2:
        raise ContractError("qpsk_symbols", "число бит должно быть чётным")
    if np.any((bits != 0) & (bits != 1)):
        raise ContractError("qpsk_symbols", "биты должны быть 0 или 1")
    pairs = bits.reshape(-1, 2)
    return _GRAY_TABLE[2 * pairs[:, 0] + pairs[:, 1]]


def hold_symbols(symbols, samples_per_symbol: int, num_samples: int) -> ComplexArray:
    """Прямоугольный импульс: каждый символ удерживается samples_per_symbol отсчётов."""
    if num_samples < 1:
        raise ContractError("hold_symbols", "num_samples должно быть >= 1")
    waveform = np.repeat(np.asarray(symbols, dtype=complex), samples_per_symbol)
    if waveform.size < num_samples:
        raise ContractError("hold_symbols", "недостаточно символов для заданной длины")
    return waveform[:num_samples]


def generate_qpsk(source: QpskSource, num_samples: int, rng_seed: SeedLike) -> ComplexArray:
    """Комплексная огибающая QPSK средней мощности source.power."""
    if num_samples < 1:
        raise ContractError("generate_qpsk", "num_samples должно быть >= 1")
    rng = _generator(rng_seed, StreamRole.SOURCE_BITS)
    num_symbols = -(-num_samples // source.samples_per_symbol)
    bits = rng.integers(0, 2, size=2 * num_symbols)
    waveform = hold_symbols(qpsk_symbols(bits), source.samples_per_symbol, num_samples)
    return math.sqrt(source.power) * waveform


def generate_noise(
    num_elements: int, num_samples: int, noise_power: float, rng_seed: SeedLike
) -> ComplexArray:
    """Круговой комплексный белый гауссов шум мощности noise_power на элемент."""
    if noise_power < 0:
        raise ContractError("generate_noise", "мощность шума не может быть отрицательной")
    rng = _generator(rng_seed, StreamRole.NOISE)
    shape = (num_elements, num_samples)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return math.sqrt(noise_power / 2.0) * noise


def draw_channel(
    variant: ChannelVariant, num_users: int, num_elements: int, rng: SeedLike
) -> ChannelModel:
    """Реализация коэффициентов замираний Рэлея (CN(0, 1))."""
    variant = ChannelVariant(variant)
    generator = _generator(rng, StreamRole.FADING)
    if variant == ChannelVariant.NO_FADING:
        return ChannelModel(variant=variant)
    shape = (num_users,) if variant == ChannelVariant.COHERENT_WAVEFRONT else (num_elements, num_users)
    coeffs = (generator.standard_normal(shape) + 1j * generator.standard_normal(shape)) / math.sqrt(2)
    return ChannelModel(variant=variant, fading_coeffs=coeffs)


def mixing_matrix(scenario: ScenarioConfig, channel: ChannelModel) -> ComplexArray:
    """Матрица m×n, связывающая сигналы источников с элементами решётки."""
    steering = steering_matrix(scenario.geometry, scenario.doas_deg)
    if channel.variant == ChannelVariant.COHERENT_WAVEFRONT:
        return steering * channel.fading_coeffs[np.newaxis, :]
    if channel.variant == ChannelVariant.NON_COHERENT_ELEMENT:
        return np.array(channel.fading_coeffs, dtype=complex)
    return steering


def synthesize_snapshots(
    scenario: ScenarioConfig, rng_seed: int, snr_db: Optional[float] = None
) -> SnapshotMatrix:
    """y(t) = A(Φ)x(t) + n(t) с учётом модели канала.

    Потоки бит, замираний и шума независимы и определяются только (rng_seed, роль),
    поэтому одно и то же зерно даёт одни и те же данные при любом ОСШ.
    """
    validate_scenario(scenario)
    if snr_db is not None:
        scenario = scenario.with_overrides(snr_db=snr_db)

    m = scenario.geometry.num_elements
    n_samples = scenario.num_snapshots
    signals = np.vstack(
        [
            generate_qpsk(src, n_samples, rng_stream(rng_seed, StreamRole.SOURCE_BITS, index))
            for index, src in enumerate(scenario.sources)
        ]
    )
    channel = draw_channel(
        scenario.channel, len(scenario.sources), m, rng_stream(rng_seed, StreamRole.FADING)
    )
    data = mixing_matrix(scenario, channel) @ signals

    noise_power = scenario.noise.noise_power(scenario.signal_power)
    if noise_power > 0:
        data = data + generate_noise(
            m, n_samples, noise_power, rng_stream(rng_seed, StreamRole.NOISE)
        )
    return SnapshotMatrix(data=data, sample_rate_hz=scenario.sample_rate_hz)
