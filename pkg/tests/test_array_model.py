import math

import numpy as np
import pytest

from doa_bench.core.array_model import (
    GRAY_QPSK,
    draw_channel,
    electrical_phase,
    generate_noise,
    generate_qpsk,
    hold_symbols,
    qpsk_symbols,
    steering_matrix,
    steering_vector,
    synthesize_snapshots,
)
from doa_bench.core.exceptions import ConfigurationError, ContractError, ModelViolationError
from doa_bench.core.models import (
    ArrayGeometry,
    ChannelVariant,
    QpskSource,
)
from doa_bench.core.utils import StreamRole, rng_stream

from .helpers import make_scenario


def test_default_geometry_is_half_wavelength_at_2_4_ghz(geometry):
    assert geometry.num_elements == 16
    assert geometry.wavelength == pytest.approx(0.125)
    assert geometry.spacing_m == pytest.approx(0.0625)
    assert geometry.spacing_wavelengths == pytest.approx(0.5)


def test_broadside_steering_vector_is_all_ones(geometry):
    vector = steering_vector(geometry, 90.0)
    assert np.allclose(vector.entries, np.ones(16), atol=1e-12)


def test_steering_vector_norm_and_phase_progression(geometry):
    vector = steering_vector(geometry, 20.0)
    phi = math.pi * math.cos(math.radians(20.0))
    assert vector.electrical_phase == pytest.approx(phi)
    assert np.vdot(vector.entries, vector.entries).real == pytest.approx(16.0)
    assert np.isclose(vector.entries[1], np.exp(-1j * phi))
    assert np.allclose(vector.entries[1:] / vector.entries[:-1], np.exp(-1j * phi))


def test_endfire_phase_equals_pi(geometry):
    assert electrical_phase(geometry, 0.0) == pytest.approx(math.pi)


def test_steering_matrix_stacks_vectors(geometry):
    matrix = steering_matrix(geometry, [5.0, 20.0])
    assert matrix.shape == (16, 2)
    assert np.allclose(matrix[:, 1], steering_vector(geometry, 20.0).entries)


def test_angle_outside_range_is_rejected(geometry):
    with pytest.raises(ConfigurationError):
        steering_vector(geometry, 181.0)
    with pytest.raises(ConfigurationError):
        QpskSource(doa_deg=-1.0)


def test_gray_mapping():
    bits = [0, 0, 0, 1, 1, 1, 1, 0]
    symbols = qpsk_symbols(bits)
    s = 1 / math.sqrt(2)
    assert np.allclose(symbols, [s + 1j * s, -s + 1j * s, -s - 1j * s, s - 1j * s])
    assert np.isclose(GRAY_QPSK[(1, 1)], complex(-s, -s))


def test_qpsk_symbols_reject_odd_bit_count():
    with pytest.raises(ContractError):
        qpsk_symbols([0, 1, 1])


def test_hold_symbols_rectangular_pulse():
    waveform = hold_symbols(np.array([1 + 1j, -1 - 1j]), 3, 5)
    assert np.array_equal(waveform, [1 + 1j] * 3 + [-1 - 1j] * 2)


def test_source_timing_defaults():
    source = QpskSource(doa_deg=20.0)
    assert source.bit_duration_s == pytest.approx(0.5e-6)
    assert source.sample_rate_hz == pytest.approx(20e6)
    assert source.samples_per_symbol == 20
    assert source.symbol_rate_hz == pytest.approx(1e6)
    assert source.has_cycle_frequency(4e6)
    assert not source.has_cycle_frequency(1.5e6)


def test_generate_qpsk_power_and_symbol_hold():
    source = QpskSource(doa_deg=20.0, power=2.0)
    waveform = generate_qpsk(source, 1000, rng_seed=7)
    assert waveform.shape == (1000,)
    assert np.allclose(np.abs(waveform) ** 2, 2.0)
    blocks = waveform.reshape(-1, 20)
    assert np.all(blocks == blocks[:, :1])


def test_generate_qpsk_is_seed_deterministic():
    source = QpskSource(doa_deg=20.0)
    assert np.array_equal(generate_qpsk(source, 200, 3), generate_qpsk(source, 200, 3))
    assert not np.array_equal(generate_qpsk(source, 200, 3), generate_qpsk(source, 200, 4))


def test_noise_power_and_whiteness():
    noise = generate_noise(4, 200_000, 0.5, rng_seed=1)
    covariance = noise @ noise.conj().T / noise.shape[1]
    assert np.allclose(np.diag(covariance).real, 0.5, rtol=0.02)
    off_diagonal = covariance - np.diag(np.diag(covariance))
    assert np.max(np.abs(off_diagonal)) < 0.01
    assert abs(np.mean(noise**2)) < 0.01


def test_rng_streams_are_independent_by_role():
    bits = rng_stream(5, StreamRole.SOURCE_BITS).standard_normal(4)
    noise = rng_stream(5, StreamRole.NOISE).standard_normal(4)
    assert not np.array_equal(bits, noise)
    assert np.array_equal(noise, rng_stream(5, StreamRole.NOISE).standard_normal(4))


def test_channel_shapes():
    rng = np.random.default_rng(0)
    assert draw_channel(ChannelVariant.NO_FADING, 2, 16, rng).fading_coeffs is None
    assert draw_channel(ChannelVariant.COHERENT_WAVEFRONT, 2, 16, rng).fading_coeffs.shape == (2,)
    non_coherent = draw_channel(ChannelVariant.NON_COHERENT_ELEMENT, 2, 16, rng)
    assert non_coherent.fading_coeffs.shape == (16, 2)


def test_rayleigh_coefficients_have_unit_power():
    channel = draw_channel(ChannelVariant.NON_COHERENT_ELEMENT, 2000, 16, rng=3)
    assert np.mean(np.abs(channel.fading_coeffs) ** 2) == pytest.approx(1.0, rel=0.02)


def test_noise_free_snapshots_have_rank_equal_to_sources():
    scenario = make_scenario(snr_db=math.inf)
    snapshots = synthesize_snapshots(scenario, rng_seed=11)
    assert snapshots.data.shape == (16, 1000)
    assert snapshots.sample_rate_hz == pytest.approx(20e6)
    singular = np.linalg.svd(snapshots.data, compute_uv=False)
    assert singular[2] < 1e-10 * singular[0]
    assert singular[1] > 1e-3 * singular[0]


def test_same_seed_reuses_signal_part_across_snr():
    scenario = make_scenario()
    clean = synthesize_snapshots(scenario, 9, snr_db=math.inf).data
    low = synthesize_snapshots(scenario, 9, snr_db=0.0).data
    high = synthesize_snapshots(scenario, 9, snr_db=10.0).data
    assert np.allclose((low - clean) / math.sqrt(10.0), high - clean)


def test_measured_snr_matches_configuration():
    scenario = make_scenario(num_snapshots=20_000)
    clean = synthesize_snapshots(scenario, 2, snr_db=math.inf).data
    noisy = synthesize_snapshots(scenario, 2, snr_db=10.0).data
    noise_power = np.mean(np.abs(noisy - clean) ** 2)
    assert 10 * math.log10(1.0 / noise_power) == pytest.approx(10.0, abs=0.1)


def test_coherent_fading_preserves_steering_structure():
    scenario = make_scenario(
        snr_db=math.inf, channel=ChannelVariant.COHERENT_WAVEFRONT
    )
    data = synthesize_snapshots(scenario, 4).data
    steering = steering_matrix(scenario.geometry, scenario.doas_deg)
    residual = data - steering @ np.linalg.lstsq(steering, data, rcond=None)[0]
    assert np.linalg.norm(residual) < 1e-9 * np.linalg.norm(data)


def test_too_many_sources_is_model_violation():
    sources = tuple(QpskSource(doa_deg=10.0 * (i + 1)) for i in range(4))
    scenario = make_scenario(
        sources=sources, geometry=ArrayGeometry(num_elements=4), comparisons=make_scenario().comparisons[:2]
    )
    with pytest.raises(ModelViolationError):
        synthesize_snapshots(scenario, 0)


@pytest.mark.parametrize("k", [1, 2, 5, 8, 15, 16])
def test_steering_matrix_has_full_column_rank(geometry, k):
    # равномерный шаг по cos θ: узлы Вандермонда равномерно на окружности
    thetas = np.rad2deg(np.arccos(1.0 - (2.0 * np.arange(k) + 1.0) / k))
    singular = np.linalg.svd(steering_matrix(geometry, thetas), compute_uv=False)
    assert singular.size == k
    assert singular[-1] > 1e-8 * singular[0]


def test_random_distinct_angles_give_full_rank(geometry, rng):
    for _ in range(20):
        k = int(rng.integers(2, 6))
        thetas = rng.choice(np.arange(1.0, 180.0), size=k, replace=False)
        singular = np.linalg.svd(steering_matrix(geometry, thetas), compute_uv=False)
        assert np.linalg.matrix_rank(steering_matrix(geometry, thetas)) == k
        assert singular[-1] > 1e-8 * singular[0]


def test_duplicate_doas_are_rejected(geometry):
    sources = (QpskSource(doa_deg=20.0), QpskSource(doa_deg=20.0, label="copy"))
    with pytest.raises(ConfigurationError) as error:
        synthesize_snapshots(make_scenario(sources=sources), 0)
    assert error.value.field == "sources.doa_deg"
