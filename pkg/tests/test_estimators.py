import math

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from doa_bench.core.array_model import steering_matrix, synthesize_snapshots
from doa_bench.core.estimators import (
    cyclic_correlation,
    cyclic_music_spectrum,
    find_peaks,
    local_maxima,
    music_spectrum,
    sample_covariance,
)
from doa_bench.core.exceptions import ContractError, DegenerateInputError, ModelViolationError
from doa_bench.core.models import CovarianceMatrix, QpskSource, Spectrum, SpectrumKind
from doa_bench.core.numerics import hermitian_evd, svd
from doa_bench.core.utils import angle_grid

from .helpers import make_scenario, synthetic_spectrum


@pytest.fixture
def grid():
    return angle_grid(make_scenario().grid)


def test_grid_has_1801_points(grid):
    assert grid.size == 1801
    assert grid[0] == 0.0 and grid[-1] == 180.0
    assert 20.0 in grid and 5.0 in grid


def test_sample_covariance_is_hermitian_and_scaled(rng):
    data = rng.standard_normal((4, 50)) + 1j * rng.standard_normal((4, 50))
    covariance = sample_covariance(data)
    assert covariance.num_snapshots == 50
    assert np.allclose(covariance.matrix, covariance.matrix.conj().T)
    assert np.allclose(covariance.matrix, data @ data.conj().T / 50)


def test_sample_covariance_rejects_non_finite():
    with pytest.raises(ContractError):
        sample_covariance(np.array([[1.0, np.inf]]))


@pytest.mark.parametrize(
    "doas",
    [(20.0,), (5.0, 20.0), (20.0, 60.0, 120.0)],
)
def test_noise_free_music_recovers_truth(doas, grid):
    sources = tuple(QpskSource(doa_deg=d, label=f"s{i}") for i, d in enumerate(doas))
    scenario = make_scenario(sources=sources, snr_db=math.inf, comparisons=make_scenario().comparisons[:2])
    covariance = sample_covariance(synthesize_snapshots(scenario, 3))
    spectrum = music_spectrum(covariance, len(doas), scenario.geometry, grid)
    result = find_peaks(spectrum, len(doas), guard_deg=2.0)

    assert result.complete
    assert sorted(result.doas_deg) == pytest.approx(sorted(doas), abs=0.05)
    for doa in doas:
        index = int(np.argmin(np.abs(grid - doa)))
        assert spectrum.null_values[index] <= 1e-8


def test_music_rejects_model_order_at_array_size(geometry, grid):
    covariance = CovarianceMatrix(matrix=np.eye(16, dtype=complex), num_snapshots=100)
    with pytest.raises(ModelViolationError):
        music_spectrum(covariance, 16, geometry, grid)


def test_music_flags_flat_covariance(geometry, grid):
    covariance = CovarianceMatrix(matrix=np.eye(16, dtype=complex), num_snapshots=100)
    spectrum = music_spectrum(covariance, 1, geometry, grid)
    assert spectrum.warnings
    assert spectrum.kind == SpectrumKind.MUSIC_PSEUDO


def test_music_separates_close_sources_at_10_db(grid):
    scenario = make_scenario()
    covariance = sample_covariance(synthesize_snapshots(scenario, 1))
    spectrum = music_spectrum(covariance, 2, scenario.geometry, grid)
    result = find_peaks(spectrum, 2)
    assert sorted(result.doas_deg) == pytest.approx([5.0, 20.0], abs=1.0)


def test_cyclic_correlation_of_noise_free_source_is_rank_one():
    scenario = make_scenario(sources=(QpskSource(doa_deg=20.0),), snr_db=math.inf)
    snapshots = synthesize_snapshots(scenario, 5)
    correlation = cyclic_correlation(snapshots, 1e6, 2, sample_rate_hz=snapshots.sample_rate_hz)
    singular = np.linalg.svd(correlation.matrix, compute_uv=False)
    assert correlation.num_snapshots == 1000
    assert correlation.conjugate_variant is True
    assert singular[1] < 1e-8 * singular[0]

    a = steering_matrix(scenario.geometry, [20.0])[:, 0]
    left = np.linalg.svd(correlation.matrix)[0][:, 0]
    assert abs(np.vdot(left, a)) ** 2 / 16 == pytest.approx(1.0, abs=1e-8)


def test_cyclic_correlation_contract():
    data = np.ones((2, 10), dtype=complex)
    with pytest.raises(ContractError):
        cyclic_correlation(data, 1.0, 3)
    with pytest.raises(ContractError):
        cyclic_correlation(data, 1.0, 10)


def test_cyclic_correlation_uses_edge_trimmed_normalization():
    data = np.ones((1, 10), dtype=complex)
    correlation = cyclic_correlation(data, 0.0, 2)
    assert correlation.matrix[0, 0] == pytest.approx(1.0)


def test_non_conjugate_variant_uses_transpose(rng):
    data = rng.standard_normal((3, 40)) + 1j * rng.standard_normal((3, 40))
    plain = cyclic_correlation(data, 0.0, 0, conjugate=False).matrix
    assert np.allclose(plain, data @ data.T / 40)


def test_cyclic_music_selects_signal_of_interest(grid):
    scenario = make_scenario()
    sources = list(scenario.sources)
    sources[1] = QpskSource(
        doa_deg=5.0, bit_rate_bps=1e6, samples_per_bit=20, power=0.1, role="interferer"
    )
    scenario = scenario.with_overrides(sources=tuple(sources))
    snapshots = synthesize_snapshots(scenario, 2)
    correlation = cyclic_correlation(snapshots, scenario.alpha_hz, 2, sample_rate_hz=20e6)
    spectrum = cyclic_music_spectrum(correlation, 1, scenario.geometry, grid)
    result = find_peaks(spectrum, 1)
    assert spectrum.kind == SpectrumKind.CYCLIC_MUSIC_PSEUDO
    assert result.doas_deg[0] == pytest.approx(20.0, abs=1.0)


def test_cyclic_music_rejects_zero_matrix(geometry, grid):
    correlation = cyclic_correlation(np.zeros((16, 20), dtype=complex), 1.0, 2)
    with pytest.raises(DegenerateInputError):
        cyclic_music_spectrum(correlation, 1, geometry, grid)


def test_find_peaks_ties_resolved_by_lower_angle():
    spectrum = synthetic_spectrum({20.0: 10.0, 5.0: 10.0})
    result = find_peaks(spectrum, 2, guard_deg=2.0)
    assert result.doas_deg == (5.0, 20.0)
    assert result.peak_values == (10.0, 10.0)


def test_find_peaks_respects_guard_and_reports_incomplete():
    spectrum = synthetic_spectrum({20.0: 10.0, 21.0: 8.0}, step=0.5)
    result = find_peaks(spectrum, 2, guard_deg=2.0)
    assert result.doas_deg == (20.0,)
    assert not result.complete


def test_find_peaks_refines_asymmetric_peak():
    grid = np.arange(0.0, 10.0, 1.0)
    values = np.exp(-((grid - 4.3) ** 2))
    spectrum = Spectrum(grid=grid, values=values, kind=SpectrumKind.MUSIC_PSEUDO)
    result = find_peaks(spectrum, 1, guard_deg=0.0)
    assert result.doas_deg[0] == pytest.approx(4.3, abs=1e-9)


def test_local_maxima_plateau_leftmost_and_edges_excluded():
    values = np.array([5.0, 1.0, 3.0, 3.0, 1.0, 2.0, 0.0])
    assert list(local_maxima(values)) == [2, 5]


def test_find_peaks_contract():
    spectrum = synthetic_spectrum({20.0: 10.0})
    with pytest.raises(ContractError):
        find_peaks(spectrum, 0)
    with pytest.raises(ContractError):
        find_peaks(spectrum, 1, guard_deg=-1.0)


def test_cyclic_correlation_at_zero_alpha_and_lag_is_sample_covariance(rng):
    data = rng.standard_normal((6, 300)) + 1j * rng.standard_normal((6, 300))
    correlation = cyclic_correlation(data, 0.0, 0, conjugate=True, sample_rate_hz=20e6)
    np.testing.assert_allclose(
        correlation.matrix, sample_covariance(data).matrix, rtol=0, atol=1e-12
    )


@pytest.mark.parametrize("k", [1, 3, 17])
def test_cyclic_correlation_cancels_over_full_period(k):
    c = 0.7 - 1.3j
    n, fs = 400, 20e6
    data = np.full((4, n), c)
    correlation = cyclic_correlation(data, k * fs / n, 0, sample_rate_hz=fs)
    assert np.linalg.norm(correlation.matrix) <= 1e-10 * abs(c) ** 2


@pytest.mark.parametrize("conjugate", [True, False])
def test_cyclic_correlation_matches_scalar_sum(conjugate):
    scenario = make_scenario(snr_db=5.0, num_snapshots=240)
    snapshots = synthesize_snapshots(scenario, 11)
    y = snapshots.data[0]
    fs, alpha, lag = snapshots.sample_rate_hz, scenario.sources[0].symbol_rate_hz, 2
    half = lag // 2

    total = 0j
    for t in range(half, y.size - half):
        lagging = y[t - half] if not conjugate else np.conj(y[t - half])
        total += y[t + half] * lagging * np.exp(-2j * np.pi * alpha * t / fs)
    expected = total / (y.size - lag)

    correlation = cyclic_correlation(snapshots, alpha, lag, conjugate=conjugate, sample_rate_hz=fs)
    assert abs(correlation.matrix[0, 0] - expected) <= 1e-10 * max(1.0, abs(expected))


@pytest.mark.parametrize("scale", [1e-6, 0.3, 7.5, 1e5])
def test_music_peaks_are_scale_invariant(scale, grid):
    scenario = make_scenario(snr_db=5.0)
    covariance = sample_covariance(synthesize_snapshots(scenario, 2))
    scaled = CovarianceMatrix(
        matrix=scale * covariance.matrix, num_snapshots=covariance.num_snapshots
    )
    reference = find_peaks(music_spectrum(covariance, 2, scenario.geometry, grid), 2)
    result = find_peaks(music_spectrum(scaled, 2, scenario.geometry, grid), 2)
    assert result.doas_deg == pytest.approx(reference.doas_deg, abs=1e-6)


def test_cyclic_subspace_at_zero_alpha_equals_music_subspace():
    scenario = make_scenario(snr_db=math.inf)
    snapshots = synthesize_snapshots(scenario, 5)
    correlation = cyclic_correlation(snapshots, 0.0, 0, sample_rate_hz=snapshots.sample_rate_hz)
    left = svd(correlation.matrix).left_vectors[:, :2]
    eigen = hermitian_evd(sample_covariance(snapshots).matrix).eigenvectors[:, :2]
    assert np.max(subspace_angles(left, eigen)) <= 1e-6
