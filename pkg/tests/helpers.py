import numpy as np

from doa_bench.core.models import (
    ChannelVariant,
    GridSpec,
    QpskSource,
    ScenarioConfig,
    SourceRole,
    Spectrum,
    SpectrumKind,
)


def make_scenario(**overrides) -> ScenarioConfig:
    """Полезный QPSK с 20° и помеха 1 Мбит/с с 5°, без замираний."""
    defaults = {
        "sources": (
            QpskSource(doa_deg=20.0, label="soi"),
            QpskSource(
                doa_deg=5.0,
                bit_rate_bps=1e6,
                samples_per_bit=20,
                role=SourceRole.INTERFERER,
                label="interferer",
            ),
        ),
        "channel": ChannelVariant.NO_FADING,
        "snr_db": 10.0,
        "num_snapshots": 1000,
        "num_runs": 4,
        "grid": GridSpec(),
    }
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def synthetic_spectrum(peaks: dict[float, float], step: float = 1.0, base: float = 1.0) -> Spectrum:
    """Спектр на сетке 0..180° с заданными одиночными пиками {угол: высота}."""
    grid = np.round(np.arange(0.0, 180.0 + step / 2, step), 10)
    values = np.full(grid.size, base)
    for angle, height in peaks.items():
        values[int(np.argmin(np.abs(grid - angle)))] = height
    return Spectrum(grid=grid, values=values, kind=SpectrumKind.MUSIC_PSEUDO)
