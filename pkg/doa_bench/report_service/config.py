"""Конфигурация сервиса отчётов."""

from dataclasses import dataclass


@dataclass
class ReportConfig:
    """Схемы CSV и имена файлов по умолчанию."""

    # ========== Схемы CSV ==========
    SPECTRUM_COLUMNS: tuple[str, ...] = ("angle_deg", "value", "value_db")
    SWEEP_COLUMNS: tuple[str, ...] = (
        "snr_db",
        "estimator",
        "preprocessing",
        "rmse_deg",
        "resolution_rate",
        "mean_spurious_db",
        "runs",
    )
    SNAPSHOT_SWEEP_COLUMNS: tuple[str, ...] = ("num_snapshots",) + SWEEP_COLUMNS

    # ========== Имена файлов ==========
    SPECTRUM_CSV: str = "spectrum.csv"
    SPECTRUM_SVG: str = "spectrum.svg"
    SWEEP_CSV: str = "sweep.csv"
    SWEEP_SVG: str = "sweep.svg"
    SNAPSHOT_SUFFIX: str = "_snapshots"

    # ========== Форматирование ==========
    FLOAT_FORMAT: str = ".10g"
    SVG_HASHSALT: str = "doa-bench"
    FIGURE_SIZE_IN: tuple[float, float] = (8.0, 4.5)


# Глобальный экземпляр конфигурации
config = ReportConfig()
