import math

import pytest

from doa_bench.core.exceptions import ConfigurationError, ModelViolationError, ScenarioParseError
from doa_bench.core.models import ChannelVariant, Comparison, EstimatorKind, SourceRole
from doa_bench.infra.scenario_store import scenarios

MINIMAL = """
[[sources]]
doa_deg = 20.0
"""


def test_bundled_scenarios_are_listed():
    names = scenarios.bundled_names()
    assert {"paper_default", "paper_cyclic_4mhz", "low_snr_pipeline", "snapshot_sweep"} <= set(names)


def test_paper_default_reproduces_reference_settings():
    scenario = scenarios.load("paper_default")
    assert scenario.name == "paper_default"
    assert scenario.geometry.num_elements == 16
    assert scenario.geometry.carrier_freq_hz == 2.4e9
    assert scenario.geometry.spacing_m == pytest.approx(0.0625)
    assert scenario.doas_deg == (20.0, 5.0)
    assert scenario.sources[0].bit_duration_s == pytest.approx(0.5e-6)
    assert scenario.sample_rate_hz == pytest.approx(20e6)
    assert scenario.sources[1].role == SourceRole.INTERFERER
    assert scenario.sources[1].bit_rate_bps == 1e6
    assert scenario.snr_db == 10.0
    assert scenario.snr_sweep_db == (0.0, 5.0, 10.0, 15.0, 20.0)
    assert scenario.num_snapshots == 1000
    assert scenario.num_runs == 1000
    assert scenario.cyclic.lag_samples == 2
    assert scenario.alpha_hz == 1e6
    assert scenario.grid.num_points == 1801
    assert len(scenario.comparisons) == 4


def test_cyclic_4mhz_scenario_uses_harmonic():
    scenario = scenarios.load("paper_cyclic_4mhz")
    assert scenario.alpha_hz == 4e6
    assert scenario.estimator == EstimatorKind.CYCLIC_MUSIC
    assert scenario.target_doas() == (20.0,)


def test_paper_default_interferer_is_cyclostationary_at_alpha():
    # равная мощность: Cyclic MUSIC видит и помеху, поэтому оценка смещена к 5°
    scenario = scenarios.load("paper_default")
    assert scenario.sources[1].has_cycle_frequency(scenario.alpha_hz)
    assert scenario.sources[1].power == pytest.approx(scenario.sources[0].power)


def test_snapshot_sweep_scenario():
    scenario = scenarios.load("snapshot_sweep")
    assert scenario.snapshots_sweep == (100, 200, 500, 1000, 2000)
    assert scenario.snr_db == 0.0
    assert scenario.sources[1].power == pytest.approx(0.1)
    assert scenario.comparisons == (
        Comparison(EstimatorKind.MUSIC, False),
        Comparison(EstimatorKind.CYCLIC_MUSIC, False),
    )
    assert scenario.to_dict()["snapshots_sweep"] == (100, 200, 500, 1000, 2000)


def test_minimal_scenario_fills_defaults():
    scenario = scenarios.parse(MINIMAL)
    assert scenario.geometry.num_elements == 16
    assert scenario.channel == ChannelVariant.NO_FADING
    assert scenario.n_sources == 1
    assert scenario.sources[0].label == "source0"


def test_isr_db_scales_interferer_power():
    text = MINIMAL + """
[[sources]]
doa_deg = 5.0
role = "interferer"
isr_db = -10.0
"""
    scenario = scenarios.parse(text)
    assert scenario.sources[1].power == pytest.approx(0.1)


def test_isr_db_on_first_source_is_rejected():
    with pytest.raises(ConfigurationError) as error:
        scenarios.parse("[[sources]]\ndoa_deg = 20.0\nisr_db = 3.0\n")
    assert error.value.field == "sources[0].isr_db"


@pytest.mark.parametrize(
    "text, field",
    [
        ("[array]\nbogus = 1\n" + MINIMAL, "array.bogus"),
        ("[nonsense]\nx = 1\n" + MINIMAL, "nonsense"),
        ("[[sources]]\ndoa_deg = 20.0\npower_dbm = 3\n", "sources[0].power_dbm"),
        ("[cyclic]\nlag_samples = 3\n" + MINIMAL, "cyclic.lag_samples"),
        ("[preprocessing]\nbeta_fraction = 1.5\n" + MINIMAL, "preprocessing.beta_fraction"),
        ("[array]\nnum_elements = 1\n" + MINIMAL, "array.num_elements"),
        ("[[sources]]\ndoa_deg = 200.0\n", "sources[0].doa_deg"),
        ("[grid]\nstep_deg = 0.0\n" + MINIMAL, "grid.step_deg"),
        ("[montecarlo]\nnum_runs = 0\n" + MINIMAL, "montecarlo.num_runs"),
        ("[montecarlo]\nsnapshots_sweep = [100, 1]\n" + MINIMAL, "montecarlo.snapshots_sweep"),
        ("[montecarlo]\nsnapshots_sweep = [100, 100]\n" + MINIMAL, "montecarlo.snapshots_sweep"),
        ("[montecarlo]\nsnapshots_sweep = 100\n" + MINIMAL, "montecarlo.snapshots_sweep"),
        ("[montecarlo]\nsnapshots_sweep = [2, 10]\n" + MINIMAL, "montecarlo.snapshots_sweep"),
    ],
)
def test_invalid_values_report_key_path(text, field):
    with pytest.raises(ConfigurationError) as error:
        scenarios.parse(text)
    assert error.value.field == field


def test_odd_lag_message():
    with pytest.raises(ConfigurationError, match="lag должен быть чётным"):
        scenarios.parse("[cyclic]\nlag_samples = 3\n" + MINIMAL)


def test_model_order_equal_to_array_size_is_model_violation():
    with pytest.raises(ModelViolationError):
        scenarios.parse("[estimator]\nn_sources = 16\n" + MINIMAL)


def test_cyclic_sources_must_exist_at_alpha():
    text = "[estimator]\nkind = \"cyclic_music\"\n[cyclic]\nn_cyclic_sources = 2\n" + MINIMAL
    with pytest.raises(ConfigurationError) as error:
        scenarios.parse(text)
    assert error.value.field == "cyclic.n_cyclic_sources"


def test_comparisons_are_parsed():
    text = '[montecarlo]\ncomparisons = ["music/raw", "cyclic_music/pipeline"]\n' + MINIMAL
    scenario = scenarios.parse(text)
    assert scenario.comparisons == (
        Comparison(EstimatorKind.MUSIC, False),
        Comparison(EstimatorKind.CYCLIC_MUSIC, True),
    )


def test_bad_comparison_label():
    with pytest.raises(ConfigurationError):
        scenarios.parse('[montecarlo]\ncomparisons = ["music/maybe"]\n' + MINIMAL)


def test_infinite_snr_is_allowed():
    scenario = scenarios.parse("[noise]\nsnr_db = inf\n" + MINIMAL)
    assert math.isinf(scenario.snr_db)
    assert scenario.noise.noise_power() == 0.0


def test_malformed_toml_reports_line_and_column():
    with pytest.raises(ScenarioParseError) as error:
        scenarios.parse("[array]\nnum_elements = = 4\n", source="broken.toml")
    assert error.value.line == 2
    assert error.value.column is not None
    assert "строка 2" in str(error.value)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ScenarioParseError, match="не найден"):
        scenarios.load(str(tmp_path / "absent.toml"))


def test_load_from_path(tmp_path):
    path = tmp_path / "custom.toml"
    path.write_text(MINIMAL, encoding="utf-8")
    scenario = scenarios.load(str(path))
    assert scenario.name == "custom"
    assert scenario.doas_deg == (20.0,)
