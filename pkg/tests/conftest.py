import math

import numpy as np
import pytest

from doa_bench.core.models import ArrayGeometry, Comparison, EstimatorKind
from doa_bench.infra.scenario_store import scenarios
from doa_bench.infra.settings import settings

from .helpers import make_scenario


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path):
    """Логи и результаты каждого теста уходят во временный каталог."""
    settings.reload()
    settings.set("log_file", str(tmp_path / "logs" / "doa_bench.log"))
    settings.set("output_dir", str(tmp_path / "results"))
    scenarios.clear_cache()
    yield
    settings.reload()


@pytest.fixture
def geometry():
    return ArrayGeometry()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_source_scenario():
    return make_scenario()


@pytest.fixture
def noise_free_scenario():
    return make_scenario(
        snr_db=math.inf,
        snr_sweep_db=(math.inf,),
        comparisons=(Comparison(EstimatorKind.MUSIC, False),),
    )
