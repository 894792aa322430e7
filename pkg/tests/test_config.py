"""
Тесты загрузки конфигурации
"""
from pathlib import Path

import pytest

from core.exceptions import ConfigError
from core.params import InitialCondition, Phase
from utils.config import load_config


BASE = """
EXPERIMENT=moments
TRANSPORT_V=1.0
TRANSPORT_D_L=0.1
KINETICS_LAMBDA=2
KINETICS_MU=5
RUN_TIMES=0.5, 1, 4
"""


def write_env(tmp_path: Path, text: str) -> str:
    path = tmp_path / "test.env"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_defaults(tmp_path):
    config = load_config(write_env(tmp_path, BASE))
    assert config.experiment == "moments"
    assert config.transport.d_t == 0.0
    assert config.kinetics.lambda_ == 2.0
    assert config.run.times == [0.5, 1.0, 4.0]
    assert config.run.initial is InitialCondition.EQUILIBRIUM
    assert config.run.n == 100_000 and config.run.seed == 42
    assert config.lattice.c is None
    assert config.condmom.phases == [Phase.FREE, Phase.ADSORBED]
    assert config.output.directory == Path("output")
    assert config.output.timestamp is True


def test_overrides_from_file(tmp_path):
    text = BASE + """
RUN_INITIAL=Free
RUN_DIMS=2
GRID_SCALED=yes
GRID_LEVELS=0.2,0.4
CONDMOM_PHASES=Adsorbed
CONDMOM_ORDERS=0,2
OUTPUT_TIMESTAMP=false
LOG_LEVEL=debug
"""
    config = load_config(write_env(tmp_path, text))
    assert config.run.initial is InitialCondition.FREE
    assert config.run.dims == 2
    assert config.grid.scaled is True
    assert config.grid.levels == [0.2, 0.4]
    assert config.condmom.phases == [Phase.ADSORBED]
    assert config.condmom.orders == [0, 2]
    assert config.output.timestamp is False
    assert config.app.log_level == "DEBUG"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(str(tmp_path / "absent.env"))
    assert e.value.key == "--config"


@pytest.mark.parametrize("key", ["EXPERIMENT", "TRANSPORT_V", "KINETICS_MU", "RUN_TIMES"])
def test_missing_required_key(tmp_path, key):
    text = "\n".join(line for line in BASE.splitlines() if not line.startswith(key))
    with pytest.raises(ConfigError) as e:
        load_config(write_env(tmp_path, text))
    assert e.value.key == key


@pytest.mark.parametrize("extra, key", [
    ("RUN_N=many", "RUN_N"),
    ("RUN_N=0", "RUN_N"),
    ("RUN_DIMS=3", "RUN_DIMS"),
    ("RUN_THREADS=0", "RUN_THREADS"),
    ("RUN_INITIAL=liquid", "RUN_INITIAL"),
    ("LATTICE_DT=0", "LATTICE_DT"),
    ("CONDMOM_ORDERS=0,3", "CONDMOM_ORDERS"),
    ("GRID_SCALED=maybe", "GRID_SCALED"),
])
def test_invalid_values(tmp_path, extra, key):
    with pytest.raises(ConfigError) as e:
        load_config(write_env(tmp_path, BASE + extra + "\n"))
    assert e.value.key == key


def test_invalid_parameters_and_times(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(write_env(tmp_path, BASE.replace("KINETICS_LAMBDA=2", "KINETICS_LAMBDA=-2")))
    assert e.value.key == "KINETICS"
    with pytest.raises(ConfigError) as e:
        load_config(write_env(tmp_path, BASE.replace("RUN_TIMES=0.5, 1, 4", "RUN_TIMES=1,-1")))
    assert e.value.key == "RUN_TIMES"
    with pytest.raises(ConfigError) as e:
        load_config(write_env(tmp_path, BASE.replace("EXPERIMENT=moments", "EXPERIMENT=plot")))
    assert e.value.key == "EXPERIMENT"


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "validate"])
def test_presets_load(name):
    preset = Path(__file__).resolve().parent.parent / "presets" / f"{name}.env"
    config = load_config(str(preset))
    assert config.run.times
