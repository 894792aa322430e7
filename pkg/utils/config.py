"""
Модуль для загрузки и управления конфигурацией эксперимента
"""
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import dotenv_values

from core.exceptions import ConfigError, ParameterError
from core.params import InitialCondition, KineticsParams, Phase, TransportParams


EXPERIMENTS = ("simulate", "lattice", "moments", "plume1d", "plume2d", "condmom", "validate")


@dataclass
class RunConfig:
    """Времена, размер ансамбля, зерно"""
    times: list[float]
    n: int = 100_000
    seed: int = 42
    initial: InitialCondition = InitialCondition.EQUILIBRIUM
    dims: int = 1
    threads: int = 1
    bins: int = 100


@dataclass
class LatticeSettings:
    """Параметры решётки"""
    dt: float = 0.01
    c: Optional[float] = None
    steps: Optional[int] = None


@dataclass
class GridConfig:
    """Сетки профилей и полей"""
    nx: int = 201
    ny: int = 101
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    y_max: Optional[float] = None
    scaled: bool = False
    levels: list[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])


@dataclass
class CondmomConfig:
    """Условные моменты"""
    orders: list[int] = field(default_factory=lambda: [0, 1, 2])
    stehfest_n: int = 12
    phases: list[Phase] = field(default_factory=lambda: [Phase.FREE, Phase.ADSORBED])


@dataclass
class NumericsConfig:
    """Точность квадратур"""
    quad_tol: float = 1e-8
    max_panels: int = 4096


@dataclass
class OutputConfig:
    """Каталог и заголовки выходных файлов"""
    directory: Path = Path("output")
    timestamp: bool = True


@dataclass
class AppConfig:
    """Общая конфигурация приложения"""
    log_level: str = "INFO"
    log_file: Optional[str] = None


@dataclass
class ExperimentConfig:
    """Главный класс конфигурации"""
    experiment: str
    transport: TransportParams
    kinetics: KineticsParams
    run: RunConfig
    lattice: LatticeSettings
    grid: GridConfig
    condmom: CondmomConfig
    numerics: NumericsConfig
    output: OutputConfig
    app: AppConfig


class _Reader:
    """Чтение и приведение типов значений с указанием ключа в ошибке"""

    def __init__(self, values: dict[str, Optional[str]]):
        self.values = {k.upper(): v for k, v in values.items() if v is not None and v.strip() != ""}

    def raw(self, key: str, default=None, required: bool = False) -> Optional[str]:
        if key in self.values:
            return self.values[key].strip()
        if required:
            raise ConfigError(f"Отсутствует обязательный ключ {key}", key=key)
        return default

    def _cast(self, key, cast, default, required):
        value = self.raw(key, required=required)
        if value is None:
            return default
        try:
            return cast(value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Некорректное значение {key}={value!r}: {e}", key=key) from None

    def float(self, key: str, default=None, required: bool = False):
        return self._cast(key, float, default, required)

    def int(self, key: str, default=None, required: bool = False):
        return self._cast(key, int, default, required)

    def bool(self, key: str, default: bool = False) -> bool:
        return self._cast(key, _parse_bool, default, False)

    def list(self, key: str, cast, default=None, required: bool = False):
        return self._cast(key, lambda v: [cast(item.strip()) for item in v.split(",") if item.strip()], default, required)


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError("ожидается true/false")


def _build(key: str, factory, *args, **kwargs):
    # Проверка предусловий модулей при загрузке
    try:
        return factory(*args, **kwargs)
    except ParameterError as e:
        raise ConfigError(f"{key}: {e}", key=key) from None


def load_config(env_file: str = ".env") -> ExperimentConfig:
    """
    Загрузка конфигурации эксперимента из .env файла

    LOG_LEVEL и LOG_FILE при отсутствии в файле берутся из окружения.

    Args:
        env_file: Путь к .env файлу

    Returns:
        ExperimentConfig: Объект конфигурации

    Raises:
        ConfigError: Нет обязательного ключа или значение не разбирается
    """
    path = Path(env_file)
    if not path.is_file():
        raise ConfigError(f"Файл конфигурации не найден: {env_file}", key="--config")

    r = _Reader(dotenv_values(path))

    experiment = r.raw("EXPERIMENT", required=True).lower()
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"EXPERIMENT должен быть одним из {EXPERIMENTS}, получено {experiment}", key="EXPERIMENT")

    # Transport
    transport = _build(
        "TRANSPORT", TransportParams,
        v=r.float("TRANSPORT_V", required=True),
        d_l=r.float("TRANSPORT_D_L", required=True),
        d_t=r.float("TRANSPORT_D_T", 0.0),
    )

    # Kinetics
    kinetics = _build(
        "KINETICS", KineticsParams,
        lambda_=r.float("KINETICS_LAMBDA", required=True),
        mu=r.float("KINETICS_MU", required=True),
    )

    # Run
    run = RunConfig(
        times=r.list("RUN_TIMES", float, required=True),
        n=r.int("RUN_N", 100_000),
        seed=r.int("RUN_SEED", 42),
        initial=_build("RUN_INITIAL", InitialCondition.coerce, r.raw("RUN_INITIAL", "equilibrium")),
        dims=r.int("RUN_DIMS", 1),
        threads=r.int("RUN_THREADS", 1),
        bins=r.int("RUN_BINS", 100),
    )
    if not run.times or any(t <= 0 for t in run.times):
        raise ConfigError(f"RUN_TIMES должны быть положительны: {run.times}", key="RUN_TIMES")
    if run.n < 1:
        raise ConfigError(f"RUN_N должно быть >= 1, получено {run.n}", key="RUN_N")
    if run.dims not in (1, 2):
        raise ConfigError(f"RUN_DIMS должно быть 1 или 2, получено {run.dims}", key="RUN_DIMS")
    if run.threads < 1:
        raise ConfigError(f"RUN_THREADS должно быть >= 1, получено {run.threads}", key="RUN_THREADS")

    # Lattice
    lattice = LatticeSettings(
        dt=r.float("LATTICE_DT", 0.01),
        c=r.float("LATTICE_C"),
        steps=r.int("LATTICE_STEPS"),
    )
    if lattice.dt <= 0:
        raise ConfigError(f"LATTICE_DT должно быть > 0, получено {lattice.dt}", key="LATTICE_DT")

    # Grid
    grid = GridConfig(
        nx=r.int("GRID_NX", 201),
        ny=r.int("GRID_NY", 101),
        x_min=r.float("GRID_X_MIN"),
        x_max=r.float("GRID_X_MAX"),
        y_max=r.float("GRID_Y_MAX"),
        scaled=r.bool("GRID_SCALED", False),
        levels=r.list("GRID_LEVELS", float, [0.1, 0.3, 0.5, 0.7, 0.9]),
    )

    # Condmom
    condmom = CondmomConfig(
        orders=r.list("CONDMOM_ORDERS", int, [0, 1, 2]),
        stehfest_n=r.int("CONDMOM_STEHFEST_N", 12),
        phases=r.list("CONDMOM_PHASES", lambda p: Phase(p.lower()), [Phase.FREE, Phase.ADSORBED]),
    )
    if any(order not in (0, 1, 2) for order in condmom.orders):
        raise ConfigError(f"CONDMOM_ORDERS допускает 0, 1, 2: {condmom.orders}", key="CONDMOM_ORDERS")

    # Numerics
    numerics = NumericsConfig(
        quad_tol=r.float("NUMERICS_QUAD_TOL", 1e-8),
        max_panels=r.int("NUMERICS_MAX_PANELS", 4096),
    )

    # Output
    output = OutputConfig(
        directory=Path(r.raw("OUTPUT_DIR", "output")),
        timestamp=r.bool("OUTPUT_TIMESTAMP", True),
    )

    # App
    app = AppConfig(
        log_level=r.raw("LOG_LEVEL", os.getenv("LOG_LEVEL", "INFO")).upper(),
        log_file=r.raw("LOG_FILE", os.getenv("LOG_FILE")),
    )

    return ExperimentConfig(
        experiment=experiment,
        transport=transport,
        kinetics=kinetics,
        run=run,
        lattice=lattice,
        grid=grid,
        condmom=condmom,
        numerics=numerics,
        output=output,
        app=app,
    )
