"""
Запись результатов: CSV с заголовком метаданных и бинарные сетки
"""
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from analytics.planar import DensityField2D
from utils.logger import setup_logger

logger = setup_logger()


PACKAGE_VERSION = "1.0.0"
FLOAT_FORMAT = "%.12g"
GRID_MAGIC = "SPGRID1"


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return ",".join(_format(v) for v in value)
    return str(getattr(value, "value", value))


def metadata_lines(metadata: dict[str, Any], timestamp: bool = True) -> list[str]:
    """
    Строки заголовка '# key: value'

    Args:
        metadata: Параметры запуска
        timestamp: Добавить строку с временем создания

    Returns:
        list[str]: Строки без перевода строки
    """
    lines = [f"# version: {PACKAGE_VERSION}"]
    lines.extend(f"# {key}: {_format(value)}" for key, value in metadata.items())
    if timestamp:
        lines.append(f"# created: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    return lines


def write_csv(frame: pd.DataFrame, path: Path, metadata: dict[str, Any], timestamp: bool = True) -> Path:
    """
    CSV с '#'-заголовком и фиксированным форматом чисел

    При timestamp=False повторный запуск даёт побайтно тот же файл.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for line in metadata_lines(metadata, timestamp):
            f.write(line + "\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Записан файл {path} ({len(frame)} строк)")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Чтение CSV с пропуском заголовка метаданных"""
    return pd.read_csv(path, comment="#")


def write_grid(field: DensityField2D, path: Path) -> Path:
    """
    Бинарная сетка: строка 'SPGRID1 nx ny x0 x1 y0 y1', затем float64 little-endian по строкам (y)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ny, nx = field.values.shape
    header = f"{GRID_MAGIC} {nx} {ny} {field.x[0]:.17g} {field.x[-1]:.17g} {field.y[0]:.17g} {field.y[-1]:.17g}\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        np.ascontiguousarray(field.values, dtype="<f8").tofile(f)
    logger.info(f"Записана сетка {path} ({ny}x{nx})")
    return path


def read_grid(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Чтение бинарной сетки

    Returns:
        tuple: (x, y, values[ny, nx]); x, y восстановлены как равномерные центры
    """
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").split()
        if not header or header[0] != GRID_MAGIC:
            raise ValueError(f"{path}: не файл сетки {GRID_MAGIC}")
        nx, ny = int(header[1]), int(header[2])
        x0, x1, y0, y1 = (float(v) for v in header[3:7])
        values = np.fromfile(f, dtype="<f8", count=nx * ny).reshape(ny, nx)
    return np.linspace(x0, x1, nx), np.linspace(y0, y1, ny), values


def field_frame(field: DensityField2D) -> pd.DataFrame:
    """Поле в длинном формате: x, y, density (+ x_hat, y_hat)"""
    xx, yy = np.meshgrid(field.x, field.y)
    frame = pd.DataFrame({"x": xx.ravel(), "y": yy.ravel(), "density": field.values.ravel()})
    if field.x_hat is not None and field.y_hat is not None:
        xh, yh = np.meshgrid(field.x_hat, field.y_hat)
        frame["x_hat"] = xh.ravel()
        frame["y_hat"] = yh.ravel()
    return frame


def write_json(payload: dict[str, Any], path: Path) -> Path:
    """JSON с сортировкой ключей"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False), encoding="utf-8")
    logger.info(f"Записан файл {path}")
    return path
