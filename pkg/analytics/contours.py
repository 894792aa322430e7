"""
Изолинии полей в масштабированных координатах и их сравнение
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd
import skimage.measure as skm
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from analytics.planar import DensityField2D
from core.exceptions import ParameterError, ScalingError
from utils.logger import setup_logger

logger = setup_logger()


@dataclass(frozen=True)
class ContourLine:
    """Полилиния изолинии: точки (x^, y^)"""
    level: float
    points: np.ndarray


def levels_from_fractions(field: DensityField2D, fractions) -> list[float]:
    """Уровни как доли максимума поля"""
    peak = float(np.max(field.values))
    return [peak * float(f) for f in fractions]


def contour_export(field: DensityField2D, levels, scaled: bool = True) -> list[ContourLine]:
    """
    Изолинии марширующими квадратами

    Args:
        field: Поле
        levels: Абсолютные уровни плотности
        scaled: Вернуть точки в (x^, y^) (иначе в физических координатах)

    Returns:
        list[ContourLine]: Полилинии по всем уровням
    """
    if not np.all(np.isfinite(field.values)):
        raise ParameterError("Поле содержит нечисловые значения")
    if scaled and (field.x_hat is None or field.y_hat is None):
        raise ScalingError("У поля нет масштабированных координат (D* = 0 или D_T = 0)")

    x_axis = field.x_hat if scaled else field.x
    y_axis = field.y_hat if scaled else field.y
    rows = np.arange(y_axis.size)
    cols = np.arange(x_axis.size)

    lines = []
    for level in levels:
        found = skm.find_contours(field.values, level)
        if not found:
            logger.warning(f"Уровень {level:.6g} не пересекает поле t={field.t}")
            continue
        for path in found:
            # find_contours возвращает дробные индексы (строка, столбец)
            y = np.interp(path[:, 0], rows, y_axis)
            x = np.interp(path[:, 1], cols, x_axis)
            lines.append(ContourLine(level=float(level), points=np.column_stack([x, y])))

    logger.debug(f"Изолиний: {len(lines)} для {len(levels)} уровней")
    return lines


def contours_frame(lines: list[ContourLine]) -> pd.DataFrame:
    """Таблица для CSV: level, line, x_hat, y_hat"""
    frames = [
        pd.DataFrame({"level": line.level, "line": i, "x_hat": line.points[:, 0], "y_hat": line.points[:, 1]})
        for i, line in enumerate(lines)
    ]
    if not frames:
        return pd.DataFrame(columns=["level", "line", "x_hat", "y_hat"])
    return pd.concat(frames, ignore_index=True)


def _stack(lines: list[ContourLine]) -> np.ndarray:
    if not lines:
        raise ParameterError("Пустой набор изолиний")
    return np.vstack([line.points for line in lines])


def contour_hausdorff(lines: list[ContourLine], reference: list[ContourLine], normalize: bool = True) -> float:
    """
    Симметричное расстояние Хаусдорфа между наборами полилиний

    Args:
        lines: Проверяемые изолинии
        reference: Опорные изолинии
        normalize: Делить на диаметр опорного набора

    Returns:
        float: Расстояние
    """
    a = _stack(lines)
    b = _stack(reference)
    distance = max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max())
    if not normalize:
        return float(distance)
    diameter = pdist(b).max() if len(b) > 1 else 0.0
    if diameter <= 0:
        raise ParameterError("Опорная изолиния вырождена в точку")
    return float(distance / diameter)
