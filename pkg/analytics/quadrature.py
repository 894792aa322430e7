"""
Составная квадратура Гаусса-Лежандра с удвоением панелей

Подынтегральная функция векторизована: получает одномерный массив узлов
длины m и возвращает массив формы (..., m), по одному интегралу на каждый
набор ведущих индексов (например, узлы пространственной сетки).
"""
import math

import numpy as np

from core.exceptions import QuadratureError
from utils.logger import setup_logger

logger = setup_logger()


GL_ORDER = 8
START_PANELS = 4


def gauss_legendre_panels(a: float, b: float, panels: int, order: int = GL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """
    Узлы и веса составного правила на [a, b]

    Args:
        a: Левая граница
        b: Правая граница
        panels: Число равных панелей
        order: Число узлов Гаусса на панели

    Returns:
        tuple: (узлы, веса), длина panels*order
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_panels(func, a: float, b: float, panels: int, order: int = GL_ORDER):
    """Интеграл на фиксированном числе панелей"""
    nodes, weights = gauss_legendre_panels(a, b, panels, order)
    return np.asarray(func(nodes)) @ weights


def adaptive_integrate(
    func,
    a: float,
    b: float,
    tol: float = 1e-8,
    max_panels: int = 4096,
    rtol: float = 0.0,
    order: int = GL_ORDER
):
    """
    Интеграл с удвоением числа панелей до сходимости

    Проход принимается, когда для каждого интеграла изменение между
    соседними проходами не превышает tol + rtol*|значение|.

    Args:
        func: Векторизованная подынтегральная функция
        a: Левая граница
        b: Правая граница
        tol: Абсолютная точность
        max_panels: Предел числа панелей
        rtol: Относительная точность
        order: Число узлов на панели

    Returns:
        float или np.ndarray: Интегралы

    Raises:
        QuadratureError: Точность не достигнута за max_panels панелей
    """
    panels = START_PANELS
    previous = integrate_panels(func, a, b, panels, order)
    change = math.inf

    while panels < max_panels:
        panels *= 2
        current = integrate_panels(func, a, b, panels, order)
        diff = np.abs(current - previous)
        change = float(np.max(diff)) if np.size(diff) else 0.0
        if np.all(diff <= tol + rtol * np.abs(current)):
            logger.debug(f"Квадратура сошлась: панелей={panels}, изменение={change:.3g}")
            return float(current) if np.ndim(current) == 0 else current
        previous = current

    raise QuadratureError(
        f"Квадратура не сошлась за {max_panels} панелей: изменение {change:.3g} > {tol:.3g}"
    )


def integrate_residence(
    func,
    t: float,
    tol: float = 1e-8,
    max_panels: int = 4096,
    rtol: float = 0.0
):
    """
    Интеграл по tau на [0, t] с заменой tau = t sin^2(phi)

    Замена делает ограниченными интегрируемые особенности вида
    1/sqrt(tau) и 1/sqrt(t - tau) на концах.

    Args:
        func: Векторизованная функция от tau
        t: Верхний предел
        tol: Абсолютная точность
        max_panels: Предел числа панелей
        rtol: Относительная точность

    Returns:
        float или np.ndarray: Интегралы
    """
    if t <= 0:
        return 0.0

    def transformed(phi):
        tau = t * np.sin(phi) ** 2
        return np.asarray(func(tau)) * (t * np.sin(2.0 * phi))

    return adaptive_integrate(transformed, 0.0, 0.5 * math.pi, tol=tol, max_panels=max_panels, rtol=rtol)
