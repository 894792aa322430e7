"""
Исключения предметной области
"""


class SorptionPlumeError(Exception):
    """Базовое исключение пакета"""


class ParameterError(SorptionPlumeError, ValueError):
    """Нарушены ограничения на параметры модели"""


class DegenerateKineticsError(ParameterError):
    """Кинетика вырождена (mu = 0) для запрошенной величины"""


class ScalingError(ParameterError):
    """Масштабированные координаты не определены (t = 0 или нулевые коэффициенты)"""


class DomainTooSmallError(ParameterError):
    """Решётка слишком мала: масса достигла границы"""


class QuadratureError(SorptionPlumeError, RuntimeError):
    """Адаптивная квадратура не достигла заданной точности"""


class LaplaceInversionError(SorptionPlumeError, RuntimeError):
    """Изображение по Лапласу вернуло нечисловое значение"""


class ConfigError(SorptionPlumeError, ValueError):
    """Ошибка разбора или проверки конфигурации"""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class ValidationFailure(SorptionPlumeError, RuntimeError):
    """Перекрёстная проверка маршрутов не пройдена"""


class BesselOverflowError(SorptionPlumeError, OverflowError):
    """Немасштабированная функция Бесселя переполняется (z > 700)"""
