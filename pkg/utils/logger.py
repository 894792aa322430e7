"""
Модуль настройки логирования (loguru)
"""
import inspect
import logging
import os
import sys
from pathlib import Path

from loguru import logger


NUMERIC_LIBRARIES = ("scipy", "joblib", "skimage")

LOG_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<magenta>{extra[experiment]}</magenta> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)

_configured = False


class InterceptHandler(logging.Handler):
    """
    Пересылка записей стандартного logging (scipy, joblib, scikit-image) в loguru
    """
    def emit(self, record: logging.LogRecord):
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Поднимаемся до кадра, который вызвал logging
        frame, depth = inspect.currentframe(), 0
        while frame and (depth == 0 or frame.f_code.co_filename == logging.__file__):
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def setup_logger(
    log_level: str = None,
    log_file: str = None,
    force: bool = False,
    experiment: str = None
) -> logger:
    """
    Настройка логирования

    Повторные вызовы возвращают уже настроенный логгер, пока не передан force=True.
    Вывод идёт в stderr: stdout остаётся свободным для отчётов CLI.

    Args:
        log_level: Уровень (DEBUG, INFO, WARNING, ERROR), по умолчанию LOG_LEVEL или INFO
        log_file: Файл логов, по умолчанию LOG_FILE; без него только консоль
        force: Перенастроить обработчики заново
        experiment: Метка эксперимента в каждой строке лога

    Returns:
        logger: Настроенный логгер
    """
    global _configured

    if _configured and not force:
        return logger

    level = (log_level or os.getenv("LOG_LEVEL") or "INFO").upper()
    target = log_file or os.getenv("LOG_FILE")

    logger.remove()
    logger.configure(extra={"experiment": experiment or "-"})
    logger.add(sys.stderr, format=LOG_FORMAT, level=level, colorize=True)

    if target:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            target,
            format=LOG_FORMAT,
            level=level,
            rotation="10 MB",
            retention="30 days",
            compression="zip",
            encoding="utf-8",
        )

    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    for name in NUMERIC_LIBRARIES:
        logging.getLogger(name).handlers = [InterceptHandler()]

    _configured = True
    logger.debug(f"Логирование: уровень {level}, файл {target or '-'}, эксперимент {experiment or '-'}")
    return logger
