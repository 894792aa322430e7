"""
Тесты настройки логирования
"""
import logging

from utils.logger import setup_logger


def test_repeated_setup_returns_same_logger():
    assert setup_logger() is setup_logger()


def test_file_log_carries_experiment_label(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    logger = setup_logger("DEBUG", str(log_file), force=True, experiment="lattice")
    try:
        logger.info("проверка метки")
        logging.getLogger("scipy").warning("сообщение библиотеки")
        text = log_file.read_text(encoding="utf-8")
        assert "lattice" in text
        assert "проверка метки" in text
        assert "сообщение библиотеки" in text
    finally:
        setup_logger("INFO", force=True)
