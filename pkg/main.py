"""
Главный файл запуска: эксперименты с облаком сорбирующегося вещества
"""
import argparse
import sys
from dataclasses import replace

from core.exceptions import ConfigError, SorptionPlumeError, ValidationFailure
from services.experiments import ExperimentRunner, apply_overrides
from services.validation import ValidationMatrix
from utils.config import EXPERIMENTS, load_config
from utils.logger import setup_logger


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    """Парсер аргументов командной строки"""
    parser = argparse.ArgumentParser(
        prog="sorption-plume",
        description="Перенос сорбирующегося вещества: частицы, решётка, аналитика, проверка маршрутов",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=".env", help="Файл конфигурации (.env)")
        p.add_argument("--out", default=None, help="Каталог результатов")
        p.add_argument("--seed", type=int, default=None, help="Главное зерно")
        p.add_argument("--threads", type=int, default=None, help="Число потоков")
        p.add_argument("--no-timestamp", action="store_true", help="Без строки времени в заголовках CSV")
    return parser


def run(args: argparse.Namespace) -> int:
    """
    Выполнить команду

    Args:
        args: Разобранные аргументы

    Returns:
        int: Код выхода (0 - успех, 1 - ошибка или непройденная проверка, 2 - ошибка конфигурации)
    """
    config = load_config(args.config)
    config = replace(apply_overrides(config, args.seed, args.out, args.threads, args.no_timestamp),
                     experiment=args.command)
    logger = setup_logger(config.app.log_level, config.app.log_file, force=True, experiment=args.command)
    logger.info(f"Запуск {args.command}: конфигурация {args.config}")

    if args.command == "validate":
        matrix = ValidationMatrix(config)
        matrix.run()
        report, _ = matrix.write_report(config.output.directory)
        if not matrix.passed:
            raise ValidationFailure(f"Есть непройденные проверки, см. {report}")
        return EXIT_OK

    ExperimentRunner(config).run()
    return EXIT_OK


def main(argv=None) -> int:
    """Точка входа CLI"""
    logger = setup_logger()
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации ({e.key}): {e}")
        return EXIT_CONFIG
    except ValidationFailure as e:
        logger.error(str(e))
        return EXIT_FAILURE
    except SorptionPlumeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        setup_logger().info("Остановлено пользователем")
        sys.exit(EXIT_FAILURE)
