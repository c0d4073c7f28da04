import logging
from logging.handlers import RotatingFileHandler

from app.core.config import Settings

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(cfg: Settings) -> None:
    # Основной логгер
    logging.basicConfig(level=cfg.log_level, format=LOG_FORMAT)

    # Логгер вызовов решателей пишет в отдельный файл
    # maxBytes=5MB, 3 бэкап-файла
    solver_logger = logging.getLogger("solver_usage")
    solver_logger.setLevel(logging.INFO)
    if cfg.solver_log_file and not any(isinstance(h, RotatingFileHandler) for h in solver_logger.handlers):
        handler = RotatingFileHandler(cfg.solver_log_file, maxBytes=5 * 1024 * 1024, backupCount=3)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        solver_logger.addHandler(handler)
    solver_logger.propagate = False  # Не передавать сообщения в основной логгер
