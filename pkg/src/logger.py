import logging
import os
from pathlib import Path

import colorlog

from src.settings import SETTINGS

SUPPRESSED_LOGGERS = ("asyncio", "matplotlib", "numexpr", "fsspec", "torch")

PLAIN_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
RUN_LOG_NAME = "run.log"

# Names of every logger created through CustomLogger
_STAGE_LOGGERS: set[str] = set()


def _get_log_level() -> int:
    return getattr(logging, str(SETTINGS.LOG_LEVEL).upper(), logging.INFO)


class CustomLogger:
    """
    One logger per pipeline stage (ingest, features, model, training, ...).

    Each stage writes to LOG_PATH/<stage>.log and to the console (stderr, colored).
    A run additionally mirrors every stage into its run directory, see attach_run_log.
    """

    def __init__(self, name: str):
        self.name = name
        self.log_file = os.path.join(SETTINGS.LOG_PATH, f"{name}.log")
        self.logger = logging.getLogger(name)
        _STAGE_LOGGERS.add(name)

        if self.logger.handlers:
            return

        os.makedirs(SETTINGS.LOG_PATH, exist_ok=True)
        level = _get_log_level()
        self.logger.setLevel(level)
        self.logger.propagate = False

        file_handler = logging.FileHandler(self.log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(PLAIN_FORMAT))
        self.logger.addHandler(file_handler)

        # stdout stays free for result tables
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(
            colorlog.ColoredFormatter(
                "%(log_color)s" + PLAIN_FORMAT,
                log_colors={
                    "DEBUG": "cyan",
                    "INFO": "green",
                    "WARNING": "yellow",
                    "ERROR": "red",
                    "CRITICAL": "red,bg_white",
                },
            )
        )
        self.logger.addHandler(console_handler)

    def get_logger(self) -> logging.Logger:
        return self.logger


def stage_loggers() -> list[logging.Logger]:
    return [logging.getLogger(name) for name in sorted(_STAGE_LOGGERS)]


def update_global_log_level() -> None:
    """Apply SETTINGS.LOG_LEVEL to the root logger and every stage logger and handler."""
    level = _get_log_level()
    logging.root.setLevel(level)
    for handler in logging.root.handlers:
        handler.setLevel(level)
    for logger in stage_loggers():
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setLevel(level)


def attach_run_log(run_dir: Path) -> logging.Handler:
    """Mirror every stage logger into <run_dir>/run.log until detach_run_log."""
    handler = logging.FileHandler(Path(run_dir) / RUN_LOG_NAME, encoding="utf-8")
    handler.setLevel(_get_log_level())
    handler.setFormatter(logging.Formatter(PLAIN_FORMAT))
    for logger in stage_loggers():
        logger.addHandler(handler)
    return handler


def detach_run_log(handler: logging.Handler) -> None:
    for logger in stage_loggers():
        logger.removeHandler(handler)
    handler.close()


for _name in SUPPRESSED_LOGGERS:
    logging.getLogger(_name).setLevel(logging.CRITICAL)
