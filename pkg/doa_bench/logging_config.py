"""Логирование симулятора: stderr и файл с ротацией, текстовый или JSON-формат."""

import json
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

DATE_FORMAT = "%Y-%m-%dT%H:%M:%S"
TEXT_FORMAT = "%(levelname)s %(asctime)s %(name)s %(message)s"
MAX_LOG_BYTES = 5 * 1024 * 1024
LOG_BACKUPS = 3

# поля, которые log_action передаёт через extra
ACTION_FIELDS = ("action", "phase", "elapsed_s", "error_type")

_OWNED_MARKER = "_doa_bench_handler"


class JsonFormatter(logging.Formatter):
    """Каждая запись пишется одной строкой JSON; кавычки и переводы строк в сообщении экранируются."""

    def __init__(self):
        super().__init__(datefmt=DATE_FORMAT)

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for name in ACTION_FIELDS:
            if hasattr(record, name):
                payload[name] = getattr(record, name)
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False, default=str)


def _attach(
    root: logging.Logger, handler: logging.Handler, level: int, formatter: logging.Formatter
) -> None:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    setattr(handler, _OWNED_MARKER, True)
    root.addHandler(handler)


def setup_logging(
    log_file: Optional[str] = "logs/doa_bench.log",
    level: int = logging.INFO,
    json_format: bool = False,
) -> None:
    """Повторный вызов заменяет только ранее установленные здесь обработчики."""
    root_logger = logging.getLogger()
    for handler in [h for h in root_logger.handlers if getattr(h, _OWNED_MARKER, False)]:
        root_logger.removeHandler(handler)
        handler.close()
    root_logger.setLevel(level)

    formatter = JsonFormatter() if json_format else logging.Formatter(TEXT_FORMAT, DATE_FORMAT)

    # stdout занят таблицами и эхом конфигурации
    _attach(root_logger, logging.StreamHandler(sys.stderr), level, formatter)
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file, maxBytes=MAX_LOG_BYTES, backupCount=LOG_BACKUPS, encoding="utf-8"
        )
        _attach(root_logger, file_handler, level, formatter)

    # matplotlib слишком разговорчив на DEBUG
    logging.getLogger("matplotlib").setLevel(max(level, logging.WARNING))


bench_logger = logging.getLogger("doa_bench.actions")
