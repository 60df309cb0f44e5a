import logging
import os
from pathlib import Path
from typing import Any, Optional

_ENV_OVERRIDES = {
    "log_level": "DOA_BENCH_LOG_LEVEL",
    "log_file": "DOA_BENCH_LOG_FILE",
    "output_dir": "DOA_BENCH_OUTPUT_DIR",
    "log_json": "DOA_BENCH_LOG_JSON",
}


class SettingsLoader:
    _instance = None
    _config: dict[str, Any] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self._initialized = True
        self._load_defaults()

    def _load_defaults(self) -> None:
        self._config = {
            "output_dir": "results",
            "log_file": "logs/doa_bench.log",
            "log_level": "INFO",
            "log_json": False,
            "default_threads": 1,
        }
        for key, env_name in _ENV_OVERRIDES.items():
            value = os.getenv(env_name)
            if value is not None:
                self._config[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        return self._config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        self._config[key] = value

    def reload(self) -> None:
        self._load_defaults()

    @property
    def output_dir(self) -> Path:
        return Path(self.get("output_dir", "results"))

    @property
    def log_file(self) -> Optional[str]:
        # пустая строка в окружении отключает файловый лог
        value = self.get("log_file")
        return value or None

    @property
    def log_level(self) -> int:
        name = str(self.get("log_level", "INFO")).upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.INFO

    @property
    def log_json(self) -> bool:
        value = self.get("log_json", False)
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)

    @property
    def default_threads(self) -> int:
        return int(self.get("default_threads", 1))


settings = SettingsLoader()
