"""Доменные исключения симулятора оценки направления прихода."""

from typing import Optional


class DoaBenchError(Exception):
    """Базовое исключение пакета."""


class ConfigurationError(DoaBenchError):
    """Некорректное значение параметра конфигурации."""

    def __init__(self, field: str, message: str):
        super().__init__(f"Ошибка конфигурации '{field}': {message}")
        self.field = field
        self.message = message


class ModelViolationError(DoaBenchError):
    """Нарушение предпосылок модели сигнала (например, n >= m)."""

    def __init__(self, reason: str):
        super().__init__(f"Нарушение модели сигнала: {reason}")
        self.reason = reason


class ContractError(DoaBenchError):
    """Нарушено предусловие вычислительной операции."""

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation
        self.message = message


class DegenerateInputError(DoaBenchError):
    """Входные данные вырождены, результат не определён."""

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: вырожденные данные: {message}")
        self.operation = operation
        self.message = message


class ScenarioParseError(DoaBenchError):
    """Ошибка чтения или разбора файла сценария."""

    def __init__(
        self,
        source: str,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        location = ""
        if line is not None:
            location = f" (строка {line}, столбец {column})"
        super().__init__(f"Ошибка разбора сценария '{source}'{location}: {message}")
        self.source = source
        self.message = message
        self.line = line
        self.column = column
