import functools
import inspect
import logging
import time
from typing import Any, Callable

from .logging_config import bench_logger

_TRACKED_FIELDS = ("scenario_path", "seed", "snr_db", "threads")


def _describe_call(signature: inspect.Signature, args: tuple, kwargs: dict) -> str:
    try:
        bound = signature.bind_partial(*args, **kwargs)
    except TypeError:
        return ""
    parts = []
    scenario = bound.arguments.get("scenario")
    if scenario is not None and hasattr(scenario, "estimator"):
        parts.append(f"scenario={scenario.name}")
        parts.append(f"estimator={scenario.estimator}")
        parts.append(f"preprocessing={scenario.preprocessing.enabled}")
    for name in _TRACKED_FIELDS:
        if name in bound.arguments and bound.arguments[name] is not None:
            parts.append(f"{name}={bound.arguments[name]}")
    return " ".join(parts)


def _extra(action_name: str, phase: str, **fields: Any) -> dict[str, Any]:
    return {"action": action_name, "phase": phase, **fields}


def log_action(action_name: str, level: int = logging.INFO) -> Callable:
    def decorator(func: Callable) -> Callable:
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            details = _describe_call(signature, args, kwargs)
            started = time.perf_counter()
            bench_logger.log(
                level, f"{action_name} START {details}", extra=_extra(action_name, "START")
            )
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                bench_logger.error(
                    f"{action_name} ERROR {details} "
                    f"error_type={type(e).__name__} error_message='{str(e)}'",
                    extra=_extra(action_name, "ERROR", error_type=type(e).__name__),
                )
                raise
            elapsed = time.perf_counter() - started
            bench_logger.log(
                level,
                f"{action_name} OK {details} elapsed={elapsed:.3f}s",
                extra=_extra(action_name, "OK", elapsed_s=round(elapsed, 6)),
            )
            return result

        return wrapper

    return decorator
