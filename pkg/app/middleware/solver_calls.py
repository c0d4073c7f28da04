import logging
import time
from contextlib import contextmanager
from typing import Iterator

# Специальный логгер, чтобы его вывод можно было направить в отдельный файл
logger = logging.getLogger("solver_usage")


class SolverCall:
    """Изменяемая запись о вызове; решатель проставляет итоговый статус."""

    def __init__(self, kind: str, size: int):
        self.kind = kind
        self.size = size
        self.status = "unknown"


@contextmanager
def log_solver_call(kind: str, size: int) -> Iterator[SolverCall]:
    call = SolverCall(kind, size)
    start_time = time.perf_counter()
    try:
        yield call
    except Exception:
        # статус, проставленный решателем до исключения (например, "stall"), сохраняется
        if call.status == "unknown":
            call.status = "error"
        raise
    finally:
        process_time = time.perf_counter() - start_time

        # Логируем в структурированном формате для легкого парсинга
        logger.info(
            "SOLVER_CALL kind=%s status=%s size=%d duration=%.4f",
            call.kind,
            call.status,
            call.size,
            process_time,
        )
