"""
JSON-кодек: комплексные числа как [re, im], матрицы построчно.

Вывод детерминирован: ключи сортируются, float округляются до 15 значащих цифр,
поэтому одинаковые входные данные и seed дают побайтно одинаковые файлы.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, TypeVar

import numpy as np
import orjson
from numpy.typing import ArrayLike
from pydantic import BaseModel, ValidationError

from app.core.errors import DimMismatch, InputFormatError, NonFiniteEntries

SIGNIFICANT_DIGITS = 15
DUMP_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_APPEND_NEWLINE

ModelT = TypeVar("ModelT", bound=BaseModel)


def round_float(x: float) -> float | None:
    if not np.isfinite(x):
        return None
    value = float(f"{x:.{SIGNIFICANT_DIGITS}g}")
    return 0.0 if value == 0 else value


def normalize(obj: Any) -> Any:
    """Рекурсивно приводит numpy-типы к стандартным и округляет float."""
    if isinstance(obj, BaseModel):
        return normalize(obj.model_dump(mode="python"))
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_float(obj.real), round_float(obj.imag)]
    return obj


def dumps(obj: Any) -> bytes:
    return orjson.dumps(normalize(obj), option=DUMP_OPTIONS)


def write(path: str | Path, obj: Any) -> None:
    Path(path).write_bytes(dumps(obj))


def complex_to_json(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def matrix_to_json(m: ArrayLike) -> list[list[list[float]]]:
    arr = np.asarray(m, dtype=np.complex128)
    return [[complex_to_json(z) for z in row] for row in arr]


def scalar_from_json(value: Any, where: str = "") -> complex:
    """Число или пара [re, im]."""
    if isinstance(value, bool):
        raise InputFormatError(f"{where}: ожидается число или [re, im], получено {value!r}")
    if isinstance(value, (int, float)):
        z = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        z = complex(value[0], value[1])
    else:
        raise InputFormatError(f"{where}: ожидается число или [re, im], получено {value!r}")
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise NonFiniteEntries(f"{where}: недопустимое значение {value!r}")
    return z


def matrix_from_json(rows: Any, dim: int | None = None, where: str = "") -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InputFormatError(f"{where}: матрица должна быть списком строк")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise DimMismatch(f"{where}: матрица должна быть квадратной")
    if dim is not None and n != dim:
        raise DimMismatch(f"{where}: ожидается размерность {dim}, получено {n}")
    out = np.zeros((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            out[i, j] = scalar_from_json(value, f"{where}[{i}][{j}]")
    return out


def load(path: str | Path) -> Any:
    """Читает JSON; синтаксическая ошибка сообщается со строкой и столбцом."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise InputFormatError(f"не удалось прочитать файл: {exc.strerror}", path=str(p)) from None
    try:
        return orjson.loads(raw)
    except orjson.JSONDecodeError as exc:
        raise InputFormatError(exc.msg, path=str(p), line=exc.lineno, column=exc.colno) from None


def parse(model: type[ModelT], data: Any, path: str | Path | None = None) -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(part) for part in first["loc"]) or "<корень>"
        raise InputFormatError(
            f"{loc}: {first['msg']} (ошибок: {exc.error_count()})", path=str(path) if path else None
        ) from None


def load_model(model: type[ModelT], path: str | Path) -> ModelT:
    return parse(model, load(path), path)
