from __future__ import annotations

from typing import Any


class QrvError(Exception):
    """Базовая ошибка библиотеки. exit_code используется командной строкой."""

    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class QrvValidationError(QrvError, ValueError):
    exit_code = 2


class DimMismatch(QrvValidationError):
    pass


class NotHermitian(QrvValidationError):
    pass


class MatrixNotPsd(QrvValidationError):
    pass


class NonFiniteEntries(QrvValidationError):
    pass


class ComplexValued(QrvValidationError):
    pass


class MassMismatch(QrvValidationError):
    pass


class NotUniform(QrvValidationError):
    pass


class NotDoublyStochastic(QrvValidationError):
    pass


class SpaceMismatch(QrvValidationError):
    pass


class NotSelfAdjoint(QrvValidationError):
    pass


class InconsistentNullSet(QrvValidationError):
    pass


class FullRankRequired(QrvValidationError):
    pass


class DivisionByZeroMass(QrvValidationError):
    pass


class InputFormatError(QrvValidationError):
    """Ошибка разбора входного файла; сообщение содержит строку и столбец."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None,
                 column: int | None = None):
        where = ""
        if path:
            where = f"{path}"
        if line is not None:
            where += f":{line}" + (f":{column}" if column is not None else "")
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line
        self.column = column


class SolverError(QrvError):
    exit_code = 3


class SolverStall(SolverError):
    """Решатель не достиг требуемого зазора; лучший найденный сертификат прикладывается."""

    def __init__(self, message: str, *, gap: float, best: Any = None):
        super().__init__(message)
        self.gap = gap
        self.best = best


class CycleLimit(SolverError):
    pass


class ExampleMismatch(QrvError):
    exit_code = 4
