from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from app.core.errors import MatrixNotPsd, QrvValidationError
from app.utils import linalg

# Допуск на след состояния
STATE_TRACE_TOL = 1e-12


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128, copy=True)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Плотная комплексная матрица d×d без NaN/Inf."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen(linalg.as_matrix(self.matrix)))

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> ComplexOperator:
        return ComplexOperator(self.matrix.conj().T)

    def norm(self) -> float:
        return linalg.operator_norm(self.matrix)

    def is_hermitian(self, tol: float = linalg.HERMITIAN_TOL) -> bool:
        return linalg.is_hermitian(self.matrix, tol)

    def allclose(self, other: ArrayLike, atol: float = 1e-9) -> bool:
        return bool(np.allclose(self.matrix, np.asarray(other), atol=atol, rtol=0.0))


@dataclass(frozen=True, eq=False)
class HermitianOperator(ComplexOperator):
    """Эрмитова матрица; симметрия точная (верхний треугольник зеркалится)."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen(linalg.as_hermitian(self.matrix)))

    def is_psd(self, tol: float | None = None) -> bool:
        return linalg.is_psd(self.matrix, tol)

    def sqrt(self) -> HermitianOperator:
        return HermitianOperator(linalg.psd_sqrt(self.matrix))

    def parts(self) -> tuple[HermitianOperator, HermitianOperator, HermitianOperator]:
        return tuple(HermitianOperator(p) for p in linalg.positive_parts(self.matrix))  # type: ignore[return-value]

    def pair(self, other: ArrayLike) -> complex:
        return linalg.trace_pairing(self.matrix, other)


@dataclass(frozen=True, eq=False)
class State(HermitianOperator):
    """Матрица плотности: σ ⪰ 0, tr σ = 1."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not linalg.is_psd(self.matrix):
            raise MatrixNotPsd("Состояние должно быть положительным")
        tr = float(np.trace(self.matrix).real)
        if abs(tr - 1.0) > STATE_TRACE_TOL:
            raise QrvValidationError(f"След состояния равен {tr!r}, ожидается 1")

    @classmethod
    def maximally_mixed(cls, dim: int) -> State:
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def pure(cls, vector: ArrayLike) -> State:
        v = np.asarray(vector, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def normalized(cls, matrix: ArrayLike) -> State:
        """Состояние из положительной матрицы делением на след."""
        m = linalg.as_hermitian(matrix)
        return cls(m / np.trace(m).real)

    def is_full_rank(self, tol: float | None = None) -> bool:
        w = np.linalg.eigvalsh(self.matrix)
        tol = 1e-9 if tol is None else tol
        return bool(w[0] > tol)
