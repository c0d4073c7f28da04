from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from app.core.errors import (
    ComplexValued,
    DimMismatch,
    NonFiniteEntries,
    NotDoublyStochastic,
    QrvValidationError,
    SpaceMismatch,
)

# Допуски на инварианты бистохастической матрицы
BISTOCHASTIC_NEG_TOL = 1e-12
BISTOCHASTIC_SUM_TOL = 1e-9
IMAG_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """Конечное атомарное пространство с мерой; σ-алгебра: все подмножества атомов."""

    atoms: tuple[str, ...]
    masses: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        atoms = tuple(str(a) for a in self.atoms)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if len(atoms) != masses.shape[0]:
            raise DimMismatch(f"Число атомов ({len(atoms)}) не совпадает с числом масс ({masses.shape[0]})")
        if len(set(atoms)) != len(atoms):
            raise QrvValidationError("Метки атомов должны быть уникальными")
        if not np.all(np.isfinite(masses)):
            raise NonFiniteEntries("Массы атомов должны быть конечными")
        if np.any(masses <= 0):
            raise QrvValidationError("Массы атомов должны быть строго положительными")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", _readonly(masses))

    @classmethod
    def uniform(cls, size: int, mass: float = 1.0) -> FiniteMeasureSpace:
        return cls(tuple(str(i) for i in range(size)), np.full(size, float(mass)))

    @classmethod
    def from_masses(cls, masses: ArrayLike) -> FiniteMeasureSpace:
        m = np.asarray(masses, dtype=float).reshape(-1)
        return cls(tuple(str(i) for i in range(m.shape[0])), m)

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def index(self, label: str) -> int:
        try:
            return self.atoms.index(str(label))
        except ValueError:
            raise QrvValidationError(f"Неизвестный атом: {label!r}") from None

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.ptp(self.masses) <= tol * max(1.0, float(self.masses.max())))

    def same_as(self, other: FiniteMeasureSpace, tol: float = 1e-12) -> bool:
        return self.atoms == other.atoms and bool(np.allclose(self.masses, other.masses, atol=tol, rtol=0))

    def require_same(self, other: FiniteMeasureSpace) -> None:
        if not self.same_as(other):
            raise SpaceMismatch("Функции заданы на разных пространствах")


@dataclass(frozen=True, eq=False)
class ClassicalFunction:
    """Скалярная функция на атомах (по значению на атом)."""

    space: FiniteMeasureSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if vals.shape[0] != self.space.size:
            raise DimMismatch(f"Ожидается {self.space.size} значений, получено {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteEntries("Значения функции должны быть конечными")
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def real(cls, space: FiniteMeasureSpace, values: Sequence[float] | np.ndarray) -> ClassicalFunction:
        return cls(space, np.asarray(values, dtype=float))

    @classmethod
    def indicator(cls, space: FiniteMeasureSpace, labels: Sequence[str]) -> ClassicalFunction:
        vals = np.zeros(space.size)
        for label in labels:
            vals[space.index(label)] = 1.0
        return cls(space, vals)

    def is_real(self, tol: float = IMAG_TOL) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def real_values(self) -> np.ndarray:
        if not self.is_real():
            raise ComplexValued("Функция принимает комплексные значения")
        return self.values.real.copy()

    def integral(self) -> complex:
        return complex(np.dot(self.space.masses, self.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Ступенчатая функция на [0, a]: пары (ширина, значение), значения не возрастают."""

    widths: np.ndarray
    values: np.ndarray

    @property
    def total_width(self) -> float:
        return float(self.widths.sum())

    @property
    def steps(self) -> list[tuple[float, float]]:
        return [(float(w), float(v)) for w, v in zip(self.widths, self.values)]

    def breakpoints(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.widths)])

    def cumulative(self, t: ArrayLike) -> np.ndarray:
        """∫₀ᵗ f↓: кусочно-линейная функция, вычисляемая интерполяцией по точкам излома."""
        knots = self.breakpoints()
        integrals = np.concatenate([[0.0], np.cumsum(self.widths * self.values)])
        return np.interp(np.asarray(t, dtype=float), knots, integrals)

    def evaluate(self, t: float) -> float:
        """f↓(t) для 0 ≤ t < a (правая непрерывность)."""
        knots = np.cumsum(self.widths)
        idx = int(np.searchsorted(knots, t, side="right"))
        return float(self.values[min(idx, len(self.values) - 1)])


@dataclass(frozen=True, eq=False)
class BistochasticMatrix:
    """B ≥ 0, B·1 = 1, μᵀB = μᵀ на заданном пространстве."""

    space: FiniteMeasureSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        b = np.asarray(self.matrix, dtype=float)
        m = self.space.size
        if b.shape != (m, m):
            raise DimMismatch(f"Ожидается матрица {m}×{m}, получено {b.shape}")
        if not np.all(np.isfinite(b)):
            raise NonFiniteEntries("Бистохастическая матрица содержит NaN или Inf")
        if np.any(b < -BISTOCHASTIC_NEG_TOL):
            raise NotDoublyStochastic("Бистохастическая матрица имеет отрицательные элементы")
        if np.max(np.abs(b.sum(axis=1) - 1.0), initial=0.0) > BISTOCHASTIC_SUM_TOL:
            raise NotDoublyStochastic("Суммы строк бистохастической матрицы отличны от 1")
        mu = self.space.masses
        if np.max(np.abs(mu @ b - mu), initial=0.0) > BISTOCHASTIC_SUM_TOL * max(1.0, float(mu.max())):
            raise NotDoublyStochastic("Матрица не сохраняет интеграл: μᵀB ≠ μᵀ")
        object.__setattr__(self, "matrix", _readonly(np.clip(b, 0.0, None)))

    @classmethod
    def identity(cls, space: FiniteMeasureSpace) -> BistochasticMatrix:
        return cls(space, np.eye(space.size))

    @classmethod
    def averaging(cls, space: FiniteMeasureSpace) -> BistochasticMatrix:
        """Все строки равны μ/μ(X): функция переходит в константу, равную ее среднему."""
        mu = space.masses
        return cls(space, np.tile(mu / mu.sum(), (space.size, 1)))

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Действие на значения по атомам (первая ось); лишние оси обрабатываются поэлементно."""
        return np.tensordot(self.matrix, values, axes=(1, 0))
