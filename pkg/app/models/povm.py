from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from app.core.errors import DimMismatch, MatrixNotPsd, NonFiniteEntries, NotSelfAdjoint
from app.models.measure import FiniteMeasureSpace
from app.models.operators import State
from app.utils import linalg

# Эффект считается нулевым, если его норма не больше NULL_EFFECT_RTOL·‖ν(X)‖
NULL_EFFECT_RTOL = 4 * np.finfo(float).eps


def _stack(values: ArrayLike, size: int) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.ndim != 3 or arr.shape[0] != size or arr.shape[1] != arr.shape[2]:
        raise DimMismatch(f"Ожидается массив {size}×d×d, получено {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntries("Значения содержат NaN или Inf")
    return arr


@dataclass(frozen=True, eq=False)
class Povm:
    """ν(E) = Σ_{x∈E} effects[x]; пространство несет опорную меру μ для ν = μI."""

    space: FiniteMeasureSpace
    effects: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = _stack(self.effects, self.space.size)
        for i, label in enumerate(self.space.atoms):
            arr[i] = linalg.as_hermitian(arr[i])
            if not linalg.is_psd(arr[i]):
                raise MatrixNotPsd(f"Эффект атома {label!r} не является положительным")
        arr.setflags(write=False)
        object.__setattr__(self, "effects", arr)

    @classmethod
    def scalar(cls, space: FiniteMeasureSpace, dim: int) -> Povm:
        """ν = μI."""
        eye = np.eye(dim, dtype=np.complex128)
        return cls(space, space.masses[:, None, None] * eye)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def null_atoms(self) -> np.ndarray:
        """Атомы с нулевым эффектом: не несут меры и исключаются из интегрирования."""
        norms = np.array([linalg.operator_norm(e) for e in self.effects])
        return norms <= NULL_EFFECT_RTOL * linalg.operator_norm(self.total())

    def measure(self, labels: Sequence[str]) -> np.ndarray:
        idx = [self.space.index(label) for label in labels]
        return self.effects[idx].sum(axis=0) if idx else np.zeros((self.dim, self.dim), np.complex128)

    def total(self) -> np.ndarray:
        return self.effects.sum(axis=0)

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.total(), np.eye(self.dim), atol=tol, rtol=0))

    def is_scalar(self, tol: float = 1e-12) -> bool:
        expected = self.space.masses[:, None, None] * np.eye(self.dim)
        return bool(np.allclose(self.effects, expected, atol=tol, rtol=0))


@dataclass(frozen=True, eq=False)
class QuantumRandomVariable:
    """Операторнозначная функция на атомах; values[x] есть матрица d×d."""

    space: FiniteMeasureSpace
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = _stack(self.values, self.space.size)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def constant(cls, space: FiniteMeasureSpace, operator: ArrayLike) -> QuantumRandomVariable:
        a = linalg.as_matrix(operator)
        return cls(space, np.broadcast_to(a, (space.size, *a.shape)))

    @classmethod
    def identity(cls, space: FiniteMeasureSpace, dim: int) -> QuantumRandomVariable:
        return cls.constant(space, np.eye(dim))

    @classmethod
    def from_scalar(cls, values: ArrayLike, space: FiniteMeasureSpace, dim: int) -> QuantumRandomVariable:
        """g·I для скалярной функции g."""
        g = np.asarray(values, dtype=np.complex128).reshape(-1)
        return cls(space, g[:, None, None] * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def _like(self, values: np.ndarray) -> QuantumRandomVariable:
        return QuantumRandomVariable(self.space, values)

    def _check(self, other: QuantumRandomVariable) -> None:
        self.space.require_same(other.space)
        if other.dim != self.dim:
            raise DimMismatch(f"Размерности не совпадают: {self.dim} и {other.dim}")

    def __add__(self, other: QuantumRandomVariable) -> QuantumRandomVariable:
        self._check(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: QuantumRandomVariable) -> QuantumRandomVariable:
        self._check(other)
        return self._like(self.values - other.values)

    def __neg__(self) -> QuantumRandomVariable:
        return self._like(-self.values)

    def __rmul__(self, scalar: Number) -> QuantumRandomVariable:
        return self._like(complex(scalar) * self.values)

    def adjoint(self) -> QuantumRandomVariable:
        return self._like(np.conj(np.swapaxes(self.values, 1, 2)))

    def real_part(self) -> QuantumRandomVariable:
        return self._like(np.stack([linalg.real_part(v) for v in self.values]))

    def imag_part(self) -> QuantumRandomVariable:
        return self._like(np.stack([linalg.imag_part(v) for v in self.values]))

    def is_self_adjoint(self, tol: float = linalg.HERMITIAN_TOL) -> bool:
        return all(linalg.is_hermitian(v, tol) for v in self.values)

    def require_self_adjoint(self) -> QuantumRandomVariable:
        if not self.is_self_adjoint():
            raise NotSelfAdjoint("Ожидается самосопряженная квантовая случайная величина")
        return self._like(np.stack([linalg.hermitize(v) for v in self.values]))

    def is_positive(self, tol: float | None = None) -> bool:
        return self.is_self_adjoint() and all(linalg.is_psd(v, tol) for v in self.values)

    def abs(self) -> QuantumRandomVariable:
        """|f| поточечно для самосопряженной f."""
        f = self.require_self_adjoint()
        return self._like(np.stack([linalg.positive_parts(v)[2] for v in f.values]))

    def pointwise_norms(self) -> np.ndarray:
        return np.array([linalg.operator_norm(v) for v in self.values])

    def restrict(self, mask: ArrayLike) -> QuantumRandomVariable:
        """χ_E·f для маски атомов E."""
        keep = np.asarray(mask, dtype=bool)
        return self._like(np.where(keep[:, None, None], self.values, 0.0))

    def allclose(self, other: QuantumRandomVariable, atol: float = 1e-9) -> bool:
        return self.values.shape == other.values.shape and bool(
            np.allclose(self.values, other.values, atol=atol, rtol=0)
        )


@dataclass(frozen=True, eq=False)
class InducedMeasure:
    """ν_ρ(x) = tr(ρ·effects[x]); атомы с нулевой массой вне носителя."""

    space: FiniteMeasureSpace
    masses: np.ndarray = field(repr=False)

    @property
    def support(self) -> np.ndarray:
        return self.masses > 0

    def as_space(self) -> FiniteMeasureSpace:
        keep = self.support
        atoms = tuple(a for a, k in zip(self.space.atoms, keep) if k)
        return FiniteMeasureSpace(atoms, self.masses[keep])

    def total(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class RnDerivative:
    """D(x) = dν/dν_ρ(x) и D(x)^{1/2}; вне носителя ν_ρ обе равны нулю."""

    rho: State
    induced: InducedMeasure
    density: np.ndarray = field(repr=False)
    sqrt_density: np.ndarray = field(repr=False)

    @property
    def masses(self) -> np.ndarray:
        return self.induced.masses

    @property
    def support(self) -> np.ndarray:
        return self.induced.support

    def sup_norm(self) -> float:
        """‖D‖_∞ по атомам положительной массы."""
        norms = [linalg.operator_norm(d) for d, s in zip(self.density, self.support) if s]
        return max(norms, default=0.0)

    def inverse_sup_norm(self) -> float | None:
        """‖D⁻¹‖_∞; None, если какая-то D(x) необратима."""
        worst = 0.0
        for d, s in zip(self.density, self.support):
            if not s:
                continue
            w = np.linalg.eigvalsh(d)
            if w[0] <= 1e-12 * max(1.0, w[-1]):
                return None
            worst = max(worst, 1.0 / w[0])
        return worst

    def conjugate(self, values: np.ndarray) -> np.ndarray:
        """D^{1/2} f(x) D^{1/2} поточечно."""
        return np.einsum("xij,xjk,xkl->xil", self.sqrt_density, values, self.sqrt_density)
