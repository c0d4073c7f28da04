from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.errors import DimMismatch, QrvValidationError
from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable
from app.utils import codec

# Матрица: строки из чисел или пар [re, im]
MatrixIn = list[list[Any]]


class SpaceIn(BaseModel):
    """Схема пространства с мерой: метки атомов и их массы."""
    atoms: list[str] = Field(min_length=1)
    masses: list[float]

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_lengths(self) -> SpaceIn:
        if len(self.atoms) != len(self.masses):
            raise ValueError(f"число атомов ({len(self.atoms)}) не совпадает с числом масс ({len(self.masses)})")
        return self

    def to_domain(self) -> FiniteMeasureSpace:
        return FiniteMeasureSpace(tuple(self.atoms), np.array(self.masses, dtype=float))

    @classmethod
    def from_domain(cls, space: FiniteMeasureSpace) -> SpaceIn:
        return cls(atoms=list(space.atoms), masses=[float(m) for m in space.masses])


def resolve_space(embedded: SpaceIn | None, external: FiniteMeasureSpace | None) -> FiniteMeasureSpace:
    """Пространство из файла или из --space; если заданы оба, они должны совпадать."""
    if embedded is None and external is None:
        raise QrvValidationError("Пространство не задано: укажите --space или поле space во входном файле")
    if embedded is None:
        return external  # type: ignore[return-value]
    space = embedded.to_domain()
    if external is not None:
        external.require_same(space)
    return space


def atom_matrices_from_json(data: dict[str, MatrixIn], space: FiniteMeasureSpace, dim: int, what: str) -> np.ndarray:
    """Матрицы по меткам атомов; отсутствующий атом означает нулевую матрицу."""
    unknown = [label for label in data if label not in space.atoms]
    if unknown:
        raise DimMismatch(f"{what}: атомы {unknown} отсутствуют в пространстве")
    out = np.zeros((space.size, dim, dim), dtype=np.complex128)
    for label, rows in data.items():
        out[space.index(label)] = codec.matrix_from_json(rows, dim, f"{what}[{label!r}]")
    return out


def atom_matrices_to_json(space: FiniteMeasureSpace, values: np.ndarray) -> dict[str, MatrixIn]:
    return {label: codec.matrix_to_json(v) for label, v in zip(space.atoms, values)}


class FunctionIn(BaseModel):
    """Скалярная функция: значения по атомам в порядке пространства."""
    values: list[Any] = Field(min_length=1)
    space: SpaceIn | None = None

    def to_domain(self, space: FiniteMeasureSpace | None = None) -> ClassicalFunction:
        sp = resolve_space(self.space, space)
        vals = [codec.scalar_from_json(v, f"values[{i}]") for i, v in enumerate(self.values)]
        return ClassicalFunction(sp, np.array(vals))


class PovmIn(BaseModel):
    dim: int = Field(ge=1)
    effects: dict[str, MatrixIn]
    space: SpaceIn | None = None

    def to_domain(self, space: FiniteMeasureSpace | None = None) -> Povm:
        sp = resolve_space(self.space, space)
        return Povm(sp, atom_matrices_from_json(self.effects, sp, self.dim, "effects"))


class QrvIn(BaseModel):
    dim: int = Field(ge=1)
    values: dict[str, MatrixIn]
    space: SpaceIn | None = None

    def to_domain(self, space: FiniteMeasureSpace | None = None) -> QuantumRandomVariable:
        sp = resolve_space(self.space, space)
        return QuantumRandomVariable(sp, atom_matrices_from_json(self.values, sp, self.dim, "values"))


class StateIn(BaseModel):
    dim: int = Field(ge=1)
    matrix: MatrixIn

    def to_domain(self) -> State:
        return State(codec.matrix_from_json(self.matrix, self.dim, "matrix"))


class BistochasticIn(BaseModel):
    matrix: list[list[float]]
    space: SpaceIn | None = None

    @field_validator("matrix")
    @classmethod
    def validate_rows(_cls, v: list[list[float]]) -> list[list[float]]:
        if not v or any(len(row) != len(v) for row in v):
            raise ValueError("матрица должна быть квадратной и непустой")
        return v

    def to_domain(self, space: FiniteMeasureSpace | None = None) -> BistochasticMatrix:
        return BistochasticMatrix(resolve_space(self.space, space), np.array(self.matrix, dtype=float))


class FunctionalIn(BaseModel):
    """φ(h) = Σ μ(x)·tr(W(x)h(x)); W задается по атомам."""
    dim: int = Field(ge=1)
    weights: dict[str, MatrixIn]
    space: SpaceIn | None = None

    def to_arrays(self, space: FiniteMeasureSpace | None = None) -> tuple[FiniteMeasureSpace, np.ndarray]:
        sp = resolve_space(self.space, space)
        return sp, atom_matrices_from_json(self.weights, sp, self.dim, "weights")
