from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from app.models.measure import BistochasticMatrix, FiniteMeasureSpace
from app.models.povm import QuantumRandomVariable


class Verdict(str, enum.Enum):
    holds = "holds"
    fails = "fails"
    undecided_sampled = "undecided-sampled"


class Order(str, enum.Enum):
    B = "b"
    T = "t"
    S = "s"


@dataclass(frozen=True, eq=False)
class FarkasCertificate:
    """y с Aᵀy ≤ 0 и bᵀy > 0: система Ax = b, x ≥ 0 несовместна."""

    y: np.ndarray = field(repr=False)
    pairing: float
    max_violation: float

    def verify(self, a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(np.max(a.T @ self.y, initial=-np.inf) <= tol and float(b @ self.y) > tol)


@dataclass(frozen=True, eq=False)
class L1Certificate:
    """Разложение f = f₁ − f₂ + i(f₃ − f₄) с f_k ⪰ 0, значение и двойственная оценка."""

    value: float
    decomposition: tuple[
        QuantumRandomVariable, QuantumRandomVariable, QuantumRandomVariable, QuantumRandomVariable
    ]
    dual_state: np.ndarray = field(repr=False)
    dual_lower_bound: float
    method: str = "sdp"

    @property
    def gap(self) -> float:
        return self.value - self.dual_lower_bound

    @property
    def reported_value(self) -> float:
        """Значение ≤ допуска считается нулем (f в ядре полунормы)."""
        return 0.0 if self.value <= 1e-9 else self.value


@dataclass(frozen=True, eq=False)
class SeparatingFunctional:
    """φ(h) = Σ_x μ(x)·tr(W(x) h(x)) с эрмитовыми W(x)."""

    space: FiniteMeasureSpace
    weights: np.ndarray = field(repr=False)

    def evaluate(self, values: np.ndarray) -> complex:
        return complex(np.einsum("x,xij,xji->", self.space.masses, self.weights, values))

    def evaluate_many(self, values: np.ndarray) -> np.ndarray:
        """φ(e_y ⊗ h(x)) для всех пар: матрица C[x, y] = μ(x)·tr(W(x) h(y))."""
        return np.einsum("x,xij,yji->xy", self.space.masses, self.weights, values)


@dataclass(frozen=True, eq=False)
class PositivityWitness:
    """Атом x₀ и вектор v: ⟨v, ⟨f, χ_{x₀}I⟩ v⟩ отрицательно или не вещественно."""

    atom: str
    vector: np.ndarray = field(repr=False)
    value: complex


@dataclass(frozen=True, eq=False)
class ContainmentRecord:
    """F_S ∈ conv{G_T} (≺_T) или F_S ∈ conv{G_T} − PSD (≺_S) с весами λ_T."""

    k: int
    subset: tuple[int, ...]
    weights: dict[tuple[int, ...], float]
    residual: float


@dataclass(frozen=True, eq=False)
class SamplerSummary:
    seed: int
    samples: int
    refuted: bool
    worst_margin: float
    refuting: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class MajorizationCertificate:
    order: Order
    verdict: Verdict
    witness: BistochasticMatrix | None = None
    refuting: np.ndarray | None = field(default=None, repr=False)
    refuting_margin: float | None = None
    containment: tuple[ContainmentRecord, ...] = ()
    farkas: FarkasCertificate | None = None
    separating: SeparatingFunctional | None = None
    separation_margin: float | None = None
    residual: float | None = None
    sampler: SamplerSummary | None = None
    notes: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.holds
