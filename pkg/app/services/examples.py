"""
Воспроизведение именованных примеров: эталонные значения и их проверка.

Каждый пример: метод, возвращающий ExampleReport со списком проверок.
Несовпадение хотя бы одной проверки при strict=True приводит к ExampleMismatch.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from app.core.config import Settings, settings
from app.core.errors import ExampleMismatch, QrvValidationError
from app.models.certificates import Verdict
from app.models.measure import FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable
from app.services.generators import dyadic_truncation, swap_truncation
from app.services.l1norm import L1NormService
from app.services.majorization import MajorizationService
from app.services.povm import PovmService
from app.utils import linalg

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-9
SDP_TOL = 1e-6
SWAP_DEPTH = 12
DYADIC_DEPTH = 10


@dataclass(frozen=True)
class ExampleCheck:
    """Одна проверка: relation ∈ {eq, ge, le}; строковые значения сравниваются на равенство."""

    name: str
    expected: float | str
    actual: float | str
    tol: float = 0.0
    relation: str = "eq"

    @property
    def passed(self) -> bool:
        if isinstance(self.expected, str) or isinstance(self.actual, str):
            return self.expected == self.actual
        if not np.isfinite(self.actual):
            return False
        if self.relation == "ge":
            return self.actual >= self.expected - self.tol
        if self.relation == "le":
            return self.actual <= self.expected + self.tol
        return abs(self.actual - self.expected) <= self.tol


@dataclass
class ExampleReport:
    example_id: str
    title: str
    checks: list[ExampleCheck] = field(default_factory=list)
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[ExampleCheck]:
        return [c for c in self.checks if not c.passed]


# --- экземпляры ---

def nine_example() -> tuple[QuantumRandomVariable, Povm]:
    """X = {0, 1}, ν(i) = I₂, f(0) = [[4, 4], [4, 4]], f(1) = diag(3, −3)."""
    space = FiniteMeasureSpace.uniform(2)
    values = np.array([[[4.0, 4.0], [4.0, 4.0]], [[3.0, 0.0], [0.0, -3.0]]])
    return QuantumRandomVariable(space, values), Povm.scalar(space, 2)


def nine_example_decomposition() -> tuple[np.ndarray, np.ndarray]:
    """Явное разложение f = f₁ − f₂ с ‖∫(f₁ + f₂) dν‖ = 9."""
    f1 = np.array([[[4.0, 4.0], [4.0, 4.0]], [[4.0, -2.0], [-2.0, 1.0]]])
    f2 = np.array([np.zeros((2, 2)), [[1.0, -2.0], [-2.0, 4.0]]])
    return f1, f2


def triangle_pair() -> tuple[QuantumRandomVariable, QuantumRandomVariable, Povm]:
    """A = e₁₁, B = e₁₂; f = (A, B), g = (B, A) на X = {0, 1} с ν(i) = I₂."""
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    b = np.array([[0.0, 1.0], [0.0, 0.0]])
    space = FiniteMeasureSpace.uniform(2)
    return (
        QuantumRandomVariable(space, np.stack([a, b])),
        QuantumRandomVariable(space, np.stack([b, a])),
        Povm.scalar(space, 2),
    )


def joe_verducci() -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    space = FiniteMeasureSpace(("[0,1/2]", "(1/2,1]"), np.array([0.5, 0.5]))
    f = QuantumRandomVariable(space, np.stack([np.diag([1.0, 4.0]), np.diag([3.0, 2.0])]))
    g = QuantumRandomVariable(space, np.stack([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])]))
    return f, g


def malamud() -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    space = FiniteMeasureSpace(("[0,1/4]", "(1/4,1/2]", "(1/2,3/4]", "(3/4,1]"), np.full(4, 0.25))
    f = QuantumRandomVariable(
        space, np.stack([np.diag([12.0, 12.0]), np.diag([12.0, 12.0]), np.diag([5.0, 3.0]), np.diag([3.0, 5.0])])
    )
    g = QuantumRandomVariable(
        space, np.stack([np.diag([8.0, 16.0]), np.diag([16.0, 8.0]), np.diag([0.0, 0.0]), np.diag([8.0, 8.0])])
    )
    return f, g


def komiya_scalar() -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    """f = (2, 0, 1), g = (1, 1, 1) на трех атомах равной массы, d = 1."""
    space = FiniteMeasureSpace.uniform(3, 1.0 / 3.0)
    return (
        QuantumRandomVariable.from_scalar([2.0, 0.0, 1.0], space, 1),
        QuantumRandomVariable.from_scalar([1.0, 1.0, 1.0], space, 1),
    )


class PaperExamplesService:
    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg
        self.povms = PovmService(cfg)
        self.norms = L1NormService(cfg)
        self.majorization = MajorizationService(cfg)
        self._registry: dict[str, tuple[str, Callable[[], list[ExampleCheck]]]] = {
            "nine-vs-eleven": ("Полунорма 9 против ‖∫|f| dν‖ = 11", self._nine_vs_eleven),
            "triangle": ("‖∫|f| dν‖ не удовлетворяет неравенству треугольника", self._triangle),
            "dyadic": ("Диадическое усечение: ∫f dν = I, ‖∫‖f‖I dν‖ = k", self._dyadic),
            "swap": ("Умножение на перестановку U неограничено", self._swap),
            "joe-verducci": ("f ≺_S g, но f ⊀_T g", self._joe_verducci),
            "malamud": ("f ≺_T g, но f ⊀ g", self._malamud),
            "komiya-scalar": ("Отделяющий функционал для f = (2, 0, 1), g = (1, 1, 1)", self._komiya_scalar),
        }

    def catalog(self) -> dict[str, str]:
        return {key: title for key, (title, _) in self._registry.items()}

    def run(self, ids: Sequence[str] | None = None, *, strict: bool = True) -> list[ExampleReport]:
        selected = list(ids) if ids else list(self._registry)
        unknown = [i for i in selected if i not in self._registry]
        if unknown:
            raise QrvValidationError(f"Неизвестные примеры: {', '.join(unknown)}")

        reports = []
        for example_id in selected:
            title, runner = self._registry[example_id]
            start = time.perf_counter()
            checks = runner()
            report = ExampleReport(example_id, title, checks, time.perf_counter() - start)
            logger.info("Пример %s: %s за %.2f с", example_id, "OK" if report.passed else "FAIL", report.duration)
            reports.append(report)

        failed = [r for r in reports if not r.passed]
        if strict and failed:
            details = "; ".join(f"{r.example_id}: {', '.join(c.name for c in r.failures)}" for r in failed)
            raise ExampleMismatch(f"Эталонные значения не воспроизведены: {details}")
        return reports

    # --- примеры ---

    def _nine_vs_eleven(self) -> list[ExampleCheck]:
        f, povm = nine_example()
        integral = self.povms.integrate(f, povm)
        cert = self.norms.l1_seminorm(f, povm, tol=SDP_TOL / 10)
        residuals = self.norms.verify_certificate(f, povm, cert)
        f1, f2 = nine_example_decomposition()
        explicit = self.povms.integrate(QuantumRandomVariable(f.space, f1 + f2), povm).norm()
        lower = self.norms.l1_lower_states(f, povm, [State(np.diag([1.0, 0.0]))])
        return [
            ExampleCheck("∫f dν = [[7, 4], [4, 1]]",
                         0.0, float(np.max(np.abs(integral.matrix - [[7, 4], [4, 1]]))), EXACT_TOL),
            ExampleCheck("‖∫f dν‖", 9.0, integral.norm(), EXACT_TOL),
            ExampleCheck("‖∫|f| dν‖", 11.0, self.norms.l1_upper_abs(f, povm), EXACT_TOL),
            ExampleCheck("‖f‖₁ (SDP)", 9.0, cert.value, SDP_TOL),
            ExampleCheck("зазор сертификата", SDP_TOL * (1 + cert.value), cert.gap, 0.0, "le"),
            ExampleCheck("невязка разложения", 1e-8, residuals["reconstruction"], 0.0, "le"),
            ExampleCheck("явное разложение: f₁ − f₂ = f", 0.0, float(np.max(np.abs(f1 - f2 - f.values))), EXACT_TOL),
            ExampleCheck("явное разложение: f₁, f₂ ⪰ 0", 0.0,
                         min(linalg.lambda_min(v) for v in np.concatenate([f1, f2])), EXACT_TOL, "ge"),
            ExampleCheck("явное разложение: ‖∫(f₁ + f₂) dν‖", 9.0, explicit, EXACT_TOL),
            ExampleCheck("∫|f_s| dν_ρ при s = e₁₁", 7.0, lower, EXACT_TOL),
        ]

    def _triangle(self) -> list[ExampleCheck]:
        f, g, povm = triangle_pair()
        a, b = f.values[0], f.values[1]
        sum_of_moduli = linalg.modulus(a) + linalg.modulus(b)
        joint = self.norms.abs_integral_norm(f + g, povm)
        separate = self.norms.abs_integral_norm(f, povm) + self.norms.abs_integral_norm(g, povm)
        return [
            ExampleCheck("‖A + B‖", float(np.sqrt(2.0)), linalg.operator_norm(a + b), 1e-12),
            ExampleCheck("‖|A| + |B|‖", 1.0, linalg.operator_norm(sum_of_moduli), 1e-12),
            ExampleCheck("‖∫|f + g| dν‖ = 2‖A + B‖", 2.0 * np.sqrt(2.0), joint, 1e-12),
            ExampleCheck("‖∫|f| dν‖ + ‖∫|g| dν‖ = 2", 2.0, separate, 1e-12),
            ExampleCheck("нарушение неравенства треугольника", 1e-3, joint - separate, 0.0, "ge"),
        ]

    def _dyadic(self) -> list[ExampleCheck]:
        checks = []
        for depth in (1, DYADIC_DEPTH // 2, DYADIC_DEPTH):
            demo = dyadic_truncation(depth)
            integral = self.povms.integrate(demo.f, demo.povm)
            norms = QuantumRandomVariable.from_scalar(demo.f.pointwise_norms(), demo.f.space, depth)
            checks.append(ExampleCheck(f"k={depth}: ∫f dν = I",
                                       0.0, float(np.max(np.abs(integral.matrix - np.eye(depth)))), EXACT_TOL))
            checks.append(ExampleCheck(f"k={depth}: ‖∫‖f‖I dν‖",
                                       float(depth), self.povms.integrate(norms, demo.povm).norm(), EXACT_TOL))
        return checks

    def _swap(self) -> list[ExampleCheck]:
        plain, swapped = [], []
        for depth in range(1, SWAP_DEPTH + 1):
            demo = swap_truncation(depth)
            u = demo.multiplier
            conjugated = self.norms.mult_operator(u.conj().T, self.norms.mult_operator(u, demo.f, "right"), "left")
            plain.append(self.norms.l1_seminorm(demo.f, demo.povm).value)
            swapped.append(self.norms.l1_seminorm(conjugated, demo.povm).value)
        bound = 1.0 / (np.sqrt(2.0) - 1.0)
        expected_plain = float(np.sum(2.0 ** (-np.arange(1, SWAP_DEPTH + 1) / 2)))
        return [
            ExampleCheck(f"‖f‖₁ при k={SWAP_DEPTH}", expected_plain, plain[-1], EXACT_TOL),
            ExampleCheck("‖f‖₁ ограничена", bound, max(plain), 0.0, "le"),
            ExampleCheck(f"‖U*fU‖₁ при k={SWAP_DEPTH}", float(SWAP_DEPTH), swapped[-1], EXACT_TOL),
            ExampleCheck("‖U*fU‖₁ строго возрастает", 0.0, float(np.min(np.diff(swapped))) - 1e-9, 0.0, "ge"),
            ExampleCheck("‖U*fU‖₁ > 10", 10.0, swapped[-1], -1e-12, "ge"),
        ]

    def _joe_verducci(self) -> list[ExampleCheck]:
        f, g = joe_verducci()
        b = self.majorization.majorizes_B(f, g)
        t = self.majorization.majorizes_T(f, g)
        s = self.majorization.majorizes_S(f, g)
        sampler_refuted = "да" if s.sampler is not None and s.sampler.refuted else "нет"
        return [
            ExampleCheck("≺", Verdict.fails.value, b.verdict.value),
            ExampleCheck("≺_T", Verdict.fails.value, t.verdict.value),
            ExampleCheck("зазор опровергающего t", 0.9, t.refuting_margin or 0.0, 0.0, "ge"),
            ExampleCheck("≺_S", Verdict.holds.value, s.verdict.value),
            ExampleCheck("случайный поиск состояний опроверг ≺_S", "нет", sampler_refuted),
        ]

    def _malamud(self) -> list[ExampleCheck]:
        f, g = malamud()
        t = self.majorization.majorizes_T(f, g)
        s = self.majorization.majorizes_S(f, g)
        b = self.majorization.majorizes_B(f, g)
        phi = self.majorization.komiya_separate(f, g)
        margin = self.majorization.separation_margin(phi, f, g) if phi is not None else float("-inf")
        farkas = b.farkas
        return [
            ExampleCheck("≺_T", Verdict.holds.value, t.verdict.value),
            ExampleCheck("включений F_S ∈ conv{G_T}", 14.0, float(len(t.containment))),
            ExampleCheck("≺_S", Verdict.holds.value, s.verdict.value),
            ExampleCheck("≺", Verdict.fails.value, b.verdict.value),
            ExampleCheck("невязка Фаркаша max Aᵀy", 1e-8, farkas.max_violation if farkas else float("inf"), 0.0, "le"),
            ExampleCheck("зазор отделения", 1e-6, margin, 0.0, "ge"),
        ]

    def _komiya_scalar(self) -> list[ExampleCheck]:
        f, g = komiya_scalar()
        phi = self.majorization.komiya_separate(f, g)
        margin = self.majorization.separation_margin(phi, f, g) if phi is not None else float("-inf")
        classical = self.majorization.majorizes_B(g, f)
        return [
            ExampleCheck("зазор отделения ≥ (max f − 1)/2", 0.5, margin, 1e-8, "ge"),
            ExampleCheck("g ≺ f", Verdict.holds.value, classical.verdict.value),
        ]

