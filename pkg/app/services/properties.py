"""
Набор свойств на случайных экземплярах.

Каждое свойство: список неравенств lhs ≤ rhs (равенство задается двумя
неравенствами). Значения полунормы берутся интервалом [нижняя оценка, значение]
из сертификата, поэтому проверки не зависят от точности решателя: левая часть
берется снизу, правая сверху.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from app.core.config import Settings, settings
from app.core.errors import QrvError, QrvValidationError, SolverError, SolverStall
from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from app.models.povm import Povm, QuantumRandomVariable
from app.services import generators
from app.services.classical import ClassicalService
from app.services.l1norm import L1NormService
from app.services.majorization import MajorizationService
from app.services.povm import PovmService
from app.solvers.lp import LpProblem, lp_solve
from app.utils import linalg

logger = logging.getLogger(__name__)

# Относительный допуск на неравенства свойств
REL_SLACK = 1e-7
RESIDUAL_TOL = 1e-8
SUITE_FUNCTIONALS = 50
STATE_SWEEP = 8
RHO_SWEEP = 20

Inequality = tuple[str, float, float]


class _Skip(Exception):
    """Свойство неприменимо к экземпляру (например, D(x) необратима)."""


@dataclass(frozen=True)
class NormBounds:
    lo: float
    hi: float


@dataclass
class PropertyTally:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    stalled: int = 0
    worst_excess: float = 0.0
    failing_seeds: list[int] = field(default_factory=list)


@dataclass
class PropertyReport:
    seed: int
    trials: int
    tallies: list[PropertyTally] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(t.failed for t in self.tallies)

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass(frozen=True, eq=False)
class TrialInstance:
    """Случайный экземпляр одного прогона; все поля выводятся из seed."""

    seed: int
    rng: np.random.Generator
    space: FiniteMeasureSpace
    povm: Povm
    scalar_povm: Povm
    f: QuantumRandomVariable
    g: QuantumRandomVariable
    h: QuantumRandomVariable
    positive: QuantumRandomVariable
    scalar: ClassicalFunction
    operator: np.ndarray
    bistochastic: BistochasticMatrix


def make_instance(seed: int) -> TrialInstance:
    rng = generators.make_rng(seed)
    m = int(rng.integers(2, 7))
    d = int(rng.integers(1, 5))
    space = generators.random_space(rng, m)
    return TrialInstance(
        seed=seed,
        rng=rng,
        space=space,
        povm=generators.random_povm(rng, space, d),
        scalar_povm=Povm.scalar(space, d),
        f=generators.random_qrv(rng, space, d),
        g=generators.random_qrv(rng, space, d),
        h=generators.random_qrv(rng, space, d, self_adjoint=True),
        positive=generators.random_qrv(rng, space, d, positive=True),
        scalar=generators.random_scalar(rng, space, real=False),
        operator=generators.random_complex(rng, (d, d)),
        bistochastic=generators.random_bistochastic(rng, space),
    )


def _equal(label: str, a: NormBounds, b: NormBounds) -> list[Inequality]:
    return [(f"{label} (≤)", a.lo, b.hi), (f"{label} (≥)", b.lo, a.hi)]


class PropertySuiteService:
    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg
        self.povms = PovmService(cfg)
        self.norms = L1NormService(cfg)
        self.classical = ClassicalService(cfg)
        self.majorization = MajorizationService(cfg)
        self._registry: dict[str, Callable[[TrialInstance], list[Inequality]]] = {
            "integral.rho-invariance": self._rho_invariance,
            "integral.state-pairing": self._state_pairing,
            "integral.pointwise-bound": self._pointwise_bound,
            "integral.selfadjoint-bound": self._selfadjoint_bound,
            "integral.entrywise-sandwich": self._entrywise_sandwich,
            "seminorm.certificate": self._certificate,
            "seminorm.triangle": self._triangle,
            "seminorm.homogeneity": self._homogeneity,
            "seminorm.adjoint": self._adjoint,
            "seminorm.integral-bound": self._integral_bound,
            "seminorm.state-lower-bound": self._state_lower_bound,
            "seminorm.sandwich": self._sandwich,
            "seminorm.conjugation": self._conjugation,
            "seminorm.linf-embedding": self._linf_embedding,
            "multiplier.scalar": self._mult_scalar,
            "multiplier.bracket": self._bracket,
            "multiplier.operator": self._mult_operator,
            "multiplier.conjugated": self._mult_conjugated,
            "multiplier.qrv": self._mult_qrv,
            "bistochastic.self-adjoint": self._bistochastic_adjoint,
            "bistochastic.l1-contraction": self._l1_contraction,
            "bistochastic.linf-contraction": self._linf_contraction,
            "bistochastic.positive-isometry": self._positive_isometry,
            "bistochastic.scalarization": self._scalarization,
            "bistochastic.bracket-modularity": self._bracket_modularity,
            "classical.equivalence": self._classical_equivalence,
            "classical.birkhoff": self._birkhoff,
            "majorization.implication": self._implication,
            "majorization.completeness": self._completeness,
            "majorization.psi-invariance": self._psi_invariance,
            "majorization.komiya-forward": self._komiya_forward,
            "majorization.komiya-converse": self._komiya_converse,
            "solver.lp-duality": self._lp_duality,
        }

    @property
    def names(self) -> list[str]:
        return list(self._registry)

    def run(self, seed: int | None = None, trials: int = 200,
            names: Sequence[str] | None = None) -> PropertyReport:
        seed = self.cfg.seed if seed is None else seed
        selected = list(names) if names else self.names
        unknown = [n for n in selected if n not in self._registry]
        if unknown:
            raise QrvValidationError(f"Неизвестные свойства: {', '.join(unknown)}")
        report = PropertyReport(seed=seed, trials=trials)
        if trials <= 0:
            return report

        tallies = {name: PropertyTally(name) for name in selected}
        report.tallies = list(tallies.values())
        for trial_seed in generators.derive_seeds(seed, trials):
            inst = make_instance(trial_seed)
            for name in selected:
                self._run_one(name, inst, tallies[name])
        logger.info("Набор свойств: seed=%d, прогонов %d, нарушений %d", seed, trials, report.failures)
        return report

    def _run_one(self, name: str, inst: TrialInstance, tally: PropertyTally) -> None:
        try:
            inequalities = self._registry[name](inst)
        except _Skip:
            tally.skipped += 1
            return
        except SolverError as exc:
            logger.warning("Свойство %s, seed=%d: решатель остановлен: %s", name, inst.seed, exc.message)
            tally.stalled += 1
            return
        except QrvError as exc:
            logger.error("Свойство %s, seed=%d: %s", name, inst.seed, exc.message)
            tally.failed += 1
            tally.failing_seeds.append(inst.seed)
            return

        ok = True
        for label, lhs, rhs in inequalities:
            excess = (lhs - rhs) / (1.0 + abs(lhs) + abs(rhs)) if np.isfinite(lhs - rhs) else np.inf
            tally.worst_excess = max(tally.worst_excess, excess)
            if excess > REL_SLACK:
                ok = False
                logger.error("Свойство %s, seed=%d: %s: %.12g > %.12g", name, inst.seed, label, lhs, rhs)
        if ok:
            tally.passed += 1
        else:
            tally.failed += 1
            tally.failing_seeds.append(inst.seed)

    # --- вспомогательное ---

    def _norm(self, f: QuantumRandomVariable, povm: Povm) -> NormBounds:
        try:
            cert = self.norms.l1_seminorm(f, povm)
        except SolverStall as exc:
            if exc.best is None:
                raise
            cert = exc.best
        return NormBounds(max(cert.dual_lower_bound, 0.0), cert.value)

    def _invertible(self, povm: Povm) -> tuple[float, float]:
        rn = self.povms.rn_derivative(povm)
        inverse = rn.inverse_sup_norm()
        if inverse is None:
            raise _Skip()
        return rn.sup_norm(), inverse

    # --- интегрирование ---

    def _rho_invariance(self, inst: TrialInstance) -> list[Inequality]:
        base = self.povms.integrate(inst.f, inst.povm).matrix
        scale = 1.0 + float(np.abs(base).max())
        out = []
        for _ in range(RHO_SWEEP):
            rho = generators.random_state(inst.rng, inst.f.dim)
            other = self.povms.integrate(inst.f, inst.povm, rho).matrix
            out.append(("∫f dν не зависит от ρ", float(np.abs(other - base).max()), 1e-9 * scale))
        return out

    def _state_pairing(self, inst: TrialInstance) -> list[Inequality]:
        s = generators.random_state(inst.rng, inst.f.dim)
        rn = self.povms.rn_derivative(inst.povm)
        lhs = linalg.trace_pairing(s.matrix, self.povms.integrate(inst.f, inst.povm, rn=rn).matrix)
        fs = self.povms.scalarize(inst.f, inst.povm, s, rn=rn)
        rhs = complex(rn.masses @ fs.values)
        return [("tr(s∫f dν) = ∫f_s dν_ρ", abs(lhs - rhs), 1e-9 * (1.0 + abs(lhs)))]

    def _weighted(self, weights: np.ndarray, like: QuantumRandomVariable, povm: Povm) -> float:
        """‖∫w(x)·I dν‖ для неотрицательной скалярной функции w."""
        return self.povms.integrate(QuantumRandomVariable.from_scalar(weights, like.space, like.dim), povm).norm()

    def _pointwise_bound(self, inst: TrialInstance) -> list[Inequality]:
        f, povm = inst.f, inst.povm
        norms = f.pointwise_norms()
        out = []
        for rho in (None, generators.random_state(inst.rng, f.dim)):
            rn = self.povms.rn_derivative(povm, rho)
            weights = np.array([linalg.operator_norm(d) for d in rn.density]) * rn.masses
            lhs = self.povms.integrate(f, povm, rn=rn).norm()
            out.append(("‖∫f dν‖ ≤ Σ‖f(x)‖‖D(x)‖ν_ρ(x)", lhs, float(norms @ weights)))
        flat = self.povms.integrate(f, inst.scalar_povm).norm()
        out.append(("‖∫f d(μI)‖ ≤ Σ‖f(x)‖μ(x)", flat, float(norms @ inst.space.masses)))
        return out

    def _selfadjoint_bound(self, inst: TrialInstance) -> list[Inequality]:
        h, povm = inst.h, inst.povm
        lhs = self.povms.integrate(h, povm).norm()
        return [("‖∫h dν‖ ≤ ‖∫‖h(x)‖I dν‖", lhs, self._weighted(h.pointwise_norms(), h, povm))]

    def _entrywise_sandwich(self, inst: TrialInstance) -> list[Inequality]:
        f, povm = inst.f, inst.povm
        crude = self._weighted(f.pointwise_norms(), f, povm)
        entrywise = self._weighted(np.abs(f.values).sum(axis=(1, 2)), f, povm)
        return [
            ("‖∫‖f(x)‖I dν‖ ≤ ‖∫Σ|f_ij(x)|I dν‖", crude, entrywise),
            ("‖∫Σ|f_ij(x)|I dν‖ ≤ n²‖∫‖f(x)‖I dν‖", entrywise, f.dim ** 2 * crude),
        ]

    # --- полунорма ---

    def _certificate(self, inst: TrialInstance) -> list[Inequality]:
        cert = self.norms.l1_seminorm(inst.f, inst.povm)
        res = self.norms.verify_certificate(inst.f, inst.povm, cert)
        scale = 1.0 + cert.value
        return [
            ("f₁ − f₂ + i(f₃ − f₄) = f", res["reconstruction"], RESIDUAL_TOL * scale),
            ("f_k ⪰ 0", -res["min_eigenvalue"], RESIDUAL_TOL * scale),
            ("значение = ‖∫Σf_k dν‖", res["value_mismatch"], RESIDUAL_TOL * scale),
            ("нижняя оценка ≤ значения", res["lower_bound"], cert.value),
        ]

    def _triangle(self, inst: TrialInstance) -> list[Inequality]:
        nf, ng = self._norm(inst.f, inst.povm), self._norm(inst.g, inst.povm)
        total = self._norm(inst.f + inst.g, inst.povm)
        return [("‖f + g‖₁ ≤ ‖f‖₁ + ‖g‖₁", total.lo, nf.hi + ng.hi)]

    def _homogeneity(self, inst: TrialInstance) -> list[Inequality]:
        # равенство ‖cf‖₁ = |c|‖f‖₁ верно только для вещественных c и c = ±i
        rng = inst.rng
        nf = self._norm(inst.f, inst.povm)
        real = float(rng.standard_normal())
        unit = 1j if rng.random() < 0.5 else -1j
        out = _equal("‖cf‖₁ = |c|‖f‖₁, c ∈ ℝ", self._norm(real * inst.f, inst.povm),
                     NormBounds(abs(real) * nf.lo, abs(real) * nf.hi))
        out += _equal("‖±if‖₁ = ‖f‖₁", self._norm(unit * inst.f, inst.povm), nf)
        c = complex(rng.standard_normal(), rng.standard_normal())
        spread = abs(c.real) + abs(c.imag)
        scaled = self._norm(c * inst.f, inst.povm)
        out += [
            ("‖cf‖₁ ≤ (|Re c| + |Im c|)‖f‖₁", scaled.lo, spread * nf.hi),
            ("|c|²‖f‖₁ ≤ (|Re c| + |Im c|)‖cf‖₁", abs(c) ** 2 * nf.lo, spread * scaled.hi),
        ]
        return out

    def _adjoint(self, inst: TrialInstance) -> list[Inequality]:
        return _equal("‖f*‖₁ = ‖f‖₁", self._norm(inst.f.adjoint(), inst.povm), self._norm(inst.f, inst.povm))

    def _integral_bound(self, inst: TrialInstance) -> list[Inequality]:
        nf = self._norm(inst.f, inst.povm)
        return [("‖∫f dν‖ ≤ 2‖f‖₁", self.povms.integrate(inst.f, inst.povm).norm(), 2.0 * nf.hi)]

    def _state_lower_bound(self, inst: TrialInstance) -> list[Inequality]:
        states = [generators.haar_pure_state(inst.rng, inst.f.dim) for _ in range(STATE_SWEEP)]
        lower = self.norms.l1_lower_states(inst.f, inst.povm, states)
        return [("∫|f_s| dν_ρ ≤ ‖f‖₁", lower, self._norm(inst.f, inst.povm).hi)]

    def _sandwich(self, inst: TrialInstance) -> list[Inequality]:
        h, povm = inst.h, inst.povm
        sup_d, sup_inv = self._invertible(povm)
        nh = self._norm(h, povm)
        abs_norm = self.norms.l1_upper_abs(h, povm)
        crude = self._weighted(h.pointwise_norms(), h, povm)
        factor = h.dim * sup_d * sup_inv
        return [
            ("‖∫h dν‖ ≤ ‖h‖₁", self.povms.integrate(h, povm).norm(), nh.hi),
            ("‖h‖₁ ≤ ‖∫|h| dν‖", nh.lo, abs_norm),
            ("‖∫|h| dν‖ ≤ ‖∫‖h(x)‖I dν‖", abs_norm, crude),
            ("‖∫‖h(x)‖I dν‖ ≤ n‖D‖‖D⁻¹‖‖h‖₁", crude, factor * nh.hi),
        ]

    def _conjugation(self, inst: TrialInstance) -> list[Inequality]:
        self._invertible(inst.povm)
        rn = self.povms.rn_derivative(inst.povm)
        space = rn.induced.as_space()
        conj = QuantumRandomVariable(space, rn.conjugate(inst.f.values)[rn.support])
        return _equal(
            "‖f‖_{1,ν} = ‖D^{1/2}fD^{1/2}‖_{1,ν_ρI}",
            self._norm(inst.f, inst.povm),
            self._norm(conj, Povm.scalar(space, inst.f.dim)),
        )

    def _linf_embedding(self, inst: TrialInstance) -> list[Inequality]:
        measure = self.povms.induced_measure(inst.povm)
        bound = 2.0 * self.povms.linf_norm(inst.f, measure) * linalg.operator_norm(inst.povm.total())
        return [("‖f‖₁ ≤ 2‖f‖∞‖ν(X)‖", self._norm(inst.f, inst.povm).lo, bound)]

    # --- умножения ---

    def _mult_scalar(self, inst: TrialInstance) -> list[Inequality]:
        nf = self._norm(inst.f, inst.povm)
        product = self._norm(self.norms.mult_scalar(inst.f, inst.scalar), inst.povm)
        return [("‖f·gI‖₁ ≤ 2‖f‖₁‖g‖∞", product.lo, 2.0 * nf.hi * inst.scalar.sup_norm())]

    def _bracket(self, inst: TrialInstance) -> list[Inequality]:
        nf = self._norm(inst.f, inst.povm)
        value = self.norms.bracket(inst.f, inst.scalar, inst.povm).norm()
        return [("‖⟨f, gI⟩‖ ≤ 4‖f‖₁‖g‖∞", value, 4.0 * nf.hi * inst.scalar.sup_norm())]

    def _mult_operator(self, inst: TrialInstance) -> list[Inequality]:
        povm = inst.scalar_povm
        nf = self._norm(inst.f, povm)
        bound = 4.0 * (1.0 + linalg.operator_norm(inst.operator) ** 2) * nf.hi
        left = self._norm(self.norms.mult_operator(inst.operator, inst.f, "left"), povm)
        right = self._norm(self.norms.mult_operator(inst.operator, inst.f, "right"), povm)
        return [("‖Af‖₁ ≤ 4(1 + ‖A‖²)‖f‖₁", left.lo, bound), ("‖fA‖₁ ≤ 4(1 + ‖A‖²)‖f‖₁", right.lo, bound)]

    def _mult_conjugated(self, inst: TrialInstance) -> list[Inequality]:
        self._invertible(inst.povm)
        nf = self._norm(inst.f, inst.povm)
        product = self._norm(self.norms.mult_operator_conjugated(inst.operator, inst.f, inst.povm), inst.povm)
        bound = 4.0 * (1.0 + linalg.operator_norm(inst.operator) ** 2) * nf.hi
        return [("‖D^{-1/2}AD^{1/2}f‖₁ ≤ 4(1 + ‖A‖²)‖f‖₁", product.lo, bound)]

    def _mult_qrv(self, inst: TrialInstance) -> list[Inequality]:
        sup_d, sup_inv = self._invertible(inst.povm)
        measure = self.povms.induced_measure(inst.povm)
        nf = self._norm(inst.f, inst.povm)
        product = self._norm(self.norms.mult_qrv(inst.f, inst.g), inst.povm)
        # множитель 2: fg в общем случае не самосопряжена
        bound = 2.0 * inst.f.dim * sup_d * sup_inv * nf.hi * self.povms.linf_norm(inst.g, measure)
        return [("‖fg‖₁ ≤ 2n‖D‖‖D⁻¹‖‖f‖₁‖g‖∞", product.lo, bound)]

    # --- бистохастические операторы (ν = μI) ---

    def _bistochastic_adjoint(self, inst: TrialInstance) -> list[Inequality]:
        b = inst.bistochastic
        lhs = self.majorization.apply_bistochastic(b, inst.f.adjoint())
        rhs = self.majorization.apply_bistochastic(b, inst.f).adjoint()
        return [("B(f*) = B(f)*", float(np.abs(lhs.values - rhs.values).max()), RESIDUAL_TOL)]

    def _l1_contraction(self, inst: TrialInstance) -> list[Inequality]:
        povm = inst.scalar_povm
        image = self.majorization.apply_bistochastic(inst.bistochastic, inst.f)
        return [("‖Bf‖₁ ≤ ‖f‖₁", self._norm(image, povm).lo, self._norm(inst.f, povm).hi)]

    def _linf_contraction(self, inst: TrialInstance) -> list[Inequality]:
        image = self.majorization.apply_bistochastic(inst.bistochastic, inst.h)
        return [("‖Bh‖∞ ≤ ‖h‖∞", float(image.pointwise_norms().max()), float(inst.h.pointwise_norms().max()))]

    def _positive_isometry(self, inst: TrialInstance) -> list[Inequality]:
        povm = inst.scalar_povm
        image = self.majorization.apply_bistochastic(inst.bistochastic, inst.positive)
        return _equal("‖Bp‖₁ = ‖p‖₁ при p ⪰ 0", self._norm(image, povm), self._norm(inst.positive, povm))

    def _scalarization(self, inst: TrialInstance) -> list[Inequality]:
        s = generators.random_state(inst.rng, inst.f.dim)
        povm = inst.scalar_povm
        image = self.majorization.apply_bistochastic(inst.bistochastic, inst.f)
        lhs = self.povms.scalarize(image, povm, s).values
        rhs = inst.bistochastic.apply(self.povms.scalarize(inst.f, povm, s).values)
        return [("(Bf)_s = B(f_s)", float(np.abs(lhs - rhs).max()), RESIDUAL_TOL)]

    def _bracket_modularity(self, inst: TrialInstance) -> list[Inequality]:
        space, b = inst.space, inst.bistochastic
        phi = generators.random_scalar(inst.rng, space, real=False)
        g = generators.random_scalar(inst.rng, space, real=False)
        a = inst.operator
        fa = QuantumRandomVariable(space, phi.values[:, None, None] * a)
        lhs = self.norms.bracket(self.majorization.apply_bistochastic(b, fa), g, inst.scalar_povm).matrix
        scalar = complex(space.masses @ (b.apply(phi.values) * g.values))
        rhs = scalar * np.asarray(a)
        scale = 1.0 + float(np.abs(rhs).max())
        return [("⟨B(fA), gI⟩ = ⟨B(f), g⟩A", float(np.abs(lhs - rhs).max()), RESIDUAL_TOL * scale)]

    # --- классическая мажоризация ---

    def _classical_equivalence(self, inst: TrialInstance) -> list[Inequality]:
        rng = inst.rng
        m = int(rng.integers(2, 9))
        space = FiniteMeasureSpace.uniform(m, 1.0 / m)
        g = generators.random_scalar(rng, space)
        if inst.seed % 2 == 0:
            f = ClassicalFunction(space, generators.random_bistochastic(rng, space).apply(g.values))
        else:
            delta = rng.standard_normal(m)
            f = ClassicalFunction(space, g.values.real[rng.permutation(m)] + 0.5 * (delta - delta.mean()))
        by_sums = self.classical.classical_majorizes(f, g)
        by_lp = isinstance(self.classical.bistochastic_witness(f, g), BistochasticMatrix)
        by_convex = self.classical.convex_function_test(f, g)
        agree = by_sums == by_lp == by_convex
        return [("частичные суммы ⟺ ЛП ⟺ выпуклые функции", 0.0 if agree else 1.0, 0.0)]

    def _birkhoff(self, inst: TrialInstance) -> list[Inequality]:
        b = inst.bistochastic
        terms = self.classical.birkhoff_decompose(b)
        m = b.space.size
        recon = sum(w * np.eye(m)[list(p)] for w, p in terms)
        return [
            ("число перестановок ≤ (m − 1)² + 1", float(len(terms)), float((m - 1) ** 2 + 1)),
            ("невязка восстановления", float(np.abs(recon - b.matrix).max()), RESIDUAL_TOL),
        ]

    # --- мажоризация ---

    def _small_pair(self, inst: TrialInstance) -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
        rng = inst.rng
        m, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        space = FiniteMeasureSpace.uniform(m, 1.0 / m)
        g = generators.random_qrv(rng, space, d, self_adjoint=True)
        image = generators.random_bistochastic(rng, space).apply(g.values)
        if inst.seed % 2 == 0:
            return QuantumRandomVariable(space, image), g
        delta = np.stack([generators.random_hermitian(rng, d) for _ in range(m)])
        return QuantumRandomVariable(space, image + 0.5 * (delta - delta.mean(axis=0))), g

    def _implication(self, inst: TrialInstance) -> list[Inequality]:
        f, g = self._small_pair(inst)
        report = self.majorization.implication_suite(f, g, seed=inst.seed)
        return [("≺ ⇒ ≺_T ⇒ ≺_S", 0.0 if report.consistent else 1.0, 0.0)]

    def _completeness(self, inst: TrialInstance) -> list[Inequality]:
        h = inst.h
        image = self.majorization.apply_bistochastic(inst.bistochastic, h)
        cert = self.majorization.majorizes_B(image, h)
        residual = cert.residual if cert.holds and cert.residual is not None else np.inf
        scale = 1.0 + float(np.abs(h.values).max())
        return [
            ("Bg ≺ g", 0.0 if cert.holds else 1.0, 0.0),
            ("невязка свидетеля", float(residual), RESIDUAL_TOL * scale),
        ]

    def _psi_invariance(self, inst: TrialInstance) -> list[Inequality]:
        h = inst.h
        phi = self.majorization.random_functional(inst.rng, h.space, h.dim)
        sigma = inst.rng.permutation(h.space.size)
        base = self.majorization.psi_phi(phi, h)
        moved = self.majorization.psi_phi(phi, QuantumRandomVariable(h.space, h.values[sigma]))
        return [("ψ_φ(h∘σ) = ψ_φ(h)", abs(moved - base), RESIDUAL_TOL * (1.0 + abs(base)))]

    def _komiya_forward(self, inst: TrialInstance) -> list[Inequality]:
        g = inst.h
        f = self.majorization.apply_bistochastic(inst.bistochastic, g)
        found = self.majorization.komiya_separate(f, g, seed=inst.seed, trials=SUITE_FUNCTIONALS)
        return [("ψ_φ(Bg) ≤ ψ_φ(g) для случайных φ", 0.0 if found is None else 1.0, 0.0)]

    def _komiya_converse(self, inst: TrialInstance) -> list[Inequality]:
        space, d = inst.space, inst.h.dim
        level = generators.random_hermitian(inst.rng, d)
        delta = np.stack([generators.random_hermitian(inst.rng, d) for _ in range(space.size)])
        delta -= delta.mean(axis=0)
        g = QuantumRandomVariable.constant(space, level)
        f = QuantumRandomVariable(space, level + delta)
        phi = self.majorization.komiya_separate(f, g, seed=inst.seed, trials=0)
        if phi is None:
            return [("найден отделяющий φ", 1.0, 0.0)]
        return [("зазор отделения > 0", 1e-8, self.majorization.separation_margin(phi, f, g))]

    # --- решатель ---

    def _lp_duality(self, inst: TrialInstance) -> list[Inequality]:
        rng = inst.rng
        n = int(rng.integers(5, 61))
        p = int(rng.integers(1, n))
        a = rng.standard_normal((p, n))
        b = a @ rng.uniform(0.0, 1.0, n)
        c = a.T @ rng.standard_normal(p) + rng.uniform(0.0, 1.0, n)
        res = lp_solve(LpProblem(c, a, b), self.cfg)
        if not res.is_optimal:
            return [("допустимая ограниченная ЛП решена", 1.0, 0.0)]
        gap = abs(float(c @ res.x) - float(b @ res.y))
        return [("|cᵀx − bᵀy|", gap, 1e-8 * (1.0 + abs(res.value)))]

