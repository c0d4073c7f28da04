from __future__ import annotations

import logging

import numpy as np

from app.core.config import Settings, settings
from app.core.errors import DimMismatch, DivisionByZeroMass, FullRankRequired, InconsistentNullSet
from app.models.measure import ClassicalFunction
from app.models.operators import ComplexOperator, State
from app.models.povm import InducedMeasure, Povm, QuantumRandomVariable, RnDerivative
from app.utils import linalg

logger = logging.getLogger(__name__)


class PovmService:
    """Индуцированные меры, производные Радона–Никодима и ν-интегрирование."""

    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg

    @staticmethod
    def _check_dim(povm: Povm, dim: int) -> None:
        if povm.dim != dim:
            raise DimMismatch(f"Размерность POVM {povm.dim} не совпадает с {dim}")

    def default_state(self, povm: Povm) -> State:
        return State.maximally_mixed(povm.dim)

    def induced_measure(self, povm: Povm, rho: State | None = None, *,
                        require_full_rank: bool = False) -> InducedMeasure:
        rho = rho or self.default_state(povm)
        self._check_dim(povm, rho.dim)
        if require_full_rank and not rho.is_full_rank():
            raise FullRankRequired("Состояние ρ должно быть невырожденным")
        raw = np.einsum("ij,xji->x", rho.matrix, povm.effects).real
        norms = np.array([linalg.operator_norm(e) for e in povm.effects])
        tol = self.cfg.psd_tol
        # tr(ρE) ≥ λ_min(ρ)·‖E‖: порог относительно ‖E(x)‖
        null = (raw <= tol * norms) | povm.null_atoms
        if require_full_rank:
            bad = null & ~povm.null_atoms
            if np.any(bad):
                labels = [a for a, b in zip(povm.space.atoms, bad) if b]
                raise InconsistentNullSet(f"ν_ρ обращается в нуль на атомах с ненулевым эффектом: {labels}")
        masses = np.where(null, 0.0, raw)
        masses.setflags(write=False)
        return InducedMeasure(space=povm.space, masses=masses)

    def rn_derivative(self, povm: Povm, rho: State | None = None) -> RnDerivative:
        rho = rho or self.default_state(povm)
        induced = self.induced_measure(povm, rho, require_full_rank=True)
        d = povm.dim
        density = np.zeros((povm.space.size, d, d), dtype=np.complex128)
        roots = np.zeros_like(density)
        for i, (effect, mass) in enumerate(zip(povm.effects, induced.masses)):
            if mass <= 0:
                if not povm.null_atoms[i]:
                    raise DivisionByZeroMass(f"Нулевая масса ν_ρ на атоме {povm.space.atoms[i]!r}")
                continue
            density[i] = linalg.hermitize(effect / mass)
            roots[i] = linalg.psd_sqrt(density[i])
        density.setflags(write=False)
        roots.setflags(write=False)
        return RnDerivative(rho=rho, induced=induced, density=density, sqrt_density=roots)

    def _derivative(self, povm: Povm, rho: State | None, rn: RnDerivative | None) -> RnDerivative:
        return rn if rn is not None else self.rn_derivative(povm, rho)

    def scalarize(self, f: QuantumRandomVariable, povm: Povm, s: State, rho: State | None = None,
                  rn: RnDerivative | None = None) -> ClassicalFunction:
        """f_s(x) = tr(s·D(x)^{1/2} f(x) D(x)^{1/2})."""
        self._check_dim(povm, f.dim)
        self._check_dim(povm, s.dim)
        rn = self._derivative(povm, rho, rn)
        conj = rn.conjugate(f.values)
        values = np.einsum("ij,xji->x", s.matrix, conj)
        return ClassicalFunction(povm.space, np.where(rn.support, values, 0.0))

    def integrate(self, f: QuantumRandomVariable, povm: Povm, rho: State | None = None,
                  rn: RnDerivative | None = None) -> ComplexOperator:
        """∫f dν = Σ_x ν_ρ(x)·D(x)^{1/2} f(x) D(x)^{1/2}; от ρ не зависит."""
        self._check_dim(povm, f.dim)
        povm.space.require_same(f.space)
        rn = self._derivative(povm, rho, rn)
        total = np.einsum("x,xij->ij", rn.masses, rn.conjugate(f.values))
        return ComplexOperator(total)

    def integrate_values(self, values: np.ndarray, rn: RnDerivative) -> np.ndarray:
        return np.einsum("x,xij->ij", rn.masses, rn.conjugate(values))

    def linf_norm(self, f: QuantumRandomVariable, measure: InducedMeasure) -> float:
        """Существенный супремум ‖f(x)‖ по атомам положительной ν_ρ-массы."""
        norms = f.pointwise_norms()
        return float(np.max(norms[measure.support], initial=0.0))

    def scalar_integral(self, g: ClassicalFunction, measure: InducedMeasure) -> complex:
        return complex(measure.masses @ g.values)
