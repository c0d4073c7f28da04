from __future__ import annotations

import logging
from typing import Iterable, Literal

import numpy as np
from numpy.typing import ArrayLike

from app.core.config import Settings, settings
from app.core.errors import DimMismatch, SolverStall
from app.models.certificates import L1Certificate, PositivityWitness
from app.models.measure import ClassicalFunction
from app.models.operators import ComplexOperator, State
from app.models.povm import Povm, QuantumRandomVariable, RnDerivative
from app.services.generators import bounded_truncation
from app.services.povm import PovmService
from app.solvers.sdp import LmiBlock, SdpProblem, sdp_solve
from app.utils import linalg

logger = logging.getLogger(__name__)

Side = Literal["left", "right"]


class L1NormService:
    """Полунорма ‖·‖₁ с сертификатами, скобка ⟨f, gI⟩ и умножения."""

    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg
        self.povms = PovmService(cfg)

    # --- оценки ---

    def state_lower_bound(self, f: QuantumRandomVariable, rn: RnDerivative, state: ArrayLike) -> float:
        """
        L(Z) = Σ_x ‖Z_x^{1/2} Re f(x) Z_x^{1/2}‖_tr + ‖Z_x^{1/2} Im f(x) Z_x^{1/2}‖_tr,
        Z_x = ν_ρ(x)·D(x)^{1/2} Z D(x)^{1/2}. Для любого состояния Z это нижняя оценка ‖f‖₁.
        """
        z = linalg.project_to_state(state)
        re, im = f.real_part().values, f.imag_part().values
        total = 0.0
        for x in np.flatnonzero(rn.support):
            root = rn.sqrt_density[x]
            zx_half = linalg.psd_sqrt(rn.masses[x] * root @ z @ root)
            total += linalg.trace_norm(linalg.hermitize(zx_half @ re[x] @ zx_half))
            total += linalg.trace_norm(linalg.hermitize(zx_half @ im[x] @ zx_half))
        return total

    def _certificate(self, f: QuantumRandomVariable, rn: RnDerivative, p: np.ndarray, q: np.ndarray,
                     state: np.ndarray, method: str) -> L1Certificate:
        re, im = f.real_part().values, f.imag_part().values
        f1, f2, f3, f4 = re + p, p, im + q, q
        total = self.povms.integrate_values(f1 + f2 + f3 + f4, rn)
        space = f.space
        decomposition = tuple(QuantumRandomVariable(space, v) for v in (f1, f2, f3, f4))
        return L1Certificate(
            value=linalg.operator_norm(linalg.hermitize(total)),
            decomposition=decomposition,  # type: ignore[arg-type]
            dual_state=linalg.project_to_state(state),
            dual_lower_bound=self.state_lower_bound(f, rn, state),
            method=method,
        )

    @staticmethod
    def _shift_psd(p: np.ndarray, base: np.ndarray) -> np.ndarray:
        """p ← p + εI с ε = max(0, −λ_min(p), −λ_min(p + base))."""
        eps = max(0.0, -linalg.lambda_min(p), -linalg.lambda_min(p + base))
        return linalg.hermitize(p + eps * np.eye(p.shape[0]))

    def l1_seminorm(self, f: QuantumRandomVariable, povm: Povm, tol: float | None = None,
                    rho: State | None = None) -> L1Certificate:
        tol = self.cfg.sdp_tol if tol is None else tol
        povm.space.require_same(f.space)
        rn = self.povms.rn_derivative(povm, rho)
        d = f.dim
        zeros = np.zeros_like(f.values)

        if f.is_positive():
            hermitian = f.require_self_adjoint()
            integral = self.povms.integrate_values(hermitian.values, rn)
            _, vecs = linalg.hermitian_eigen(integral)
            top = np.outer(vecs[:, 0], vecs[:, 0].conj())
            cert = self._certificate(hermitian, rn, zeros, zeros, top, "analytic")
            logger.info("‖f‖₁ = %.12g (положительная f, без SDP)", cert.value)
            return cert

        re, im = f.real_part().values, f.imag_part().values
        support = np.flatnonzero(rn.support)
        basis = linalg.hermitian_basis(d)
        nb = basis.shape[0]
        n = 1 + 2 * nb * len(support)

        def kernel(x: int, h: np.ndarray) -> np.ndarray:
            root = rn.sqrt_density[x]
            return rn.masses[x] * root @ h @ root

        norm_const = -sum(kernel(x, re[x] + im[x]) for x in support) if len(support) else np.zeros((d, d))
        norm_coef = np.zeros((n, d, d), dtype=np.complex128)
        norm_coef[0] = np.eye(d)
        blocks: list[LmiBlock] = []
        for slot, x in enumerate(support):
            p_off = 1 + 2 * nb * slot
            q_off = p_off + nb
            scaled = np.stack([-2.0 * kernel(x, b) for b in basis])
            norm_coef[p_off:p_off + nb] = scaled
            norm_coef[q_off:q_off + nb] = scaled
            for off, base, tag in ((p_off, re[x], "p"), (q_off, im[x], "q")):
                coef = np.zeros((n, d, d), dtype=np.complex128)
                coef[off:off + nb] = basis
                blocks.append(LmiBlock(np.zeros((d, d)), coef, f"{tag}[{x}]"))
                blocks.append(LmiBlock(base, coef, f"{tag}+f[{x}]"))
        blocks.insert(0, LmiBlock(linalg.hermitize(norm_const), norm_coef, "norm"))
        c = np.zeros(n)
        c[0] = 1.0

        try:
            result = sdp_solve(SdpProblem(c, tuple(blocks)), tol=tol, cfg=self.cfg)
        except SolverStall as exc:
            if exc.best is None:
                raise
            logger.warning("SDP полунормы остановлена: %s", exc.message)
            result = exc.best

        p = np.zeros_like(f.values)
        q = np.zeros_like(f.values)
        for slot, x in enumerate(support):
            p_off = 1 + 2 * nb * slot
            q_off = p_off + nb
            p[x] = self._shift_psd(linalg.params_to_herm(result.y[p_off:p_off + nb], d), re[x])
            q[x] = self._shift_psd(linalg.params_to_herm(result.y[q_off:q_off + nb], d), im[x])
        # вне носителя ν_ρ годится любое положительное разложение
        for x in np.flatnonzero(~rn.support):
            p[x] = linalg.positive_parts(re[x])[1]
            q[x] = linalg.positive_parts(im[x])[1]

        cert = self._certificate(f, rn, p, q, result.block_duals[0], "sdp")
        logger.info("‖f‖₁ = %.12g, зазор %.2e", cert.value, cert.gap)
        if cert.gap > tol * (1.0 + cert.value):
            raise SolverStall(f"Зазор полунормы {cert.gap:.3e} превышает допуск {tol:.1e}", gap=cert.gap, best=cert)
        return cert

    def verify_certificate(self, f: QuantumRandomVariable, povm: Povm, cert: L1Certificate,
                           rho: State | None = None) -> dict[str, float]:
        """Независимая проверка: невязки разложения, положительность, значение и оценка."""
        rn = self.povms.rn_derivative(povm, rho)
        f1, f2, f3, f4 = (c.values for c in cert.decomposition)
        recon = f1 - f2 + 1j * (f3 - f4)
        min_eig = min(linalg.lambda_min(v) for part in (f1, f2, f3, f4) for v in part)
        value = linalg.operator_norm(linalg.hermitize(self.povms.integrate_values(f1 + f2 + f3 + f4, rn)))
        return {
            "reconstruction": float(np.max(np.abs(recon - f.values), initial=0.0)),
            "min_eigenvalue": float(min_eig),
            "value_mismatch": abs(value - cert.value),
            "lower_bound": self.state_lower_bound(f, rn, cert.dual_state),
            "gap": cert.value - self.state_lower_bound(f, rn, cert.dual_state),
        }

    def l1_upper_abs(self, f: QuantumRandomVariable, povm: Povm) -> float:
        """‖∫|f| dν‖ для самосопряженной f; всегда ≥ ‖f‖₁."""
        return self.povms.integrate(f.abs(), povm).norm()

    def abs_integral_norm(self, f: QuantumRandomVariable, povm: Povm) -> float:
        """‖∫|f| dν‖ с |A| = (A*A)^{1/2}; f может быть несамосопряженной."""
        moduli = np.stack([linalg.modulus(v) for v in f.values])
        return self.povms.integrate(QuantumRandomVariable(f.space, moduli), povm).norm()

    def l1_lower_states(self, f: QuantumRandomVariable, povm: Povm, states: Iterable[State],
                        rho: State | None = None) -> float:
        """max_s ∫|f_s| dν_ρ по переданным состояниям."""
        rn = self.povms.rn_derivative(povm, rho)
        best = 0.0
        for s in states:
            fs = self.povms.scalarize(f, povm, s, rn=rn)
            best = max(best, float(rn.masses @ np.abs(fs.values)))
        return best

    def truncation_profile(self, f: QuantumRandomVariable, povm: Povm, levels: Iterable[float]) -> list[float]:
        """‖f − χ_E f‖₁ для E = {‖f(x)‖ ≤ level} по каждому уровню."""
        profile = []
        for level in levels:
            tail = f - bounded_truncation(f, level)
            if not np.any(tail.values):
                profile.append(0.0)
                continue
            profile.append(self.l1_seminorm(tail, povm).reported_value)
        return profile

    # --- скобка и умножения ---

    def bracket(self, f: QuantumRandomVariable, g: ClassicalFunction, povm: Povm) -> ComplexOperator:
        """⟨f, gI⟩ = ∫ f·g dν."""
        return self.povms.integrate(self.mult_scalar(f, g), povm)

    def mult_scalar(self, f: QuantumRandomVariable, g: ClassicalFunction) -> QuantumRandomVariable:
        f.space.require_same(g.space)
        return QuantumRandomVariable(f.space, g.values[:, None, None] * f.values)

    def mult_operator(self, a: ArrayLike, f: QuantumRandomVariable, side: Side = "left") -> QuantumRandomVariable:
        m = linalg.as_matrix(a)
        if m.shape[0] != f.dim:
            raise DimMismatch(f"Размерность оператора {m.shape[0]} не совпадает с {f.dim}")
        values = np.einsum("ij,xjk->xik", m, f.values) if side == "left" else np.einsum("xij,jk->xik", f.values, m)
        return QuantumRandomVariable(f.space, values)

    def mult_operator_conjugated(self, a: ArrayLike, f: QuantumRandomVariable, povm: Povm,
                                 rho: State | None = None) -> QuantumRandomVariable:
        """x ↦ D(x)^{-1/2} A D(x)^{1/2} f(x); требуется обратимость D(x) на носителе."""
        m = linalg.as_matrix(a)
        if m.shape[0] != f.dim:
            raise DimMismatch(f"Размерность оператора {m.shape[0]} не совпадает с {f.dim}")
        rn = self.povms.rn_derivative(povm, rho)
        values = np.array(f.values)
        for x in np.flatnonzero(rn.support):
            inv_root = linalg.psd_inverse_sqrt(rn.density[x])
            values[x] = inv_root @ m @ rn.sqrt_density[x] @ f.values[x]
        return QuantumRandomVariable(f.space, values)

    def mult_qrv(self, f: QuantumRandomVariable, g: QuantumRandomVariable) -> QuantumRandomVariable:
        """Поточечное произведение f(x)g(x)."""
        f.space.require_same(g.space)
        if f.dim != g.dim:
            raise DimMismatch(f"Размерности не совпадают: {f.dim} и {g.dim}")
        return QuantumRandomVariable(f.space, np.einsum("xij,xjk->xik", f.values, g.values))

    def detect_positive(self, f: QuantumRandomVariable, povm: Povm,
                        rho: State | None = None) -> tuple[bool, PositivityWitness | None]:
        """
        f ⪰ 0 проверяется через ⟨f, χ_x I⟩ = ν_ρ(x)·D^{1/2} f(x) D^{1/2} на атомах носителя;
        при обратимой D(x) это равносильно f(x) ⪰ 0.
        """
        rn = self.povms.rn_derivative(povm, rho)
        for x in np.flatnonzero(rn.support):
            local = rn.masses[x] * rn.sqrt_density[x] @ f.values[x] @ rn.sqrt_density[x]
            scale = 1.0 + linalg.operator_norm(local)
            if not linalg.is_hermitian(local):
                w, v = np.linalg.eigh(linalg.imag_part(local))
                idx = int(np.argmax(np.abs(w)))
                vec = v[:, idx]
                return False, PositivityWitness(povm.space.atoms[x], vec, complex(vec.conj() @ local @ vec))
            w, v = np.linalg.eigh(linalg.hermitize(local))
            if w[0] < -self.cfg.psd_tol * scale:
                return False, PositivityWitness(povm.space.atoms[x], v[:, 0], complex(w[0]))
        return True, None
