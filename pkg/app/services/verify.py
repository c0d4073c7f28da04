"""
Независимая проверка сохраненных сертификатов.

Проверка не вызывает LP/SDP: только линейная алгебра над данными из файла.
Единственная оптимизация: задача о назначениях для ψ_φ при равных массах.
"""
from __future__ import annotations

import logging
from math import comb
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.core.config import Settings, settings
from app.core.errors import InputFormatError, QrvValidationError
from app.models.certificates import Order, SeparatingFunctional, Verdict
from app.models.measure import BistochasticMatrix, FiniteMeasureSpace
from app.schemas.certificates import (
    L1CertificateOut,
    MajorizationCertificateOut,
    SeparationOut,
    VerifyOut,
)
from app.schemas.inputs import atom_matrices_from_json
from app.services.classical import bistochastic_system, majorization_violation, uniform_violation
from app.services.l1norm import L1NormService
from app.utils import codec, linalg

logger = logging.getLogger(__name__)

REFUTATION_MARGIN = 1e-9


def _params(values: np.ndarray) -> np.ndarray:
    return np.stack([linalg.herm_to_params(v) for v in values])


def _scalarize(t: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.einsum("ij,xji->x", t, values).real


def _scale(f: np.ndarray, g: np.ndarray) -> float:
    return 1.0 + f.shape[0] * float(max(np.abs(f).max(initial=0.0), np.abs(g).max(initial=0.0)))


def psi_uniform(phi: SeparatingFunctional, values: np.ndarray) -> float:
    """ψ_φ(h) при равных массах: максимум по перестановкам (вершинам многогранника Биркгофа)."""
    cost = phi.evaluate_many(values).real
    rows, cols = linear_sum_assignment(cost, maximize=True)
    return float(cost[rows, cols].sum())


class VerifyService:
    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg
        self.norms = L1NormService(cfg)

    def verify_file(self, path: str | Path) -> VerifyOut:
        return self.verify(codec.load(path), path)

    def verify(self, data: Any, path: str | Path | None = None) -> VerifyOut:
        kind = data.get("kind") if isinstance(data, dict) else None
        if kind == "l1":
            report = self.verify_l1(codec.parse(L1CertificateOut, data, path))
        elif kind == "majorization":
            report = self.verify_majorization(codec.parse(MajorizationCertificateOut, data, path))
        elif kind == "separation":
            report = self.verify_separation(codec.parse(SeparationOut, data, path))
        else:
            raise InputFormatError(f"неизвестный вид сертификата: {kind!r}", path=str(path) if path else None)
        log = logger.info if report.ok else logger.error
        log("Проверка сертификата %s: %s", kind, "пройдена" if report.ok else "НЕ пройдена")
        return report

    # --- полунорма ---

    def verify_l1(self, out: L1CertificateOut) -> VerifyOut:
        f, povm, rho, cert = out.to_domain()
        checks = self.norms.verify_certificate(f, povm, cert, rho)
        scale = 1.0 + abs(cert.value)
        tol = self.cfg.lp_tol * scale
        notes: list[str] = []
        if checks["reconstruction"] > tol:
            notes.append("f₁ − f₂ + i(f₃ − f₄) не совпадает с f")
        if checks["min_eigenvalue"] < -tol:
            notes.append("одна из частей разложения не положительна")
        if checks["value_mismatch"] > tol:
            notes.append("значение не совпадает с ‖∫(f₁+f₂+f₃+f₄) dν‖")
        if checks["lower_bound"] > cert.value + tol:
            notes.append("нижняя оценка превышает значение")
        # заявленный зазор должен подтверждаться пересчитанной оценкой
        if checks["gap"] > cert.gap + tol:
            notes.append(f"зазор {checks['gap']:.3e} больше заявленного")
        return VerifyOut(kind="l1", ok=not notes, checks=checks, notes=notes)

    # --- мажоризация ---

    def verify_majorization(self, out: MajorizationCertificateOut) -> VerifyOut:
        space, f, g = out.pair()
        checks: dict[str, float | None] = {}
        notes: list[str] = []
        tol = self.cfg.lp_tol * _scale(f, g)

        if out.verdict == Verdict.undecided_sampled:
            notes.append("вердикт получен случайным поиском: проверять нечего")
            return VerifyOut(kind="majorization", ok=True, checks=checks, notes=notes)

        if out.order == Order.B and out.verdict == Verdict.holds:
            self._check_witness(out, space, f, g, tol, checks, notes)
        elif out.order == Order.B:
            self._check_farkas(out, space, f, g, tol, checks, notes)
        elif out.verdict == Verdict.fails:
            self._check_refutation(out, space, f, g, tol, checks, notes)
        else:
            self._check_containment(out, space, f, g, tol, checks, notes)
        return VerifyOut(kind="majorization", ok=not notes, checks=checks, notes=notes)

    @staticmethod
    def _check_witness(out: MajorizationCertificateOut, space: FiniteMeasureSpace, f: np.ndarray,
                       g: np.ndarray, tol: float, checks: dict, notes: list[str]) -> None:
        if out.witness is None:
            notes.append("нет бистохастического свидетеля")
            return
        try:
            b = BistochasticMatrix(space, np.array(out.witness, dtype=float))
        except QrvValidationError as exc:
            notes.append(exc.message)
            return
        residual = float(np.max(np.abs(b.apply(g) - f), initial=0.0))
        checks["residual"] = residual
        if residual > tol:
            notes.append(f"Bg ≠ f: невязка {residual:.3e}")

    def _check_farkas(self, out: MajorizationCertificateOut, space: FiniteMeasureSpace, f: np.ndarray,
                      g: np.ndarray, tol: float, checks: dict, notes: list[str]) -> None:
        if out.farkas is None:
            notes.append("нет сертификата Фаркаша")
            return
        a, b = bistochastic_system(space, _params(g), _params(f))
        y = out.farkas.vector()
        if y.shape[0] != a.shape[0]:
            notes.append(f"длина y ({y.shape[0]}) не совпадает с числом ограничений ({a.shape[0]})")
            return
        checks["max_violation"] = float(np.max(a.T @ y, initial=-np.inf))
        checks["pairing"] = float(b @ y)
        if checks["max_violation"] > self.cfg.lp_tol:
            notes.append("Aᵀy ≤ 0 нарушено")
        if checks["pairing"] <= self.cfg.lp_tol:
            notes.append("bᵀy не положительно")

        if out.separating is None:
            return
        phi = SeparatingFunctional(space, atom_matrices_from_json(out.separating, space, out.dim, "separating"))
        if not space.is_uniform():
            logger.warning("Массы различны: зазор отделяющего функционала не пересчитывается")
            return
        margin = phi.evaluate(f).real - psi_uniform(phi, g)
        checks["separation_margin"] = margin
        if margin <= 0.0:
            notes.append(f"отделяющий зазор {margin:.3e} не положителен")

    @staticmethod
    def _violation(space: FiniteMeasureSpace, t: np.ndarray, f: np.ndarray, g: np.ndarray) -> float:
        """Те же единицы, что и в MajorizationService: суммы по подмножествам при равных массах."""
        ft, gt = _scalarize(t, f), _scalarize(t, g)
        if space.is_uniform():
            return float(uniform_violation(ft[None, :], gt[None, :])[0])
        return majorization_violation(ft, space.masses, gt, space.masses)

    def _check_refutation(self, out: MajorizationCertificateOut, space: FiniteMeasureSpace, f: np.ndarray,
                          g: np.ndarray, tol: float, checks: dict, notes: list[str]) -> None:
        if out.refuting is None:
            notes.append("нет опровергающего направления")
            return
        t = codec.matrix_from_json(out.refuting, out.dim, "refuting")
        if not linalg.is_hermitian(t):
            notes.append("опровергающее направление не эрмитово")
            return
        if out.order == Order.S:
            checks["trace"] = float(np.trace(t).real)
            checks["min_eigenvalue"] = linalg.lambda_min(t)
            if abs(checks["trace"] - 1.0) > tol or checks["min_eigenvalue"] < -tol:
                notes.append("опровергающее s не является состоянием")
        margin = self._violation(space, linalg.hermitize(t), f, g)
        checks["refuting_margin"] = margin
        if margin <= REFUTATION_MARGIN * _scale(f, g):
            notes.append(f"зазор опровержения {margin:.3e} не положителен")

    def _check_containment(self, out: MajorizationCertificateOut, space: FiniteMeasureSpace, f: np.ndarray,
                           g: np.ndarray, tol: float, checks: dict, notes: list[str]) -> None:
        m = space.size
        if not space.is_uniform():
            notes.append("включения определены только для равных масс")
            return
        total = float(np.max(np.abs(f.sum(axis=0) - g.sum(axis=0)), initial=0.0))
        checks["sum_mismatch"] = total
        if total > tol:
            notes.append("Σf ≠ Σg")
        expected = sum(comb(m, k) for k in range(1, m))
        seen = {(rec.k, tuple(rec.subset)) for rec in out.containment}
        checks["records"] = float(len(seen))
        if len(seen) != expected:
            notes.append(f"ожидается {expected} включений, получено {len(seen)}")

        psd_tol = self.cfg.sdp_tol * _scale(f, g)
        worst = 0.0
        for rec in out.containment:
            if len(rec.subset) != rec.k or any(len(w.subset) != rec.k for w in rec.weights):
                notes.append(f"неверный размер подмножества при k={rec.k}")
                continue
            lam = np.array([w.weight for w in rec.weights])
            simplex_tol = tol if out.order == Order.T else psd_tol
            if np.any(lam < -simplex_tol) or abs(lam.sum() - 1.0) > simplex_tol:
                notes.append(f"веса для S={rec.subset} не лежат в симплексе")
                continue
            f_sum = f[list(rec.subset)].sum(axis=0)
            hull = sum((w.weight * g[list(w.subset)].sum(axis=0) for w in rec.weights), np.zeros_like(f_sum))
            if out.order == Order.T:
                excess = float(np.max(np.abs(hull - f_sum), initial=0.0))
                bad = excess > tol
            else:
                excess = max(0.0, -linalg.lambda_min(linalg.hermitize(hull - f_sum)))
                bad = excess > psd_tol
            worst = max(worst, excess)
            if bad:
                notes.append(f"включение для S={rec.subset} нарушено на {excess:.3e}")
        checks["worst_residual"] = worst

    # --- отделимость ---

    def verify_separation(self, out: SeparationOut) -> VerifyOut:
        space = out.space.to_domain()
        f = atom_matrices_from_json(out.f, space, out.dim, "f")
        g = atom_matrices_from_json(out.g, space, out.dim, "g")
        checks: dict[str, float | None] = {}
        notes: list[str] = []
        if not out.separated:
            # f ≺ g: проверяется только необходимое условие Σμf = Σμg
            mismatch = float(np.max(np.abs(np.einsum("x,xij->ij", space.masses, f - g)), initial=0.0))
            checks["integral_mismatch"] = mismatch
            if mismatch > self.cfg.lp_tol * _scale(f, g):
                notes.append("∫f ≠ ∫g при заявленном f ≺ g")
            return VerifyOut(kind="separation", ok=not notes, checks=checks, notes=notes)
        if out.weights is None:
            notes.append("нет весов W")
            return VerifyOut(kind="separation", ok=False, checks=checks, notes=notes)
        phi = SeparatingFunctional(space, atom_matrices_from_json(out.weights, space, out.dim, "weights"))
        if not space.is_uniform():
            return VerifyOut(kind="separation", ok=True, checks=checks,
                             notes=["массы различны: зазор не пересчитывается"])
        margin = phi.evaluate(f).real - psi_uniform(phi, g)
        checks["margin"] = margin
        if margin <= self.cfg.lp_tol * _scale(f, g):
            notes.append(f"зазор {margin:.3e} не положителен")
        return VerifyOut(kind="separation", ok=not notes, checks=checks, notes=notes)
