from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from app.core.config import Settings, settings
from app.core.errors import DimMismatch, QrvError, SolverError
from app.models.certificates import (
    ContainmentRecord,
    MajorizationCertificate,
    Order,
    SamplerSummary,
    SeparatingFunctional,
    Verdict,
)
from app.models.measure import BistochasticMatrix, FiniteMeasureSpace
from app.models.povm import QuantumRandomVariable
from app.services import generators
from app.services.classical import bistochastic_system, majorization_violation, uniform_violation
from app.solvers.lp import LpProblem, lp_solve
from app.solvers.sdp import LmiBlock, SdpProblem, sdp_solve
from app.utils import linalg

logger = logging.getLogger(__name__)

# Минимальный зазор, при котором опровержение считается проверенным
REFUTATION_MARGIN = 1e-9
SEPARATION_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class ImplicationReport:
    b: MajorizationCertificate
    t: MajorizationCertificate
    s: MajorizationCertificate

    @property
    def consistent(self) -> bool:
        """f ≺ g ⇒ f ≺_T g ⇒ f ≺_S g (неопределенные вердикты не нарушают цепочку)."""
        if self.b.verdict == Verdict.holds and self.t.verdict == Verdict.fails:
            return False
        if self.t.verdict == Verdict.holds and self.s.verdict == Verdict.fails:
            return False
        return not (self.b.verdict == Verdict.holds and self.s.verdict == Verdict.fails)

    @property
    def verdicts(self) -> dict[str, str]:
        return {"b": self.b.verdict.value, "t": self.t.verdict.value, "s": self.s.verdict.value}


def _pair(f: QuantumRandomVariable, g: QuantumRandomVariable) -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    f.space.require_same(g.space)
    if f.dim != g.dim:
        raise DimMismatch(f"Размерности не совпадают: {f.dim} и {g.dim}")
    return f.require_self_adjoint(), g.require_self_adjoint()


def _params(values: np.ndarray) -> np.ndarray:
    return np.stack([linalg.herm_to_params(v) for v in values])


def _scalarize_many(directions: np.ndarray, values: np.ndarray) -> np.ndarray:
    """tr(t_n h(x)) для пачки направлений; форма (N, m)."""
    return np.einsum("nij,xji->nx", directions, values).real


def _subset_sums(values: np.ndarray, k: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    subsets = list(itertools.combinations(range(values.shape[0]), k))
    return subsets, np.stack([values[list(s)].sum(axis=0) for s in subsets])


class MajorizationService:
    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg

    # --- бистохастические операторы ---

    def apply_bistochastic(self, b: BistochasticMatrix, f: QuantumRandomVariable) -> QuantumRandomVariable:
        """Поэлементное действие: (Bf)_{ij} = B(f_{ij})."""
        b.space.require_same(f.space)
        return QuantumRandomVariable(f.space, b.apply(f.values))

    def psi_phi(self, phi: SeparatingFunctional, h: QuantumRandomVariable) -> float:
        """ψ_φ(h) = max Re φ(Bh) по бистохастическим B."""
        phi.space.require_same(h.space)
        m = h.space.size
        cost = phi.evaluate_many(h.values).real
        a, b = bistochastic_system(h.space, np.zeros((m, 0)), np.zeros((m, 0)))
        res = lp_solve(LpProblem(-cost.reshape(-1), a, b), self.cfg)
        if not res.is_optimal:
            raise SolverError("ЛП для ψ_φ не имеет оптимума")
        return -float(res.value)

    def separation_margin(self, phi: SeparatingFunctional, f: QuantumRandomVariable, g: QuantumRandomVariable) -> float:
        return phi.evaluate(f.values).real - self.psi_phi(phi, g)

    def majorizes_B(self, f: QuantumRandomVariable, g: QuantumRandomVariable) -> MajorizationCertificate:
        f, g = _pair(f, g)
        space = f.space
        m, d = space.size, f.dim
        a, b = bistochastic_system(space, _params(g.values), _params(f.values))
        res = lp_solve(LpProblem.feasibility(a, b), self.cfg)
        if res.is_optimal:
            witness = BistochasticMatrix(space, res.x.reshape(m, m))
            residual = float(np.max(np.abs(witness.apply(g.values) - f.values), initial=0.0))
            logger.info("f ≺ g: найден бистохастический свидетель, невязка %.2e", residual)
            return MajorizationCertificate(Order.B, Verdict.holds, witness=witness, residual=residual)

        y = res.farkas.y
        w = y[2 * m:].reshape(m, d * d)
        weights = np.stack([linalg.dual_params_to_herm(w[x], d) / space.masses[x] for x in range(m)])
        phi = SeparatingFunctional(space, weights)
        margin = self.separation_margin(phi, f, g)
        logger.info("f ⊀ g: сертификат Фаркаша, отделяющий зазор %.3e", margin)
        return MajorizationCertificate(
            Order.B,
            Verdict.fails,
            farkas=res.farkas,
            separating=phi,
            separation_margin=margin,
            residual=res.farkas.max_violation,
        )

    # --- скаляризованные порядки ---

    def _violation(self, space: FiniteMeasureSpace, fv: np.ndarray, gv: np.ndarray) -> float:
        if space.is_uniform():
            return float(uniform_violation(fv[None, :], gv[None, :])[0])
        return majorization_violation(fv, space.masses, gv, space.masses)

    def _tolerance(self, f: QuantumRandomVariable, g: QuantumRandomVariable) -> float:
        scale = 1.0 + f.space.size * max(float(f.pointwise_norms().max()), float(g.pointwise_norms().max()))
        return REFUTATION_MARGIN * scale

    def _sample(self, f: QuantumRandomVariable, g: QuantumRandomVariable, directions: np.ndarray,
                seed: int) -> SamplerSummary:
        fv, gv = _scalarize_many(directions, f.values), _scalarize_many(directions, g.values)
        space = f.space
        if space.is_uniform():
            margins = uniform_violation(fv, gv)
        else:
            margins = np.array([majorization_violation(a, space.masses, b, space.masses) for a, b in zip(fv, gv)])
        worst = int(np.argmax(margins)) if margins.size else 0
        refuted = bool(margins.size and margins[worst] > self._tolerance(f, g))
        return SamplerSummary(
            seed=seed,
            samples=int(margins.size),
            refuted=refuted,
            worst_margin=float(margins[worst]) if margins.size else 0.0,
            refuting=directions[worst] if refuted else None,
        )

    def _exact_enabled(self, space: FiniteMeasureSpace) -> str | None:
        if not space.is_uniform():
            return "массы атомов различны: точная проверка недоступна, только случайный поиск"
        if space.size > self.cfg.subset_cap:
            return f"число атомов {space.size} превышает предел перебора {self.cfg.subset_cap}"
        return None

    def _finish_sampled(self, order: Order, sampler: SamplerSummary, notes: list[str]) -> MajorizationCertificate:
        if sampler.refuted:
            return MajorizationCertificate(
                order, Verdict.fails, refuting=sampler.refuting, refuting_margin=sampler.worst_margin,
                sampler=sampler, notes=tuple(notes),
            )
        logger.warning("Вердикт %s получен только случайным поиском", order.value)
        return MajorizationCertificate(order, Verdict.undecided_sampled, sampler=sampler, notes=tuple(notes))

    def majorizes_T(self, f: QuantumRandomVariable, g: QuantumRandomVariable,
                    seed: int | None = None) -> MajorizationCertificate:
        f, g = _pair(f, g)
        seed = self.cfg.seed if seed is None else seed
        space, d = f.space, f.dim
        tol = self._tolerance(f, g)
        sampler = self._sample(f, g, generators.sample_hermitian(generators.make_rng(seed), d, self.cfg.t_samples), seed)

        diff = f.values.sum(axis=0) - g.values.sum(axis=0)
        if np.linalg.norm(diff) > tol:
            t = linalg.hermitize(diff / np.linalg.norm(diff))
            margin = self._violation(space, _scalarize_many(t[None], f.values)[0], _scalarize_many(t[None], g.values)[0])
            return MajorizationCertificate(Order.T, Verdict.fails, refuting=t, refuting_margin=margin,
                                           sampler=sampler, notes=("суммы Σf и Σg различаются",))

        reason = self._exact_enabled(space)
        if reason:
            return self._finish_sampled(Order.T, sampler, [reason])

        records: list[ContainmentRecord] = []
        for k in range(1, space.size):
            subsets, g_sums = _subset_sums(g.values, k)
            _, f_sums = _subset_sums(f.values, k)
            a = np.vstack([_params(g_sums).T, np.ones((1, len(subsets)))])
            for s_idx, s in enumerate(subsets):
                b = np.concatenate([linalg.herm_to_params(f_sums[s_idx]), [1.0]])
                res = lp_solve(LpProblem.feasibility(a, b), self.cfg)
                if res.is_optimal:
                    weights = {t: float(w) for t, w in zip(subsets, res.x) if w > 1e-12}
                    records.append(ContainmentRecord(k, s, weights, res.primal_residual))
                    continue
                candidates = [linalg.dual_params_to_herm(res.farkas.y[:-1], d)]
                try:
                    candidates.append(self._max_margin_direction(f_sums[s_idx], g_sums))
                except SolverError as exc:
                    logger.warning("Уточнение направления не удалось: %s", exc.message)
                margin, t = -np.inf, candidates[0]
                for cand in candidates:
                    cand = cand / np.linalg.norm(cand)
                    value = self._violation(
                        space, _scalarize_many(cand[None], f.values)[0], _scalarize_many(cand[None], g.values)[0]
                    )
                    if value > margin:
                        margin, t = value, cand
                if margin <= tol:
                    logger.warning("Направление Фаркаша для k=%d, S=%s не дает опровержения", k, s)
                    continue
                logger.info("f ⊀_T g: опровергающее t, зазор %.4f", margin)
                return MajorizationCertificate(Order.T, Verdict.fails, refuting=t, refuting_margin=margin,
                                               sampler=sampler, containment=tuple(records))
        if sampler.refuted:
            logger.error("Точная проверка ≺_T и случайный поиск расходятся")
            return MajorizationCertificate(
                Order.T, Verdict.fails, refuting=sampler.refuting, refuting_margin=sampler.worst_margin,
                sampler=sampler, containment=tuple(records),
                notes=("случайный поиск опроверг вердикт точной проверки",),
            )
        if len(records) != sum(len(list(itertools.combinations(range(space.size), k))) for k in range(1, space.size)):
            return MajorizationCertificate(Order.T, Verdict.undecided_sampled, sampler=sampler,
                                           containment=tuple(records),
                                           notes=("часть ЛП не дала ни включения, ни проверенного опровержения",))
        return MajorizationCertificate(Order.T, Verdict.holds, containment=tuple(records), sampler=sampler)

    def _max_margin_direction(self, f_sum: np.ndarray, g_sums: np.ndarray) -> np.ndarray:
        """
        max tr(tF_S) − max_T tr(tG_T) при ‖t‖_F ≤ 1; ограничение нормы записано
        блоком Шура [[I, Dy], [(Dy)ᵀ, 1]] ⪰ 0.
        """
        d = f_sum.shape[0]
        p = d * d
        n = p + 1  # параметры t, затем u
        weights = np.concatenate([np.ones(d), np.full(p - d, 1.0 / np.sqrt(2.0))])
        schur_const = np.eye(p + 1)
        schur_coef = np.zeros((n, p + 1, p + 1))
        for j in range(p):
            schur_coef[j, j, p] = schur_coef[j, p, j] = weights[j]
        blocks = [LmiBlock(schur_const, schur_coef, "norm")]
        for i, g_sum in enumerate(g_sums):
            coef = np.zeros((n, 1, 1))
            coef[:p, 0, 0] = -linalg.herm_to_params(g_sum)
            coef[p, 0, 0] = 1.0
            blocks.append(LmiBlock(np.zeros((1, 1)), coef, f"T[{i}]"))
        c = np.concatenate([-linalg.herm_to_params(f_sum), [1.0]])
        result = sdp_solve(SdpProblem(c, tuple(blocks)), cfg=self.cfg)
        return linalg.dual_params_to_herm(result.y[:p], d)

    def _psd_containment(self, f_sum: np.ndarray, g_sums: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """max τ: Σλ_T G_T − F_S ⪰ τI, λ ∈ симплекс. Возвращает τ*, λ и двойственное состояние."""
        count, d = g_sums.shape[0], f_sum.shape[0]
        n = count  # λ_1..λ_{N−1}, τ; λ_N = 1 − Σλ_i
        last = g_sums[-1]
        coef = np.zeros((n, d, d), dtype=np.complex128)
        coef[:count - 1] = g_sums[:-1] - last
        coef[-1] = -np.eye(d)
        blocks = [LmiBlock(linalg.hermitize(last - f_sum), coef, "contain")]
        for i in range(count - 1):
            c1 = np.zeros((n, 1, 1))
            c1[i] = 1.0
            blocks.append(LmiBlock(np.zeros((1, 1)), c1, f"λ[{i}]"))
        c_last = np.zeros((n, 1, 1))
        c_last[:count - 1] = -1.0
        blocks.append(LmiBlock(np.ones((1, 1)), c_last, "λ[last]"))
        c = np.zeros(n)
        c[-1] = -1.0
        result = sdp_solve(SdpProblem(c, tuple(blocks)), cfg=self.cfg)
        lam = np.concatenate([result.y[:-1], [1.0 - result.y[:-1].sum()]])
        return float(result.y[-1]), np.clip(lam, 0.0, None), result.block_duals[0]

    def majorizes_S(self, f: QuantumRandomVariable, g: QuantumRandomVariable,
                    seed: int | None = None) -> MajorizationCertificate:
        f, g = _pair(f, g)
        seed = self.cfg.seed if seed is None else seed
        space, d = f.space, f.dim
        tol = self._tolerance(f, g)
        sampler = self._sample(f, g, generators.sample_states(generators.make_rng(seed), d, self.cfg.state_samples), seed)

        diff = linalg.hermitize(f.values.sum(axis=0) - g.values.sum(axis=0))
        if np.linalg.norm(diff) > tol:
            w, v = linalg.hermitian_eigen(diff)
            vec = v[:, 0] if abs(w[0]) >= abs(w[-1]) else v[:, -1]
            s = np.outer(vec, vec.conj())
            margin = self._violation(space, _scalarize_many(s[None], f.values)[0], _scalarize_many(s[None], g.values)[0])
            return MajorizationCertificate(Order.S, Verdict.fails, refuting=s, refuting_margin=margin,
                                           sampler=sampler, notes=("суммы Σf и Σg различаются",))

        reason = self._exact_enabled(space)
        if reason:
            return self._finish_sampled(Order.S, sampler, [reason])

        records: list[ContainmentRecord] = []
        undecided = False
        sdp_tol = self.cfg.sdp_tol * (1.0 + float(np.abs(f.values).max() + np.abs(g.values).max()))
        for k in range(1, space.size):
            subsets, g_sums = _subset_sums(g.values, k)
            _, f_sums = _subset_sums(f.values, k)
            for s_idx, s in enumerate(subsets):
                tau, lam, dual = self._psd_containment(f_sums[s_idx], g_sums)
                if tau >= -sdp_tol:
                    weights = {t: float(w) for t, w in zip(subsets, lam) if w > 1e-12}
                    records.append(ContainmentRecord(k, s, weights, max(0.0, -tau)))
                    continue
                state = linalg.project_to_state(dual)
                margin = self._violation(
                    space, _scalarize_many(state[None], f.values)[0], _scalarize_many(state[None], g.values)[0]
                )
                if margin <= tol:
                    undecided = True
                    logger.warning("Двойственное состояние для k=%d, S=%s не дает опровержения", k, s)
                    continue
                logger.info("f ⊀_S g: опровергающее состояние, зазор %.4f", margin)
                return MajorizationCertificate(Order.S, Verdict.fails, refuting=state, refuting_margin=margin,
                                               sampler=sampler, containment=tuple(records))
        if sampler.refuted:
            logger.error("SDP-переформулировка ≺_S и случайный поиск состояний расходятся")
            return MajorizationCertificate(
                Order.S, Verdict.fails, refuting=sampler.refuting, refuting_margin=sampler.worst_margin,
                sampler=sampler, containment=tuple(records),
                notes=("случайный поиск опроверг вердикт SDP-проверки",),
            )
        if undecided:
            return MajorizationCertificate(Order.S, Verdict.undecided_sampled, sampler=sampler,
                                           containment=tuple(records))
        return MajorizationCertificate(Order.S, Verdict.holds, containment=tuple(records), sampler=sampler)

    def majorize(self, order: Order, f: QuantumRandomVariable, g: QuantumRandomVariable,
                 seed: int | None = None) -> MajorizationCertificate:
        if order == Order.B:
            return self.majorizes_B(f, g)
        if order == Order.T:
            return self.majorizes_T(f, g, seed)
        return self.majorizes_S(f, g, seed)

    def implication_suite(self, f: QuantumRandomVariable, g: QuantumRandomVariable,
                          seed: int | None = None) -> ImplicationReport:
        report = ImplicationReport(self.majorizes_B(f, g), self.majorizes_T(f, g, seed), self.majorizes_S(f, g, seed))
        if not report.consistent:
            logger.error("Нарушена цепочка ≺ ⇒ ≺_T ⇒ ≺_S: %s", report.verdicts)
        return report

    # --- отделимость ---

    def random_functional(self, rng: np.random.Generator, space: FiniteMeasureSpace, d: int) -> SeparatingFunctional:
        return SeparatingFunctional(space, np.stack([generators.random_hermitian(rng, d) for _ in range(space.size)]))

    def komiya_separate(self, f: QuantumRandomVariable, g: QuantumRandomVariable, seed: int | None = None,
                        trials: int | None = None) -> SeparatingFunctional | None:
        """
        Если f ⊀ g, возвращает φ с Re φ(f) > ψ_φ(g). Иначе проверяет ψ_φ(f) ≤ ψ_φ(g)
        на случайных φ и возвращает None.
        """
        cert = self.majorizes_B(f, g)
        if cert.verdict == Verdict.fails:
            if cert.separation_margin is None or cert.separation_margin <= SEPARATION_MARGIN:
                raise SolverError(f"Отделяющий функционал не прошел проверку: зазор {cert.separation_margin}")
            return cert.separating

        seed = self.cfg.seed if seed is None else seed
        trials = self.cfg.separation_trials if trials is None else trials
        rng = generators.make_rng(seed)
        for _ in range(trials):
            phi = self.random_functional(rng, f.space, f.dim)
            lhs, rhs = self.psi_phi(phi, f), self.psi_phi(phi, g)
            if lhs > rhs + SEPARATION_MARGIN * (1.0 + abs(rhs)):
                raise QrvError(f"ψ_φ(f) = {lhs:.6g} > ψ_φ(g) = {rhs:.6g} при f ≺ g")
        return None
