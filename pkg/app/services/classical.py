from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linear_sum_assignment

from app.core.config import Settings, settings
from app.core.errors import MassMismatch, NotDoublyStochastic, NotUniform, SpaceMismatch
from app.models.certificates import FarkasCertificate
from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace, StepFunction
from app.solvers.lp import LpProblem, lp_solve

logger = logging.getLogger(__name__)

MASS_TOL = 1e-9
# Элементы остатка ниже порога считаются нулем при разложении Биркгофа
BIRKHOFF_EPS = 1e-12

ConvexFunction = Callable[[np.ndarray], np.ndarray]


def rearrange(values: np.ndarray, masses: np.ndarray) -> StepFunction:
    """f↓ по значениям и массам атомов; равные соседние значения склеиваются."""
    order = np.argsort(-values, kind="stable")
    vals, widths = values[order], masses[order]
    keep = np.concatenate([[True], vals[1:] != vals[:-1]])
    groups = np.cumsum(keep) - 1
    merged = np.zeros(int(keep.sum()))
    np.add.at(merged, groups, widths)
    return StepFunction(widths=merged, values=vals[keep])


def majorization_violation(f_vals: np.ndarray, f_masses: np.ndarray, g_vals: np.ndarray,
                           g_masses: np.ndarray) -> float:
    """max(∫₀ᵗ f↓ − ∫₀ᵗ g↓, |∫f − ∫g|) по точкам излома обеих функций; f ≺ g ⟺ результат ≤ 0."""
    sf, sg = rearrange(f_vals, f_masses), rearrange(g_vals, g_masses)
    knots = np.union1d(sf.breakpoints(), sg.breakpoints())
    diff = sf.cumulative(knots) - sg.cumulative(knots)
    return float(max(diff.max(initial=0.0), abs(diff[-1])))


def uniform_violation(f_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
    """То же для пачки строк при равных массах, в единицах сумм по подмножествам."""
    fs = np.cumsum(-np.sort(-f_vals, axis=-1), axis=-1)
    gs = np.cumsum(-np.sort(-g_vals, axis=-1), axis=-1)
    diff = fs - gs
    return np.maximum(diff[..., :-1].max(axis=-1, initial=0.0), np.abs(diff[..., -1]))


def bistochastic_system(space: FiniteMeasureSpace, g_par: np.ndarray, f_par: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Ограничения на B (построчно, B[x, y] → x·m + y): B ≥ 0, B·1 = 1, μᵀB = μᵀ,
    Σ_y B[x, y]·g_par[y] = f_par[x] для каждой координаты.
    """
    m = space.size
    mu = space.masses
    p = g_par.shape[1]
    rows = np.kron(np.eye(m), np.ones((1, m)))
    cols = np.kron(mu[None, :], np.eye(m))
    data = np.kron(np.eye(m), g_par.T)
    a = np.vstack([rows, cols, data])
    b = np.concatenate([np.ones(m), mu, f_par.reshape(m * p)])
    return a, b


def _complex_params(values: np.ndarray) -> np.ndarray:
    return np.stack([values.real, values.imag], axis=1)


class ClassicalService:
    def __init__(self, cfg: Settings = settings):
        self.cfg = cfg

    def distribution_function(self, f: ClassicalFunction, s: float) -> float:
        vals = f.real_values()
        return float(f.space.masses[vals > s].sum())

    def decreasing_rearrangement(self, f: ClassicalFunction) -> StepFunction:
        return rearrange(f.real_values(), f.space.masses)

    def classical_majorizes(self, f: ClassicalFunction, g: ClassicalFunction) -> bool:
        """f ≺ g; пространства могут различаться, но полные массы должны совпадать."""
        fv, gv = f.real_values(), g.real_values()
        if abs(f.space.total_mass - g.space.total_mass) > MASS_TOL:
            raise MassMismatch(f"Полные массы различаются: {f.space.total_mass} и {g.space.total_mass}")
        scale = 1.0 + float(np.abs(fv) @ f.space.masses + np.abs(gv) @ g.space.masses)
        return majorization_violation(fv, f.space.masses, gv, g.space.masses) <= MASS_TOL * scale

    def bistochastic_witness(self, f: ClassicalFunction, g: ClassicalFunction) -> BistochasticMatrix | FarkasCertificate:
        """B с Bg = f либо сертификат Фаркаша несовместности."""
        if not f.space.same_as(g.space):
            raise SpaceMismatch("Свидетель строится только на общем пространстве")
        space = f.space
        a, b = bistochastic_system(space, _complex_params(g.values), _complex_params(f.values))
        res = lp_solve(LpProblem.feasibility(a, b), self.cfg)
        if not res.is_optimal:
            logger.info("Бистохастического B с Bg = f не существует")
            return res.farkas
        m = space.size
        witness = BistochasticMatrix(space, res.x.reshape(m, m))
        return witness

    def birkhoff_decompose(self, b: BistochasticMatrix) -> list[tuple[float, tuple[int, ...]]]:
        space = b.space
        if not space.is_uniform():
            raise NotUniform("Разложение Биркгофа определено только для равных масс атомов")
        m = space.size
        rest = b.matrix.copy()
        perms: list[tuple[int, ...]] = []
        weights: list[float] = []
        while rest.max(initial=0.0) > BIRKHOFF_EPS and len(perms) < m * m:
            support = rest > BIRKHOFF_EPS
            cost = np.where(support, -np.log(np.where(support, rest, 1.0)), 1e6)
            rows, cols = linear_sum_assignment(cost)
            if not np.all(support[rows, cols]):
                break
            w = float(rest[rows, cols].min())
            rest[rows, cols] -= w
            rest[rest < BIRKHOFF_EPS] = 0.0
            perms.append(tuple(int(c) for c in cols))
            weights.append(w)
        residual = float(np.abs(rest).max(initial=0.0))
        if residual > 1e-8:
            raise NotDoublyStochastic(f"Остаток разложения Биркгофа {residual:.2e}")
        weights_arr = np.array(weights)
        weights_arr, perms = self._caratheodory(weights_arr, perms, m)
        weights_arr = weights_arr / weights_arr.sum()
        logger.debug("Разложение Биркгофа: %d перестановок", len(perms))
        return [(float(w), p) for w, p in zip(weights_arr, perms)]

    @staticmethod
    def _caratheodory(weights: np.ndarray, perms: list[tuple[int, ...]], m: int) -> tuple[np.ndarray, list]:
        """Сокращение числа перестановок до (m−1)² + 1 по теореме Каратеодори."""
        limit = (m - 1) ** 2 + 1
        while len(perms) > limit:
            mats = np.stack([np.eye(m)[list(p)].reshape(-1) for p in perms], axis=1)
            system = np.vstack([mats, np.ones((1, len(perms)))])
            kernel = null_space(system)
            if kernel.shape[1] == 0:
                break
            c = kernel[:, 0]
            if not np.any(c > 1e-12):
                c = -c
            pos = c > 1e-12
            theta = float(np.min(weights[pos] / c[pos]))
            weights = weights - theta * c
            keep = weights > 1e-14
            weights = weights[keep]
            perms = [p for p, k in zip(perms, keep) if k]
        return weights, perms

    def convex_function_test(self, f: ClassicalFunction, g: ClassicalFunction,
                             family: Sequence[ConvexFunction] | None = None) -> bool:
        fv, gv = f.real_values(), g.real_values()
        if family is None:
            family = self.hinge_family(np.concatenate([fv, gv]))
        scale = 1.0 + float(np.abs(fv) @ f.space.masses + np.abs(gv) @ g.space.masses)
        for psi in family:
            lhs = float(np.asarray(psi(fv)) @ f.space.masses)
            rhs = float(np.asarray(psi(gv)) @ g.space.masses)
            if lhs > rhs + MASS_TOL * scale:
                return False
        return True

    @staticmethod
    def hinge_family(points: np.ndarray) -> list[ConvexFunction]:
        """t ↦ max(t − c, 0) во всех точках c и ±t (равенство интегралов)."""
        family: list[ConvexFunction] = [lambda t: t, lambda t: -t]
        for c in np.unique(points):
            family.append(lambda t, c=c: np.maximum(t - c, 0.0))
        return family

    def composition_operator(self, space: FiniteMeasureSpace, sigma: Sequence[int]) -> BistochasticMatrix:
        """(C_σ f)(x) = f(σ(x)) для перестановки σ, сохраняющей массы."""
        perm = np.asarray(sigma, dtype=int)
        m = space.size
        if sorted(perm.tolist()) != list(range(m)):
            raise SpaceMismatch("σ не является перестановкой атомов")
        if not np.allclose(space.masses[perm], space.masses, atol=1e-12, rtol=0):
            raise SpaceMismatch("Перестановка не сохраняет массы атомов")
        return BistochasticMatrix(space, np.eye(m)[perm])

    def permutation_mixture(self, b: BistochasticMatrix) -> list[tuple[float, BistochasticMatrix]]:
        return [(w, self.composition_operator(b.space, p)) for w, p in self.birkhoff_decompose(b)]
