"""
Линейное программирование в стандартной форме:

    min cᵀx  при  Ax = b, x ≥ 0.

Движок: HiGHS (двойственный симплекс) из scipy. Все возвращаемые сертификаты
(двойственные переменные, лучи Фаркаша, неограниченные лучи) проверяются
независимо перед возвратом.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linprog

from app.core.config import Settings, settings
from app.core.errors import CycleLimit, DimMismatch, NonFiniteEntries, SolverError
from app.middleware.solver_calls import log_solver_call
from app.models.certificates import FarkasCertificate

logger = logging.getLogger(__name__)

HIGHS_METHOD = "highs-ds"
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


class LpStatus(str, enum.Enum):
    optimal = "optimal"
    infeasible = "infeasible"
    unbounded = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        a = np.asarray(self.a_eq, dtype=float).reshape(-1, c.shape[0]) if np.size(self.a_eq) else np.zeros(
            (0, c.shape[0])
        )
        b = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if a.shape != (b.shape[0], c.shape[0]):
            raise DimMismatch(f"Несогласованные размеры задачи ЛП: A {a.shape}, b {b.shape}, c {c.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise NonFiniteEntries("Задача ЛП содержит NaN или Inf")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)

    @classmethod
    def feasibility(cls, a_eq: ArrayLike, b_eq: ArrayLike) -> LpProblem:
        a = np.atleast_2d(np.asarray(a_eq, dtype=float))
        return cls(np.zeros(a.shape[1]), a, b_eq)

    @property
    def size(self) -> int:
        return self.c.shape[0]

    @property
    def scale(self) -> float:
        return 1.0 + max(float(np.max(np.abs(self.b_eq), initial=0.0)), float(np.max(np.abs(self.c), initial=0.0)))


@dataclass(frozen=True, eq=False)
class LpResult:
    status: LpStatus
    x: np.ndarray | None = field(default=None, repr=False)
    y: np.ndarray | None = field(default=None, repr=False)
    value: float | None = None
    farkas: FarkasCertificate | None = None
    ray: np.ndarray | None = field(default=None, repr=False)
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    slackness: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.optimal


def _run(kind_note: str, **kwargs) -> object:
    res = linprog(method=HIGHS_METHOD, options=HIGHS_OPTIONS, **kwargs)
    if res.status == 1:
        raise CycleLimit(f"Достигнут предел итераций симплекс-метода ({kind_note})")
    if res.status == 4:
        raise SolverError(f"Численные трудности в симплекс-методе ({kind_note}): {res.message}")
    return res


def farkas_certificate(a: np.ndarray, b: np.ndarray, tol: float) -> FarkasCertificate:
    """max bᵀy при Aᵀy ≤ 0, ‖y‖₁ ≤ 1; y = y⁺ − y⁻."""
    p = a.shape[0]
    at = a.T
    a_ub = np.vstack([np.hstack([at, -at]), np.ones((1, 2 * p))])
    b_ub = np.concatenate([np.zeros(at.shape[0]), [1.0]])
    res = _run("фаркаш", c=np.concatenate([-b, b]), A_ub=a_ub, b_ub=b_ub, bounds=(0, None))
    if res.status != 0:
        raise SolverError(f"Не удалось построить сертификат Фаркаша: {res.message}")
    y = res.x[:p] - res.x[p:]
    cert = FarkasCertificate(y=y, pairing=float(b @ y), max_violation=float(np.max(at @ y, initial=0.0)))
    if not cert.verify(a, b, tol):
        raise SolverError(
            f"Сертификат Фаркаша не прошел проверку: bᵀy = {cert.pairing:.3e}, max Aᵀy = {cert.max_violation:.3e}"
        )
    return cert


def _unbounded_ray(problem: LpProblem) -> np.ndarray:
    n = problem.size
    res = _run(
        "луч",
        c=problem.c,
        A_eq=problem.a_eq if problem.a_eq.size else None,
        b_eq=np.zeros(problem.a_eq.shape[0]) if problem.a_eq.size else None,
        bounds=(0, 1),
    )
    ray = res.x if res.status == 0 else np.zeros(n)
    if float(problem.c @ ray) >= 0:
        raise SolverError("Не удалось построить луч неограниченности")
    return ray


def lp_solve(problem: LpProblem, cfg: Settings = settings) -> LpResult:
    tol = cfg.lp_tol
    with log_solver_call("lp", problem.size) as call:
        if cfg.debug_dump:
            logger.debug("LP dump: c=%s A=%s b=%s", problem.c.tolist(), problem.a_eq.tolist(), problem.b_eq.tolist())
        a_eq = problem.a_eq if problem.a_eq.shape[0] else None
        b_eq = problem.b_eq if problem.a_eq.shape[0] else None
        res = _run("основная задача", c=problem.c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None))

        if res.status == 2:
            # HiGHS сообщает «неограничена или несовместна» одним статусом
            feasible = _run("допустимость", c=np.zeros(problem.size), A_eq=a_eq, b_eq=b_eq, bounds=(0, None))
            if feasible.status == 0:
                res = feasible
                res.status = 3

        if res.status == 2:
            call.status = LpStatus.infeasible.value
            cert = farkas_certificate(problem.a_eq, problem.b_eq, tol)
            logger.debug("ЛП несовместна, bᵀy = %.3e", cert.pairing)
            return LpResult(status=LpStatus.infeasible, farkas=cert)

        if res.status == 3:
            call.status = LpStatus.unbounded.value
            return LpResult(status=LpStatus.unbounded, ray=_unbounded_ray(problem))

        x = np.clip(res.x, 0.0, None)
        if problem.a_eq.shape[0]:
            y = np.asarray(res.eqlin.marginals, dtype=float)
        else:
            y = np.zeros(0)
        reduced = problem.c - problem.a_eq.T @ y
        primal_residual = float(np.max(np.abs(problem.a_eq @ x - problem.b_eq), initial=0.0))
        dual_residual = float(np.max(-reduced, initial=0.0))
        slackness = float(abs(x @ reduced))
        scale = problem.scale
        if max(primal_residual, dual_residual, slackness) > tol * scale * 100:
            call.status = "uncertified"
            raise SolverError(
                f"Невязки ЛП превышают допуск: primal={primal_residual:.2e} dual={dual_residual:.2e} "
                f"slackness={slackness:.2e}"
            )
        call.status = LpStatus.optimal.value
        return LpResult(
            status=LpStatus.optimal,
            x=x,
            y=y,
            value=float(problem.c @ x),
            primal_residual=primal_residual,
            dual_residual=dual_residual,
            slackness=slackness,
        )
