"""
Полуопределенное программирование в форме линейных матричных неравенств:

    min cᵀy  при  F_b(y) = F0_b + Σᵢ yᵢ F_{b,i} ⪰ 0  для каждого блока b.

Эрмитовы блоки с ненулевой мнимой частью передаются решателю через
вещественное вложение [[Re, −Im], [Im, Re]]; двойственный блок Z_b ⪰ 0
восстанавливается обратно в комплексную форму. Двойственная оценка
−Σ tr(Z_b F0_b) и невязка cᵢ − Σ tr(Z_b F_{b,i}) считаются по исходным данным.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import cvxpy as cp
import numpy as np

from app.core.config import Settings, settings
from app.core.errors import DimMismatch, NonFiniteEntries, NotHermitian, SolverStall
from app.middleware.solver_calls import log_solver_call
from app.utils import linalg

logger = logging.getLogger(__name__)

FALLBACK_SOLVER = "SCS"
ACCEPTED_STATUSES = (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)


@dataclass(frozen=True, eq=False)
class LmiBlock:
    constant: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    name: str = ""

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    @property
    def is_complex(self) -> bool:
        return bool(np.any(self.constant.imag != 0) or np.any(self.coefficients.imag != 0))

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        return linalg.hermitize(self.constant + np.tensordot(y, self.coefficients, axes=(0, 0)))


@dataclass(frozen=True, eq=False)
class SdpProblem:
    c: np.ndarray
    blocks: tuple[LmiBlock, ...]

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        if n == 0:
            raise DimMismatch("Задача SDP должна иметь хотя бы одну переменную")
        blocks = []
        for blk in self.blocks:
            f0 = np.asarray(blk.constant, dtype=np.complex128)
            fi = np.asarray(blk.coefficients, dtype=np.complex128)
            k = f0.shape[0]
            if f0.shape != (k, k) or fi.shape != (n, k, k) or k == 0:
                raise DimMismatch(f"Блок {blk.name!r}: несогласованные размеры {f0.shape}, {fi.shape}")
            if not (np.all(np.isfinite(f0)) and np.all(np.isfinite(fi))):
                raise NonFiniteEntries(f"Блок {blk.name!r} содержит NaN или Inf")
            if not linalg.is_hermitian(f0) or not all(linalg.is_hermitian(m) for m in fi):
                raise NotHermitian(f"Блок {blk.name!r} не эрмитов")
            blocks.append(LmiBlock(f0, fi, blk.name))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def size(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True, eq=False)
class SdpResult:
    y: np.ndarray = field(repr=False)
    value: float
    block_duals: tuple[np.ndarray, ...] = field(repr=False)
    dual_value: float
    dual_residual: float
    primal_infeasibility: float
    solver: str
    status: str

    @property
    def gap(self) -> float:
        return self.value - self.dual_value


def _real_form(block: LmiBlock) -> tuple[np.ndarray, np.ndarray]:
    if block.is_complex:
        return linalg.embed_real(block.constant), np.stack([linalg.embed_real(f) for f in block.coefficients])
    return block.constant.real.copy(), block.coefficients.real.copy()


def _solver_chain(cfg: Settings) -> Sequence[str]:
    primary = cfg.sdp_solver.upper()
    return (primary,) if primary == FALLBACK_SOLVER else (primary, FALLBACK_SOLVER)


def _dual_block(block: LmiBlock, dual: np.ndarray | None) -> np.ndarray:
    size = 2 * block.dim if block.is_complex else block.dim
    y = np.zeros((size, size)) if dual is None else np.asarray(dual, dtype=float).reshape(size, size)
    y = (y + y.T) / 2
    # отрицательная часть: шум решателя
    w, v = np.linalg.eigh(y)
    y = (v * np.clip(w, 0.0, None)) @ v.T
    return linalg.unembed_dual(y) if block.is_complex else y.astype(np.complex128)


def sdp_solve(problem: SdpProblem, tol: float | None = None, cfg: Settings = settings) -> SdpResult:
    tol = cfg.sdp_tol if tol is None else tol
    n = problem.size
    with log_solver_call("sdp", n) as call:
        y = cp.Variable(n)
        constraints = []
        for blk in problem.blocks:
            f0, fi = _real_form(blk)
            k2 = f0.shape[0]
            coeff = fi.reshape(n, k2 * k2).T
            expr = cp.reshape(coeff @ y + f0.ravel(), (k2, k2), order="C")
            constraints.append((expr + expr.T) / 2 >> 0)
        prob = cp.Problem(cp.Minimize(problem.c @ y), constraints)
        if cfg.debug_dump:
            logger.debug("SDP dump: c=%s blocks=%s", problem.c.tolist(), [b.dim for b in problem.blocks])

        used = ""
        for name in _solver_chain(cfg):
            try:
                prob.solve(solver=name)
            except (cp.error.SolverError, ValueError) as exc:
                logger.warning("Решатель SDP %s завершился с ошибкой: %s", name, exc)
                continue
            used = name
            if prob.status in ACCEPTED_STATUSES:
                break
            logger.warning("Решатель SDP %s вернул статус %s", name, prob.status)

        call.status = str(prob.status)
        if prob.status not in ACCEPTED_STATUSES or y.value is None:
            raise SolverStall(f"SDP не решена: статус {prob.status}", gap=float("inf"))
        if prob.status == cp.OPTIMAL_INACCURATE:
            logger.warning("Решатель SDP %s вернул неточное решение", used)

        y_val = np.asarray(y.value, dtype=float)
        duals = tuple(_dual_block(b, con.dual_value) for b, con in zip(problem.blocks, constraints))
        dual_value = -sum(linalg.trace_pairing(z, b.constant).real for z, b in zip(duals, problem.blocks))
        pairings = np.array(
            [sum(linalg.trace_pairing(z, b.coefficients[i]).real for z, b in zip(duals, problem.blocks)) for i in range(n)]
        )
        dual_residual = float(np.max(np.abs(problem.c - pairings), initial=0.0))
        infeasibility = max(
            (max(0.0, -float(np.linalg.eigvalsh(b.evaluate(y_val))[0])) for b in problem.blocks), default=0.0
        )
        result = SdpResult(
            y=y_val,
            value=float(problem.c @ y_val),
            block_duals=duals,
            dual_value=float(dual_value),
            dual_residual=dual_residual,
            primal_infeasibility=infeasibility,
            solver=used,
            status=str(prob.status),
        )
        scale = 1.0 + abs(result.value)
        if result.gap > tol * scale or result.dual_residual > tol * (1.0 + float(np.max(np.abs(problem.c)))):
            call.status = "stall"
            raise SolverStall(
                f"Зазор SDP {result.gap:.3e} (невязка {result.dual_residual:.3e}) превышает допуск {tol:.1e}",
                gap=result.gap,
                best=result,
            )
        return result
