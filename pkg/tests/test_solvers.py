import logging

import numpy as np
import pytest
from scipy.optimize import OptimizeResult

from app.core.errors import DimMismatch, NonFiniteEntries, NotHermitian, SolverError, SolverStall
from app.middleware.solver_calls import log_solver_call
from app.solvers import lp
from app.solvers.lp import LpProblem, LpStatus, lp_solve
from app.solvers.sdp import LmiBlock, SdpProblem, sdp_solve
from scripts.analyze_solver_usage import analyze_logs


class TestLp:
    def test_optimal_with_duals(self, cfg):
        """min x₁ + 2x₂ при x₁ + x₂ = 1: x = (1, 0), двойственная y = 1."""
        res = lp_solve(LpProblem(np.array([1.0, 2.0]), np.array([[1.0, 1.0]]), np.array([1.0])), cfg)
        assert res.status == LpStatus.optimal
        assert res.value == pytest.approx(1.0)
        assert np.allclose(res.x, [1.0, 0.0], atol=1e-9)
        assert np.allclose(res.y, [1.0], atol=1e-9)
        assert res.slackness == pytest.approx(0.0, abs=1e-9)

    def test_infeasible_gives_farkas(self, cfg):
        """x₁ + x₂ = −1 при x ≥ 0 несовместна."""
        a, b = np.array([[1.0, 1.0]]), np.array([-1.0])
        res = lp_solve(LpProblem.feasibility(a, b), cfg)
        assert res.status == LpStatus.infeasible
        assert res.farkas is not None
        assert res.farkas.verify(a, b, cfg.lp_tol)

    def test_unbounded_gives_ray(self, cfg):
        """min −x₁ при x₁ − x₂ = 0 неограничена; луч r ≥ 0, Ar = 0, cᵀr < 0."""
        a = np.array([[1.0, -1.0]])
        problem = LpProblem(np.array([-1.0, 0.0]), a, np.array([0.0]))
        res = lp_solve(problem, cfg)
        assert res.status == LpStatus.unbounded
        assert np.all(res.ray >= 0)
        assert np.allclose(a @ res.ray, 0.0, atol=1e-9)
        assert float(problem.c @ res.ray) < 0

    def test_shapes_checked(self):
        with pytest.raises(DimMismatch):
            LpProblem(np.zeros(2), np.zeros((1, 2)), np.zeros(2))

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteEntries):
            LpProblem(np.array([np.nan, 0.0]), np.zeros((1, 2)), np.zeros(1))

    def test_large_residuals_rejected(self, cfg, monkeypatch):
        """Оптимум HiGHS с невязкой Ax − b выше допуска не возвращается как решение."""
        bad = OptimizeResult(status=0, x=np.array([0.5, 0.0]), eqlin=OptimizeResult(marginals=np.array([1.0])),
                             message="")
        monkeypatch.setattr(lp, "linprog", lambda **kwargs: bad)
        with pytest.raises(SolverError, match="Невязки ЛП"):
            lp_solve(LpProblem(np.array([1.0, 2.0]), np.array([[1.0, 1.0]]), np.array([1.0])), cfg)


class TestSolverCallLog:
    @pytest.fixture
    def records(self, caplog):
        solver_logger = logging.getLogger("solver_usage")
        solver_logger.addHandler(caplog.handler)
        caplog.set_level(logging.INFO, logger="solver_usage")
        # caplog пересоздаёт список записей в начале каждой фазы теста, поэтому читаем его лениво
        class _Records:
            def __getitem__(self, i):
                return caplog.records[i]

            def __len__(self):
                return len(caplog.records)

        yield _Records()
        solver_logger.removeHandler(caplog.handler)

    def test_status_set_before_exception_kept(self, records):
        """Статус "stall", проставленный до исключения, не заменяется на "error"."""
        with pytest.raises(SolverStall):
            with log_solver_call("sdp", 3) as call:
                call.status = "stall"
                raise SolverStall("зазор не закрыт", gap=1e-3, best=None)
        assert "status=stall" in records[-1].getMessage()

    def test_unset_status_becomes_error(self, records):
        with pytest.raises(RuntimeError):
            with log_solver_call("lp", 2):
                raise RuntimeError("сбой")
        assert "status=error" in records[-1].getMessage()

    def test_uncertified_lp_logged(self, cfg, records, monkeypatch):
        bad = OptimizeResult(status=0, x=np.array([0.5, 0.0]), eqlin=OptimizeResult(marginals=np.array([1.0])),
                             message="")
        monkeypatch.setattr(lp, "linprog", lambda **kwargs: bad)
        with pytest.raises(SolverError):
            lp_solve(LpProblem(np.array([1.0, 2.0]), np.array([[1.0, 1.0]]), np.array([1.0])), cfg)
        assert "status=uncertified" in records[-1].getMessage()


class TestSdp:
    def test_minimal_eigenvalue(self, cfg):
        """max t при A − tI ⪰ 0 равен λ_min(A); двойственная: проектор на собственный вектор."""
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        block = LmiBlock(a, -np.eye(2)[None, :, :], "eig")
        res = sdp_solve(SdpProblem(np.array([-1.0]), (block,)), cfg=cfg)
        assert res.y[0] == pytest.approx(1.0, abs=1e-5)
        assert res.dual_value == pytest.approx(-1.0, abs=1e-5)
        z = res.block_duals[0]
        assert np.trace(z).real == pytest.approx(1.0, abs=1e-5)
        assert np.allclose(z, np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-4)

    def test_complex_block(self, cfg):
        """Комплексный эрмитов блок решается через вещественное вложение."""
        a = np.array([[1.0, 1j], [-1j, 1.0]])
        block = LmiBlock(a, -np.eye(2, dtype=np.complex128)[None, :, :], "complex")
        res = sdp_solve(SdpProblem(np.array([-1.0]), (block,)), cfg=cfg)
        assert res.y[0] == pytest.approx(0.0, abs=1e-5)
        assert res.gap == pytest.approx(0.0, abs=1e-5)

    def test_non_hermitian_block(self):
        block = LmiBlock(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((1, 2, 2)), "bad")
        with pytest.raises(NotHermitian):
            SdpProblem(np.array([1.0]), (block,))

    def test_no_variables(self):
        with pytest.raises(DimMismatch):
            SdpProblem(np.zeros(0), ())


class TestSolverUsageLog:
    def test_analyze_logs(self, tmp_path):
        """Строки SOLVER_CALL группируются по виду и статусу."""
        log = tmp_path / "solver_usage.log"
        log.write_text(
            "2024-06-11 - solver_usage - INFO - SOLVER_CALL kind=lp status=optimal size=4 duration=0.0100\n"
            "2024-06-11 - solver_usage - INFO - SOLVER_CALL kind=lp status=optimal size=9 duration=0.0200\n"
            "2024-06-11 - solver_usage - INFO - SOLVER_CALL kind=sdp status=error size=3 duration=0.5000\n"
            "посторонняя строка\n",
            encoding="utf-8",
        )
        stats = analyze_logs(log)
        assert stats[("lp", "optimal")][0] == 2
        assert stats[("lp", "optimal")][1] == pytest.approx(0.03)
        assert stats[("sdp", "error")] == (1, 0.5)

    def test_missing_log(self, tmp_path):
        assert analyze_logs(tmp_path / "nope.log") is None
