import numpy as np
import pytest

from app.core.errors import (
    DimMismatch,
    MatrixNotPsd,
    NotDoublyStochastic,
    NotSelfAdjoint,
    QrvValidationError,
    SpaceMismatch,
)
from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable


class TestSpace:
    def test_masses_must_be_positive(self):
        with pytest.raises(QrvValidationError):
            FiniteMeasureSpace(("a", "b"), np.array([1.0, 0.0]))

    def test_duplicate_atoms(self):
        """Метки атомов уникальны."""
        with pytest.raises(QrvValidationError):
            FiniteMeasureSpace(("a", "a"), np.array([1.0, 1.0]))

    def test_uniform_flag(self):
        assert FiniteMeasureSpace.uniform(3, 0.5).is_uniform()
        assert not FiniteMeasureSpace.from_masses([0.5, 0.25]).is_uniform()

    def test_require_same(self):
        with pytest.raises(SpaceMismatch):
            FiniteMeasureSpace.uniform(2).require_same(FiniteMeasureSpace.uniform(3))


class TestBistochastic:
    def test_row_sums(self):
        """Суммы строк должны быть равны 1."""
        with pytest.raises(NotDoublyStochastic):
            BistochasticMatrix(FiniteMeasureSpace.uniform(2), np.array([[1.0, 0.5], [0.0, 0.5]]))

    def test_integral_preserved_with_masses(self):
        """При неравных массах требуется μᵀB = μᵀ."""
        space = FiniteMeasureSpace.from_masses([1.0, 2.0])
        with pytest.raises(NotDoublyStochastic):
            BistochasticMatrix(space, np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert np.allclose(BistochasticMatrix.averaging(space).matrix, [[1 / 3, 2 / 3], [1 / 3, 2 / 3]])

    def test_apply_entrywise(self):
        """Бистохастический оператор действует на матричные значения поэлементно."""
        space = FiniteMeasureSpace.uniform(2)
        b = BistochasticMatrix.averaging(space)
        values = np.stack([np.diag([2.0, 0.0]), np.diag([0.0, 2.0])])
        assert np.allclose(b.apply(values), np.stack([np.eye(2), np.eye(2)]))


class TestPovmAndQrv:
    def test_effect_must_be_psd(self, uniform2):
        with pytest.raises(MatrixNotPsd):
            Povm(uniform2, np.stack([np.eye(2), np.diag([1.0, -1.0])]))

    def test_scalar_povm(self, uniform2):
        povm = Povm.scalar(uniform2, 2)
        assert povm.is_scalar()
        assert np.allclose(povm.total(), 2 * np.eye(2))
        assert not povm.is_normalized()
        assert np.allclose(povm.measure(["0"]), np.eye(2))

    def test_null_atoms(self, uniform2):
        povm = Povm(uniform2, np.stack([np.eye(2), np.zeros((2, 2))]))
        assert povm.null_atoms.tolist() == [False, True]

    def test_small_effect_not_null(self, uniform2):
        """Порог нулевого эффекта относителен: 1e-10·I не обнуляется."""
        povm = Povm(uniform2, np.stack([np.eye(2), 1e-10 * np.eye(2)]))
        assert povm.null_atoms.tolist() == [False, False]

    def test_shape_checked(self, uniform2):
        with pytest.raises(DimMismatch):
            QuantumRandomVariable(uniform2, np.zeros((3, 2, 2)))

    def test_arithmetic_and_adjoint(self, uniform2):
        f = QuantumRandomVariable(uniform2, np.stack([[[0, 1j], [0, 0]], [[1, 0], [0, 1]]]))
        g = f + f.adjoint()
        assert g.is_self_adjoint()
        assert np.allclose((2 * f - f).values, f.values)
        assert np.allclose(f.real_part().values + 1j * f.imag_part().values, f.values)

    def test_abs_requires_self_adjoint(self, uniform2):
        f = QuantumRandomVariable(uniform2, np.stack([[[0, 1], [0, 0]], np.eye(2)]))
        with pytest.raises(NotSelfAdjoint):
            f.abs()

    def test_restrict(self, uniform2):
        f = QuantumRandomVariable.identity(uniform2, 2)
        assert np.allclose(f.restrict([True, False]).values[1], 0.0)

    def test_state_trace(self):
        with pytest.raises(QrvValidationError):
            State(np.diag([0.5, 0.4]))
        assert State.maximally_mixed(3).is_full_rank()
        assert not State.pure([1.0, 0.0]).is_full_rank()


class TestClassicalFunction:
    def test_complex_values_rejected_by_real_values(self, uniform2):
        f = ClassicalFunction(uniform2, np.array([1.0, 1j]))
        assert not f.is_real()
        with pytest.raises(QrvValidationError):
            f.real_values()

    def test_integral_and_sup(self):
        space = FiniteMeasureSpace.from_masses([0.5, 1.5])
        f = ClassicalFunction.real(space, [2.0, -4.0])
        assert f.integral() == pytest.approx(-5.0)
        assert f.sup_norm() == pytest.approx(4.0)
