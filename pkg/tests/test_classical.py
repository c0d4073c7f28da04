import numpy as np
import pytest

from app.core.errors import MassMismatch, NotUniform, SpaceMismatch
from app.models.certificates import FarkasCertificate
from app.models.measure import BistochasticMatrix, ClassicalFunction, FiniteMeasureSpace
from app.services.classical import ClassicalService, bistochastic_system, majorization_violation, rearrange
from app.services.generators import random_bistochastic, random_scalar


@pytest.fixture
def svc(cfg) -> ClassicalService:
    return ClassicalService(cfg)


class TestRearrangement:
    def test_equal_values_merged(self):
        """Равные значения склеиваются в одну ступень."""
        step = rearrange(np.array([1.0, 3.0, 3.0, 2.0]), np.ones(4))
        assert step.steps == [(2.0, 3.0), (1.0, 2.0), (1.0, 1.0)]
        assert step.total_width == pytest.approx(4.0)

    def test_cumulative_and_evaluate(self):
        step = rearrange(np.array([1.0, 4.0]), np.array([2.0, 0.5]))
        assert step.evaluate(0.0) == pytest.approx(4.0)
        assert step.evaluate(1.0) == pytest.approx(1.0)
        assert step.cumulative([0.5, 2.5]).tolist() == pytest.approx([2.0, 4.0])

    def test_integral_preserved(self, svc):
        """Перестановка по убыванию сохраняет интеграл."""
        f = ClassicalFunction.real(FiniteMeasureSpace.from_masses([0.5, 1.0, 2.0]), [-1.0, 2.0, 0.5])
        step = svc.decreasing_rearrangement(f)
        assert [v for _, v in step.steps] == [2.0, 0.5, -1.0]
        assert step.cumulative([3.5]).tolist() == pytest.approx([2.5], abs=1e-12)

    def test_distribution_function(self, svc):
        f = ClassicalFunction.real(FiniteMeasureSpace.uniform(3, 0.5), [1.0, 2.0, 3.0])
        assert svc.distribution_function(f, 1.5) == pytest.approx(1.0)


class TestClassicalMajorization:
    def test_constant_below_spike(self, svc):
        """(1, 1, 1) ≺ (3, 0, 0), но не наоборот."""
        space = FiniteMeasureSpace.uniform(3)
        flat = ClassicalFunction.real(space, [1.0, 1.0, 1.0])
        spike = ClassicalFunction.real(space, [3.0, 0.0, 0.0])
        assert svc.classical_majorizes(flat, spike)
        assert not svc.classical_majorizes(spike, flat)

    def test_different_spaces_same_mass(self, svc):
        """Сравнение по перестановкам работает и для разных пространств одной массы."""
        f = ClassicalFunction.real(FiniteMeasureSpace.uniform(1, 2.0), [1.0])
        g = ClassicalFunction.real(FiniteMeasureSpace.uniform(2), [2.0, 0.0])
        assert svc.classical_majorizes(f, g)
        assert majorization_violation(g.real_values(), g.space.masses, f.real_values(), f.space.masses) > 0

    def test_mass_mismatch(self, svc):
        f = ClassicalFunction.real(FiniteMeasureSpace.uniform(2), [1.0, 1.0])
        g = ClassicalFunction.real(FiniteMeasureSpace.uniform(3), [1.0, 1.0, 0.0])
        with pytest.raises(MassMismatch):
            svc.classical_majorizes(f, g)

    def test_hinge_test_agrees(self, svc, rng):
        """Тест выпуклыми функциями совпадает с ЛП и с перестановками на 200 парах."""
        for k in range(200):
            space = FiniteMeasureSpace.uniform(int(rng.integers(2, 7)))
            g = random_scalar(rng, space)
            if k % 2 == 0:
                f = ClassicalFunction(space, random_bistochastic(rng, space).apply(g.values))
            else:
                f = random_scalar(rng, space)
            by_hinge = svc.convex_function_test(f, g)
            by_lp = isinstance(svc.bistochastic_witness(f, g), BistochasticMatrix)
            assert by_hinge == by_lp == svc.classical_majorizes(f, g)
            if k % 2 == 0:
                assert by_hinge


class TestWitness:
    def test_witness_maps_g_to_f(self, svc):
        space = FiniteMeasureSpace.uniform(3)
        f = ClassicalFunction.real(space, [1.0, 1.0, 1.0])
        g = ClassicalFunction.real(space, [3.0, 0.0, 0.0])
        b = svc.bistochastic_witness(f, g)
        assert isinstance(b, BistochasticMatrix)
        assert np.allclose(b.apply(g.values), f.values, atol=1e-8)

    def test_farkas_when_not_majorized(self, svc):
        """Без мажорирования возвращается проверяемый сертификат Фаркаша."""
        space = FiniteMeasureSpace.uniform(3)
        f = ClassicalFunction.real(space, [3.0, 0.0, 0.0])
        g = ClassicalFunction.real(space, [1.0, 1.0, 1.0])
        cert = svc.bistochastic_witness(f, g)
        assert isinstance(cert, FarkasCertificate)
        a, b = bistochastic_system(
            space,
            np.stack([g.values.real, g.values.imag], axis=1),
            np.stack([f.values.real, f.values.imag], axis=1),
        )
        assert cert.verify(a, b, 1e-8)

    def test_witness_needs_common_space(self, svc):
        f = ClassicalFunction.real(FiniteMeasureSpace.uniform(2), [1.0, 1.0])
        g = ClassicalFunction.real(FiniteMeasureSpace.uniform(2, 1.0 + 1e-6), [1.0, 1.0])
        with pytest.raises(SpaceMismatch):
            svc.bistochastic_witness(f, g)


class TestBirkhoff:
    def test_decomposition_reconstructs(self, svc, rng):
        """Не более (m−1)²+1 перестановок, сумма весов 1, B восстанавливается."""
        space = FiniteMeasureSpace.uniform(4)
        b = random_bistochastic(rng, space, terms=20)
        parts = svc.birkhoff_decompose(b)
        assert len(parts) <= 10
        assert sum(w for w, _ in parts) == pytest.approx(1.0)
        rebuilt = sum(w * np.eye(4)[list(p)] for w, p in parts)
        assert np.allclose(rebuilt, b.matrix, atol=1e-8)

    def test_random_five_by_five(self, svc, rng):
        """50 случайных бистохастических 5×5: не более 17 перестановок, точное восстановление."""
        space = FiniteMeasureSpace.uniform(5)
        for _ in range(50):
            b = random_bistochastic(rng, space, terms=30)
            parts = svc.birkhoff_decompose(b)
            assert len(parts) <= 17
            assert sum(w for w, _ in parts) == pytest.approx(1.0)
            rebuilt = sum(w * np.eye(5)[list(p)] for w, p in parts)
            assert np.allclose(rebuilt, b.matrix, atol=1e-8)

    def test_averaging_matrix(self, svc):
        space = FiniteMeasureSpace.uniform(3)
        mixture = svc.permutation_mixture(BistochasticMatrix.averaging(space))
        rebuilt = sum(w * op.matrix for w, op in mixture)
        assert np.allclose(rebuilt, np.full((3, 3), 1 / 3), atol=1e-9)

    def test_needs_uniform_masses(self, svc):
        space = FiniteMeasureSpace.from_masses([1.0, 2.0])
        with pytest.raises(NotUniform):
            svc.birkhoff_decompose(BistochasticMatrix.identity(space))


class TestComposition:
    def test_permutation_applied(self, svc):
        """(C_σ f)(x) = f(σ(x))."""
        space = FiniteMeasureSpace.uniform(3)
        op = svc.composition_operator(space, [2, 0, 1])
        assert op.apply(np.array([10.0, 20.0, 30.0])).tolist() == [30.0, 10.0, 20.0]

    def test_mass_changing_permutation(self, svc):
        """Перестановка, не сохраняющая массы, отвергается."""
        with pytest.raises(SpaceMismatch):
            svc.composition_operator(FiniteMeasureSpace.from_masses([1.0, 2.0]), [1, 0])

    def test_not_a_permutation(self, svc):
        with pytest.raises(SpaceMismatch):
            svc.composition_operator(FiniteMeasureSpace.uniform(3), [0, 0, 1])
