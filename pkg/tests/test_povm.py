import numpy as np
import pytest

from app.core.errors import DimMismatch, FullRankRequired, SpaceMismatch
from app.models.measure import ClassicalFunction, FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable
from app.services.generators import dyadic_truncation, random_povm, random_qrv, random_state
from app.services.povm import PovmService
from app.utils import linalg


@pytest.fixture
def svc(cfg) -> PovmService:
    return PovmService(cfg)


class TestInducedMeasure:
    def test_trace_against_effects(self, svc, uniform2):
        povm = Povm(uniform2, np.stack([np.diag([2.0, 0.0]), np.diag([0.0, 4.0])]))
        induced = svc.induced_measure(povm, State(np.diag([0.25, 0.75])))
        assert induced.masses.tolist() == pytest.approx([0.5, 3.0])
        assert induced.total() == pytest.approx(3.5)

    def test_pure_state_null_atom(self, svc, uniform2):
        """Атом вне носителя ρ получает нулевую массу и исключается из пространства."""
        povm = Povm(uniform2, np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
        induced = svc.induced_measure(povm, State.pure([1.0, 0.0]))
        assert induced.support.tolist() == [True, False]
        assert induced.as_space().atoms == ("0",)

    def test_rn_requires_full_rank(self, svc, uniform2):
        with pytest.raises(FullRankRequired):
            svc.rn_derivative(Povm.scalar(uniform2, 2), State.pure([1.0, 0.0]))

    def test_dim_mismatch(self, svc, uniform2):
        with pytest.raises(DimMismatch):
            svc.induced_measure(Povm.scalar(uniform2, 2), State.maximally_mixed(3))

    def test_small_mass_kept(self, svc):
        """Атом с малой, но ненулевой массой остается в носителе."""
        space = FiniteMeasureSpace.from_masses([1.0, 1e-10])
        povm = Povm.scalar(space, 2)
        induced = svc.induced_measure(povm, require_full_rank=True)
        assert induced.support.tolist() == [True, True]
        assert induced.masses[1] == pytest.approx(1e-10, rel=1e-9)
        integral = svc.integrate(QuantumRandomVariable.identity(space, 2), povm)
        assert np.allclose(integral.matrix, (1.0 + 1e-10) * np.eye(2), atol=1e-15, rtol=0)

    def test_deep_dyadic_truncation(self, svc):
        """Массы 2^{-n} до n = 40 не обнуляются, ∫f dν = I_40."""
        demo = dyadic_truncation(40)
        induced = svc.induced_measure(demo.povm, require_full_rank=True)
        assert induced.support.all()
        integral = svc.integrate(demo.f, demo.povm)
        assert np.allclose(integral.matrix, np.eye(40), atol=1e-9)


class TestRnDerivative:
    def test_scalar_povm_gives_identity(self, svc, uniform2):
        """Для ν = μI и ρ = I/d: ν_ρ = μ, D = I."""
        rn = svc.rn_derivative(Povm.scalar(uniform2, 2))
        assert rn.masses.tolist() == pytest.approx([1.0, 1.0])
        assert np.allclose(rn.density, np.stack([np.eye(2), np.eye(2)]))
        assert rn.sup_norm() == pytest.approx(1.0)
        assert rn.inverse_sup_norm() == pytest.approx(1.0)

    def test_density_reconstructs_effects(self, svc, rng):
        """ν(x) = ν_ρ(x)·D(x), D(x)^{1/2}: квадратный корень D(x)."""
        space = FiniteMeasureSpace.uniform(3)
        povm = random_povm(rng, space, 2)
        rn = svc.rn_derivative(povm, random_state(rng, 2))
        for x in range(3):
            assert np.allclose(rn.masses[x] * rn.density[x], povm.effects[x], atol=1e-10)
            assert np.allclose(rn.sqrt_density[x] @ rn.sqrt_density[x], rn.density[x], atol=1e-10)

    def test_null_effect_skipped(self, svc, uniform2):
        povm = Povm(uniform2, np.stack([np.eye(2), np.zeros((2, 2))]))
        rn = svc.rn_derivative(povm)
        assert rn.support.tolist() == [True, False]
        assert np.allclose(rn.density[1], 0.0)

    def test_singular_density_has_no_inverse_bound(self, svc, uniform2):
        povm = Povm(uniform2, np.stack([np.diag([1.0, 0.0]), np.eye(2)]))
        assert svc.rn_derivative(povm).inverse_sup_norm() is None


class TestIntegration:
    def test_nine_example(self, svc, nine):
        """∫f dν = [[7, 4], [4, 1]], ‖∫f dν‖ = 9."""
        f, povm = nine
        integral = svc.integrate(f, povm)
        assert np.allclose(integral.matrix, [[7.0, 4.0], [4.0, 1.0]])
        assert integral.norm() == pytest.approx(9.0)

    def test_independent_of_rho(self, svc, rng):
        """Интеграл не зависит от выбора невырожденного ρ (20 состояний) и равен Σ ν(x)^{1/2} f(x) ν(x)^{1/2}."""
        space = FiniteMeasureSpace.uniform(3)
        povm = random_povm(rng, space, 2)
        f = random_qrv(rng, space, 2)
        roots = [linalg.psd_sqrt(e) for e in povm.effects]
        direct = sum(r @ v @ r for r, v in zip(roots, f.values))
        for _ in range(20):
            assert np.allclose(svc.integrate(f, povm, random_state(rng, 2)).matrix, direct, atol=1e-9)

    def test_scalarize_integrates_to_pairing(self, svc, rng):
        """∫f_s dν_ρ = tr(s·∫f dν)."""
        space = FiniteMeasureSpace.uniform(3)
        povm = random_povm(rng, space, 2)
        f = random_qrv(rng, space, 2, self_adjoint=True)
        s = random_state(rng, 2)
        rn = svc.rn_derivative(povm)
        fs = svc.scalarize(f, povm, s, rn=rn)
        lhs = complex(rn.masses @ fs.values)
        assert lhs == pytest.approx(np.trace(s.matrix @ svc.integrate(f, povm, rn=rn).matrix))

    def test_space_mismatch(self, svc, uniform2):
        f = QuantumRandomVariable.identity(FiniteMeasureSpace.uniform(3), 2)
        with pytest.raises(SpaceMismatch):
            svc.integrate(f, Povm.scalar(uniform2, 2))

    def test_linf_and_scalar_integral(self, svc, nine):
        f, povm = nine
        induced = svc.induced_measure(povm)
        assert svc.linf_norm(f, induced) == pytest.approx(8.0)
        g = ClassicalFunction.real(povm.space, [1.0, 2.0])
        assert svc.scalar_integral(g, induced) == pytest.approx(3.0)
