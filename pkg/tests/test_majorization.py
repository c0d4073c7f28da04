import numpy as np
import pytest

from app.core.errors import DimMismatch, SpaceMismatch
from app.models.certificates import Order, Verdict
from app.models.measure import BistochasticMatrix, FiniteMeasureSpace
from app.models.povm import QuantumRandomVariable
from app.services import examples
from app.services.generators import random_bistochastic, random_qrv
from app.services.majorization import MajorizationService


@pytest.fixture
def svc(cfg) -> MajorizationService:
    return MajorizationService(cfg)


class TestBistochasticOrder:
    def test_image_is_majorized(self, svc, rng):
        """f = Bg ⇒ f ≺ g, свидетель переводит g в f."""
        space = FiniteMeasureSpace.uniform(3, 1 / 3)
        g = random_qrv(rng, space, 2, self_adjoint=True)
        f = svc.apply_bistochastic(random_bistochastic(rng, space), g)
        cert = svc.majorizes_B(f, g)
        assert cert.verdict == Verdict.holds
        assert cert.residual <= 1e-7
        assert np.allclose(cert.witness.apply(g.values), f.values, atol=1e-7)

    def test_separating_functional_on_failure(self, svc, joe_verducci):
        """При f ⊀ g функционал Фаркаша дает Re φ(f) > ψ_φ(g)."""
        f, g = joe_verducci
        cert = svc.majorizes_B(f, g)
        assert cert.verdict == Verdict.fails
        assert cert.farkas.max_violation <= 1e-8
        assert cert.separation_margin > 0
        assert svc.separation_margin(cert.separating, f, g) == pytest.approx(cert.separation_margin)

    def test_psi_dominates_identity(self, svc, rng):
        """ψ_φ(h) ≥ Re φ(h): единичная матрица бистохастична."""
        space = FiniteMeasureSpace.uniform(3)
        h = random_qrv(rng, space, 2, self_adjoint=True)
        phi = svc.random_functional(rng, space, 2)
        assert svc.psi_phi(phi, h) >= phi.evaluate(h.values).real - 1e-9

    def test_space_and_dim_checked(self, svc, uniform2):
        f = QuantumRandomVariable.identity(uniform2, 2)
        with pytest.raises(SpaceMismatch):
            svc.majorizes_B(f, QuantumRandomVariable.identity(FiniteMeasureSpace.uniform(3), 2))
        with pytest.raises(DimMismatch):
            svc.majorizes_B(f, QuantumRandomVariable.identity(uniform2, 3))
        with pytest.raises(SpaceMismatch):
            svc.apply_bistochastic(BistochasticMatrix.identity(FiniteMeasureSpace.uniform(3)), f)


class TestScalarizedOrders:
    def test_joe_verducci(self, svc, joe_verducci):
        """≺ и ≺_T не выполняются, ≺_S выполняется."""
        f, g = joe_verducci
        assert svc.majorize(Order.B, f, g).verdict == Verdict.fails
        t = svc.majorize(Order.T, f, g)
        assert t.verdict == Verdict.fails
        assert t.refuting_margin >= 0.9
        s = svc.majorize(Order.S, f, g)
        assert s.verdict == Verdict.holds
        assert not s.sampler.refuted

    def test_malamud(self, svc, malamud):
        """≺_T выполняется с 14 включениями, ≺ нет."""
        f, g = malamud
        t = svc.majorizes_T(f, g)
        assert t.verdict == Verdict.holds
        assert len(t.containment) == 14
        for record in t.containment:
            assert sum(record.weights.values()) == pytest.approx(1.0, abs=1e-8)
        assert svc.majorizes_S(f, g).verdict == Verdict.holds
        b = svc.majorizes_B(f, g)
        assert b.verdict == Verdict.fails
        assert b.separation_margin >= 1e-6

    def test_different_sums_refuted(self, svc, uniform2):
        f = QuantumRandomVariable(uniform2, np.stack([np.eye(2), np.eye(2)]))
        g = QuantumRandomVariable(uniform2, np.stack([np.eye(2), np.zeros((2, 2))]))
        for order in (Order.T, Order.S):
            cert = svc.majorize(order, f, g)
            assert cert.verdict == Verdict.fails
            assert "суммы Σf и Σg различаются" in cert.notes
            assert cert.refuting_margin > 0

    def test_non_uniform_masses_sampled(self, svc, rng):
        """При неравных массах без опровержения вердикт: только по выборке."""
        space = FiniteMeasureSpace.from_masses([1.0, 2.0])
        f = random_qrv(rng, space, 2, self_adjoint=True)
        cert = svc.majorizes_T(f, f)
        assert cert.verdict == Verdict.undecided_sampled
        assert cert.sampler.samples == 500
        assert cert.notes

    def test_implication_chain(self, svc, rng):
        """f = Bg: все три порядка выполняются."""
        space = FiniteMeasureSpace.uniform(3)
        g = random_qrv(rng, space, 2, self_adjoint=True)
        f = svc.apply_bistochastic(random_bistochastic(rng, space), g)
        report = svc.implication_suite(f, g)
        assert report.consistent
        assert report.verdicts == {"b": "holds", "t": "holds", "s": "holds"}


class TestSeparation:
    def test_komiya_scalar(self, svc):
        """f = (2, 0, 1) ⊀ g = (1, 1, 1): зазор отделения не меньше 1/2."""
        f, g = examples.komiya_scalar()
        phi = svc.komiya_separate(f, g)
        assert phi is not None
        assert svc.separation_margin(phi, f, g) >= 0.5 - 1e-8

    def test_majorized_pair_not_separated(self, svc, rng):
        space = FiniteMeasureSpace.uniform(3)
        g = random_qrv(rng, space, 2, self_adjoint=True)
        f = svc.apply_bistochastic(BistochasticMatrix.averaging(space), g)
        assert svc.komiya_separate(f, g, seed=1, trials=3) is None

    def test_forward_direction_fifty_functionals(self, svc, rng):
        """f = Bg: ψ_φ(f) ≤ ψ_φ(g) для 50 случайных φ, отделения нет."""
        space = FiniteMeasureSpace.uniform(4)
        g = random_qrv(rng, space, 2, self_adjoint=True)
        f = svc.apply_bistochastic(random_bistochastic(rng, space), g)
        assert svc.komiya_separate(f, g, seed=7, trials=50) is None
