import numpy as np
import pytest

from app.core.errors import DimMismatch
from app.models.measure import ClassicalFunction, FiniteMeasureSpace
from app.models.operators import State
from app.models.povm import Povm, QuantumRandomVariable
from app.services import examples
from app.services.generators import SWAP, dyadic_truncation, random_povm, random_qrv, swap_truncation
from app.services.l1norm import L1NormService


@pytest.fixture
def svc(cfg) -> L1NormService:
    return L1NormService(cfg)


class TestSeminorm:
    def test_nine_example(self, svc, nine):
        """‖f‖₁ = 9 < 11 = ‖∫|f| dν‖."""
        f, povm = nine
        cert = svc.l1_seminorm(f, povm)
        assert cert.method == "sdp"
        assert cert.value == pytest.approx(9.0, abs=1e-5)
        assert cert.gap <= 1e-6 * (1 + cert.value)
        assert svc.l1_upper_abs(f, povm) == pytest.approx(11.0)

    def test_certificate_checks_out(self, svc, nine):
        """Разложение восстанавливает f, слагаемые положительны, значение пересчитывается."""
        f, povm = nine
        cert = svc.l1_seminorm(f, povm)
        residuals = svc.verify_certificate(f, povm, cert)
        assert residuals["reconstruction"] <= 1e-8
        assert residuals["min_eigenvalue"] >= -1e-9
        assert residuals["value_mismatch"] <= 1e-9
        assert residuals["lower_bound"] <= cert.value + 1e-9
        assert residuals["lower_bound"] == pytest.approx(cert.dual_lower_bound)

    def test_positive_fast_path(self, svc, rng):
        """Для f ⪰ 0 значение равно ‖∫f dν‖ без вызова SDP."""
        space = FiniteMeasureSpace.uniform(3)
        povm = random_povm(rng, space, 2)
        f = random_qrv(rng, space, 2, positive=True)
        cert = svc.l1_seminorm(f, povm)
        assert cert.method == "analytic"
        assert cert.value == pytest.approx(svc.povms.integrate(f, povm).norm())
        assert cert.gap == pytest.approx(0.0, abs=1e-9)

    def test_zero_function(self, svc, uniform2):
        f = QuantumRandomVariable(uniform2, np.zeros((2, 2, 2)))
        assert svc.l1_seminorm(f, Povm.scalar(uniform2, 2)).reported_value == 0.0

    def test_complex_function(self, svc, uniform2):
        """‖i·A‖₁ = ‖A‖₁ для положительной A."""
        povm = Povm.scalar(uniform2, 2)
        a = QuantumRandomVariable(uniform2, np.stack([np.diag([1.0, 2.0]), np.diag([3.0, 0.0])]))
        cert = svc.l1_seminorm(1j * a, povm)
        assert cert.value == pytest.approx(svc.l1_seminorm(a, povm).value, abs=1e-5)

    @pytest.mark.parametrize("c", [(1 + 1j) / np.sqrt(2), 2.0 - 1.0j, -0.5j + 0.25])
    def test_complex_scalar_is_not_homogeneous(self, svc, c):
        """При d = 1: ‖c·1‖₁ = |Re c| + |Im c| > |c|, если c не лежит на осях."""
        space = FiniteMeasureSpace.from_masses([1.0])
        f = QuantumRandomVariable.from_scalar([c], space, 1)
        value = svc.l1_seminorm(f, Povm.scalar(space, 1)).value
        assert value == pytest.approx(abs(c.real) + abs(c.imag), abs=1e-5)
        assert value > abs(c) + 1e-3

    @pytest.mark.parametrize("c", [-2.5, 0.75, 1j, -1j])
    def test_homogeneous_for_real_and_unit_imaginary(self, svc, nine, c):
        """‖cf‖₁ = |c|‖f‖₁ для вещественных c и c = ±i."""
        f, povm = nine
        base = svc.l1_seminorm(f, povm).value
        assert svc.l1_seminorm(c * f, povm).value == pytest.approx(abs(c) * base, abs=1e-5 * (1 + abs(c)))

    def test_state_lower_bounds(self, svc, nine):
        """max_s ∫|f_s| dν_ρ не превосходит ‖f‖₁; s = e₁₁ дает 7."""
        f, povm = nine
        assert svc.l1_lower_states(f, povm, [State(np.diag([1.0, 0.0]))]) == pytest.approx(7.0)
        assert svc.l1_lower_states(f, povm, [State.maximally_mixed(2)]) <= 9.0 + 1e-9


class TestAbsIntegral:
    def test_triangle_inequality_fails(self, svc):
        """‖∫|f + g| dν‖ = 2√2 > 2 = ‖∫|f| dν‖ + ‖∫|g| dν‖."""
        f, g, povm = examples.triangle_pair()
        joint = svc.abs_integral_norm(f + g, povm)
        separate = svc.abs_integral_norm(f, povm) + svc.abs_integral_norm(g, povm)
        assert joint == pytest.approx(2 * np.sqrt(2))
        assert separate == pytest.approx(2.0)


class TestTruncations:
    def test_dyadic(self, svc):
        demo = dyadic_truncation(6)
        assert np.allclose(svc.povms.integrate(demo.f, demo.povm).matrix, np.eye(6))
        norms = QuantumRandomVariable.from_scalar(demo.f.pointwise_norms(), demo.f.space, 6)
        assert svc.povms.integrate(norms, demo.povm).norm() == pytest.approx(6.0)

    def test_swap_conjugation_grows(self, svc):
        """‖f‖₁ ограничена суммой Σ2^{-i/2}, а ‖U*fU‖₁ = k."""
        demo = swap_truncation(8)
        conjugated = svc.mult_operator(SWAP, svc.mult_operator(SWAP, demo.f, "right"), "left")
        plain = svc.l1_seminorm(demo.f, demo.povm).value
        swapped = svc.l1_seminorm(conjugated, demo.povm).value
        assert plain == pytest.approx(float(np.sum(2.0 ** (-np.arange(1, 9) / 2))))
        assert plain < 1 / (np.sqrt(2) - 1)
        assert swapped == pytest.approx(8.0)

    def test_truncation_profile(self, svc, nine):
        """Хвост над уровнем 5: только атом с ‖f(0)‖ = 8."""
        f, povm = nine
        assert svc.truncation_profile(f, povm, [100.0, 5.0]) == pytest.approx([0.0, 8.0])


class TestProducts:
    def test_bracket_with_indicator(self, svc, nine):
        """⟨f, χ₀I⟩ = ν(0)^{1/2} f(0) ν(0)^{1/2}."""
        f, povm = nine
        chi = ClassicalFunction.indicator(f.space, ["0"])
        assert np.allclose(svc.bracket(f, chi, povm).matrix, [[4.0, 4.0], [4.0, 4.0]])

    def test_mult_operator_sides(self, svc, uniform2):
        f = QuantumRandomVariable.identity(uniform2, 2)
        a = np.array([[0.0, 1.0], [2.0, 0.0]])
        assert np.allclose(svc.mult_operator(a, f, "left").values[0], a)
        assert np.allclose(svc.mult_operator(a, f, "right").values[1], a)
        with pytest.raises(DimMismatch):
            svc.mult_operator(np.eye(3), f)

    def test_conjugated_multiplier_with_scalar_povm(self, svc, nine):
        """При D = I сопряженное умножение совпадает с обычным."""
        f, povm = nine
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        assert svc.mult_operator_conjugated(a, f, povm).allclose(svc.mult_operator(a, f))

    def test_mult_scalar(self, svc, nine):
        f, _ = nine
        g = ClassicalFunction.real(f.space, [2.0, -1.0])
        product = svc.mult_scalar(f, g)
        assert np.allclose(product.values[0], 2 * f.values[0])
        assert np.allclose(product.values[1], np.diag([-3.0, 3.0]))

    def test_mult_qrv(self, svc, nine):
        f, _ = nine
        product = svc.mult_qrv(f, f)
        assert np.allclose(product.values[1], np.diag([9.0, 9.0]))


class TestPositivity:
    def test_detects_negative_atom(self, svc, nine):
        f, povm = nine
        positive, witness = svc.detect_positive(f, povm)
        assert not positive
        assert witness.atom == "1"
        assert witness.value.real == pytest.approx(-3.0)

    def test_positive_function(self, svc, uniform2):
        povm = Povm.scalar(uniform2, 2)
        assert svc.detect_positive(QuantumRandomVariable.identity(uniform2, 2), povm) == (True, None)

    def test_non_hermitian_local_value(self, svc, uniform2):
        """Несамосопряженное значение дает свидетеля с невещественным ⟨v, f v⟩."""
        f = QuantumRandomVariable(uniform2, np.stack([np.eye(2), [[0.0, 1.0], [0.0, 0.0]]]))
        positive, witness = svc.detect_positive(f, Povm.scalar(uniform2, 2))
        assert not positive
        assert witness.atom == "1"
        assert abs(witness.value.imag) > 0.1
        assert np.linalg.norm(witness.vector) == pytest.approx(1.0)
