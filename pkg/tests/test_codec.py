import numpy as np
import pytest

from app.core.errors import DimMismatch, InputFormatError, NonFiniteEntries
from app.schemas.inputs import BistochasticIn, FunctionalIn, QrvIn, SpaceIn
from app.utils import codec


class TestDump:
    def test_rounding_and_non_finite(self):
        """15 значащих цифр; NaN и Inf пишутся как null."""
        assert codec.round_float(0.1 + 0.2) == 0.3
        assert codec.round_float(float("nan")) is None
        assert codec.round_float(-0.0) == 0.0

    def test_numpy_and_complex(self):
        data = codec.normalize({"a": np.array([1.0, np.inf]), 2: np.int64(3), "z": 1 + 2j, "b": np.bool_(True)})
        assert data == {"a": [1.0, None], "2": 3, "z": [1.0, 2.0], "b": True}

    def test_sorted_keys_are_deterministic(self):
        assert codec.dumps({"b": 1, "a": 2}) == codec.dumps({"a": 2, "b": 1})
        assert codec.dumps({"b": 1}).endswith(b"\n")


class TestParse:
    def test_scalar_forms(self):
        assert codec.scalar_from_json(2) == 2 + 0j
        assert codec.scalar_from_json([1.5, -1]) == 1.5 - 1j
        with pytest.raises(InputFormatError):
            codec.scalar_from_json(True)
        with pytest.raises(InputFormatError):
            codec.scalar_from_json([1, 2, 3])

    def test_matrix_checks(self):
        with pytest.raises(DimMismatch):
            codec.matrix_from_json([[1, 2]])
        with pytest.raises(DimMismatch):
            codec.matrix_from_json([[1]], dim=2)
        assert np.allclose(codec.matrix_from_json([[1, [0, 1]], [[0, -1], 2]]), [[1, 1j], [-1j, 2]])

    def test_syntax_error_has_position(self, tmp_path):
        """Ошибка разбора указывает строку и столбец."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "atoms": [1,\n}\n', encoding="utf-8")
        with pytest.raises(InputFormatError) as info:
            codec.load(path)
        assert info.value.line is not None
        assert info.value.column is not None
        assert str(path) in info.value.message

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError):
            codec.load(tmp_path / "missing.json")

    def test_model_errors_are_input_errors(self):
        with pytest.raises(InputFormatError) as info:
            codec.parse(SpaceIn, {"atoms": ["a"], "masses": [1.0], "extra": 1})
        assert "extra" in info.value.message

    def test_qrv_domain_conversion(self):
        """Отсутствующие атомы дают нулевые значения, неизвестные атомы дают ошибку."""
        space = {"atoms": ["a", "b"], "masses": [1.0, 1.0]}
        qrv = codec.parse(QrvIn, {"dim": 1, "values": {"a": [[2]]}, "space": space})
        domain = qrv.to_domain(None)
        assert domain.values[:, 0, 0].tolist() == [2.0, 0.0]
        bad = codec.parse(QrvIn, {"dim": 1, "values": {"c": [[2]]}, "space": space})
        with pytest.raises(DimMismatch):
            bad.to_domain(None)

    def test_non_finite_scalar(self):
        with pytest.raises(NonFiniteEntries):
            codec.scalar_from_json(float("inf"))

    def test_bistochastic_and_functional(self):
        space = {"atoms": ["a", "b"], "masses": [1.0, 1.0]}
        b = codec.parse(BistochasticIn, {"matrix": [[0.5, 0.5], [0.5, 0.5]], "space": space}).to_domain()
        assert b.matrix.tolist() == [[0.5, 0.5], [0.5, 0.5]]
        with pytest.raises(InputFormatError):
            codec.parse(BistochasticIn, {"matrix": [[1.0, 0.0]], "space": space})
        sp, weights = codec.parse(FunctionalIn, {"dim": 1, "weights": {"b": [[3]]}, "space": space}).to_arrays()
        assert sp.atoms == ("a", "b")
        assert weights[:, 0, 0].tolist() == [0, 3]
