from pathlib import Path
from typing import Any, Callable, Generator

import numpy as np
import pytest

from app.core.config import Settings, settings
from app.models.measure import FiniteMeasureSpace
from app.models.povm import Povm, QuantumRandomVariable
from app.services import examples
from app.utils import codec


@pytest.fixture(autouse=True)
def no_solver_log_file(monkeypatch: pytest.MonkeyPatch) -> None:
    """Тесты не пишут solver_usage.log в рабочий каталог."""
    monkeypatch.setattr(settings, "solver_log_file", "")


@pytest.fixture
def cfg() -> Settings:
    """Настройки с небольшими выборками, чтобы тесты шли быстро."""
    return settings.model_copy(update={"state_samples": 500, "t_samples": 500, "separation_trials": 5})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def uniform2() -> FiniteMeasureSpace:
    return FiniteMeasureSpace.uniform(2)


@pytest.fixture
def nine() -> tuple[QuantumRandomVariable, Povm]:
    return examples.nine_example()


@pytest.fixture
def joe_verducci() -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    return examples.joe_verducci()


@pytest.fixture
def malamud() -> tuple[QuantumRandomVariable, QuantumRandomVariable]:
    return examples.malamud()


@pytest.fixture
def write_json(tmp_path: Path) -> Generator[Callable[[str, Any], Path], None, None]:
    """Записывает объект в tmp_path/<name> и возвращает путь."""

    def _write(name: str, obj: Any) -> Path:
        path = tmp_path / name
        codec.write(path, obj)
        return path

    yield _write
