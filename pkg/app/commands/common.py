from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer

from app.core.config import Settings, settings
from app.core.errors import QrvError
from app.models.measure import FiniteMeasureSpace
from app.models.operators import State
from app.schemas.certificates import RunConfig
from app.schemas.inputs import SpaceIn, StateIn
from app.utils import codec

logger = logging.getLogger(__name__)


@contextmanager
def error_boundary() -> Iterator[None]:
    """Ошибки библиотеки печатаются в stderr и превращаются в код выхода."""
    try:
        yield
    except QrvError as exc:
        logger.debug("Команда завершена с ошибкой %s", type(exc).__name__)
        typer.echo(exc.message, err=True)
        raise typer.Exit(code=exc.exit_code) from None


def run_settings(verb: str, *, tol: float | None = None, seed: int | None = None,
                 output: Path | None = None, **inputs: Path | None) -> Settings:
    config = codec.parse(
        RunConfig,
        {
            "verb": verb,
            "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
            "tol": tol,
            "seed": settings.seed if seed is None else seed,
            "output": str(output) if output else None,
        },
    )
    logger.info("Запуск %s: %s", verb, config.model_dump(exclude_none=True))
    return config.apply(settings)


def load_space(path: Path | None) -> FiniteMeasureSpace | None:
    if path is None:
        return None
    return codec.load_model(SpaceIn, path).to_domain()


def load_state(path: Path | None) -> State | None:
    if path is None:
        return None
    return codec.load_model(StateIn, path).to_domain()


def emit(obj: Any, output: Path | None) -> None:
    """JSON в файл или в stdout."""
    if output is None:
        typer.echo(codec.dumps(obj).decode(), nl=False)
        return
    codec.write(output, obj)
    logger.info("Результат записан в %s", output)
