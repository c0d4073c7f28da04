"""Команды порядков: majorize, separate."""
from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import emit, error_boundary, load_space, run_settings
from app.commands.compute import OutputOpt, SpaceOpt, TolOpt
from app.models.certificates import Order
from app.schemas.certificates import MajorizationCertificateOut, SeparationOut
from app.schemas.inputs import QrvIn
from app.services.majorization import MajorizationService
from app.utils import codec

FOpt = Annotated[Path, typer.Option("--f", help="JSON с f")]
GOpt = Annotated[Path, typer.Option("--g", help="JSON с g")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Seed случайного поиска (по умолчанию QRV_SEED)")]


def _load_pair(f: Path, g: Path, space: Path | None):
    sp = load_space(space)
    qf = codec.load_model(QrvIn, f).to_domain(sp)
    qg = codec.load_model(QrvIn, g).to_domain(qf.space)
    return qf, qg


def majorize(f: FOpt, g: GOpt,
             order: Annotated[Order, typer.Option("--order", case_sensitive=False, help="b, t или s")] = Order.B,
             space: SpaceOpt = None, seed: SeedOpt = None, tol: TolOpt = None, output: OutputOpt = None) -> None:
    """Проверяет f ≺ g (b), f ≺_T g (t) или f ≺_S g (s) и выдает сертификат."""
    with error_boundary():
        cfg = run_settings("majorize", tol=tol, seed=seed, f=f, g=g, space=space, output=output)
        qf, qg = _load_pair(f, g, space)
        cert = MajorizationService(cfg).majorize(order, qf, qg, cfg.seed)
        emit(MajorizationCertificateOut.from_domain(qf, qg, cert), output)


def separate(f: FOpt, g: GOpt, space: SpaceOpt = None, seed: SeedOpt = None,
             trials: Annotated[int | None, typer.Option("--trials", min=0, help="Число случайных φ при f ≺ g")] = None,
             output: OutputOpt = None) -> None:
    """Отделяющий функционал W, если f ⊀ g; иначе проверка ψ_φ(f) ≤ ψ_φ(g) на случайных φ."""
    with error_boundary():
        cfg = run_settings("separate", seed=seed, f=f, g=g, space=space, output=output)
        qf, qg = _load_pair(f, g, space)
        svc = MajorizationService(cfg)
        trials = cfg.separation_trials if trials is None else trials
        phi = svc.komiya_separate(qf, qg, cfg.seed, trials)
        margin = svc.separation_margin(phi, qf, qg) if phi is not None else None
        emit(SeparationOut.from_domain(qf, qg, phi, margin, cfg.seed, trials), output)
