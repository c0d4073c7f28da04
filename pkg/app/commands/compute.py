"""Команды интегрирования: integrate, rn, norm1, bracket."""
from pathlib import Path
from typing import Annotated

import numpy as np
import typer

from app.commands.common import emit, error_boundary, load_space, load_state, run_settings
from app.core.errors import SolverStall
from app.schemas.certificates import BracketOut, IntegrateOut, L1CertificateOut, RnOut
from app.schemas.inputs import FunctionIn, PovmIn, QrvIn, atom_matrices_to_json
from app.services.l1norm import L1NormService
from app.services.povm import PovmService
from app.utils import codec

PovmOpt = Annotated[Path, typer.Option("--povm", help="JSON с эффектами POVM")]
QrvOpt = Annotated[Path, typer.Option("--qrv", help="JSON со значениями f по атомам")]
RhoOpt = Annotated[Path | None, typer.Option("--rho", help="JSON с состоянием ρ (по умолчанию I/d)")]
SpaceOpt = Annotated[Path | None, typer.Option("--space", help="JSON с пространством, если его нет во входных файлах")]
TolOpt = Annotated[float | None, typer.Option("--tol", help="Допуск двойственного зазора SDP")]
OutputOpt = Annotated[Path | None, typer.Option("--output", "-o", help="Файл результата; по умолчанию stdout")]


def integrate(povm: PovmOpt, qrv: QrvOpt, rho: RhoOpt = None, space: SpaceOpt = None,
              output: OutputOpt = None) -> None:
    """Печатает ∫f dν и его операторную норму."""
    with error_boundary():
        cfg = run_settings("integrate", povm=povm, qrv=qrv, rho=rho, space=space, output=output)
        sp = load_space(space)
        nu = codec.load_model(PovmIn, povm).to_domain(sp)
        f = codec.load_model(QrvIn, qrv).to_domain(nu.space)
        result = PovmService(cfg).integrate(f, nu, load_state(rho))
        emit(IntegrateOut(integral=codec.matrix_to_json(result.matrix), norm=result.norm()), output)


def rn(povm: PovmOpt, rho: RhoOpt = None, space: SpaceOpt = None, output: OutputOpt = None) -> None:
    """Производная Радона–Никодима D(x) по атомам и мера ν_ρ."""
    with error_boundary():
        cfg = run_settings("rn", povm=povm, rho=rho, space=space, output=output)
        nu = codec.load_model(PovmIn, povm).to_domain(load_space(space))
        derivative = PovmService(cfg).rn_derivative(nu, load_state(rho))
        emit(
            RnOut(
                rho=codec.matrix_to_json(derivative.rho.matrix),
                induced=dict(zip(nu.space.atoms, derivative.masses.tolist())),
                density=atom_matrices_to_json(nu.space, derivative.density),
            ),
            output,
        )


def norm1(povm: PovmOpt, qrv: QrvOpt, rho: RhoOpt = None, space: SpaceOpt = None, tol: TolOpt = None,
          output: OutputOpt = None) -> None:
    """‖f‖₁ с сертификатом: разложение на положительные части и двойственное состояние."""
    with error_boundary():
        cfg = run_settings("norm1", tol=tol, povm=povm, qrv=qrv, rho=rho, space=space, output=output)
        nu = codec.load_model(PovmIn, povm).to_domain(load_space(space))
        f = codec.load_model(QrvIn, qrv).to_domain(nu.space)
        state = load_state(rho)
        try:
            cert = L1NormService(cfg).l1_seminorm(f, nu, rho=state)
        except SolverStall as exc:
            # лучший найденный сертификат все равно сохраняется, код выхода 3
            if exc.best is not None:
                emit(L1CertificateOut.from_domain(f, nu, exc.best, state), output)
            raise
        emit(L1CertificateOut.from_domain(f, nu, cert, state), output)


def bracket(povm: PovmOpt, qrv: QrvOpt,
            g: Annotated[Path, typer.Option("--g", help="JSON со скалярной функцией g")],
            rho: RhoOpt = None, space: SpaceOpt = None, tol: TolOpt = None,
            output: OutputOpt = None) -> None:
    """⟨f, gI⟩ и оценка 4‖f‖₁‖g‖∞."""
    with error_boundary():
        cfg = run_settings("bracket", tol=tol, povm=povm, qrv=qrv, g=g, rho=rho, space=space, output=output)
        nu = codec.load_model(PovmIn, povm).to_domain(load_space(space))
        f = codec.load_model(QrvIn, qrv).to_domain(nu.space)
        scalar = codec.load_model(FunctionIn, g).to_domain(nu.space)
        state = load_state(rho)
        norms = L1NormService(cfg)
        value = norms.bracket(f, scalar, nu)
        l1_value = norms.l1_seminorm(f, nu, rho=state).value
        support = norms.povms.induced_measure(nu, state).support
        g_sup = float(np.max(np.abs(scalar.values)[support], initial=0.0))
        emit(
            BracketOut(
                value=codec.matrix_to_json(value.matrix),
                norm=value.norm(),
                l1_value=l1_value,
                g_sup=g_sup,
                bound=4.0 * l1_value * g_sup,
            ),
            output,
        )
