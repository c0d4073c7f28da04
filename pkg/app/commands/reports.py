"""Команды отчетов: paper-examples, property-suite, verify."""
from pathlib import Path
from typing import Annotated

import typer

from app.commands.common import emit, error_boundary, run_settings
from app.commands.compute import OutputOpt
from app.core.errors import ExampleMismatch, QrvError, QrvValidationError
from app.schemas.certificates import (
    ExampleCheckOut,
    ExampleReportOut,
    PropertyReportOut,
    PropertyTallyOut,
)
from app.services.examples import ExampleReport, PaperExamplesService
from app.services.properties import PropertyReport, PropertySuiteService
from app.services.verify import VerifyService
from app.utils.excel import ReportExcelBuilder

XlsxOpt = Annotated[Path | None, typer.Option("--xlsx", help="Дополнительно сохранить отчет в .xlsx")]
OnlyOpt = Annotated[list[str] | None, typer.Option("--only", help="Ограничить запуск указанными именами")]


def example_report_out(report: ExampleReport) -> ExampleReportOut:
    return ExampleReportOut(
        example_id=report.example_id,
        title=report.title,
        passed=report.passed,
        checks=[
            ExampleCheckOut(
                name=c.name,
                expected=c.expected,
                actual=c.actual,
                tol=c.tol,
                relation=c.relation,
                passed=c.passed,
            )
            for c in report.checks
        ],
    )


def property_report_out(report: PropertyReport) -> PropertyReportOut:
    return PropertyReportOut(
        seed=report.seed,
        trials=report.trials,
        failures=report.failures,
        tallies=[
            PropertyTallyOut(
                name=t.name,
                passed=t.passed,
                failed=t.failed,
                skipped=t.skipped,
                stalled=t.stalled,
                worst_excess=t.worst_excess,
                failing_seeds=list(t.failing_seeds),
            )
            for t in report.tallies
        ],
    )


def paper_examples(
    list_only: Annotated[bool, typer.Option("--list", help="Только перечислить идентификаторы")] = False,
    only: OnlyOpt = None,
    xlsx: XlsxOpt = None,
    output: OutputOpt = None,
) -> None:
    """Воспроизводит именованные примеры; код 4, если хотя бы одно значение не совпало."""
    with error_boundary():
        cfg = run_settings("paper-examples", output=output)
        svc = PaperExamplesService(cfg)
        if list_only:
            for example_id, title in svc.catalog().items():
                typer.echo(f"{example_id}\t{title}")
            return
        reports = [example_report_out(r) for r in svc.run(only or None, strict=False)]
        emit(reports, output)
        if xlsx is not None:
            ReportExcelBuilder().build_examples(reports, xlsx)
        failed = [r.example_id for r in reports if not r.passed]
        if failed:
            raise ExampleMismatch(f"Не совпали примеры: {', '.join(failed)}")


def property_suite(
    seed: Annotated[int | None, typer.Option("--seed", help="Базовый seed (по умолчанию QRV_SEED)")] = None,
    trials: Annotated[int, typer.Option("--trials", help="Число случайных экземпляров")] = 200,
    only: OnlyOpt = None,
    xlsx: XlsxOpt = None,
    output: OutputOpt = None,
) -> None:
    """Прогон набора свойств на случайных экземплярах; детерминирован при заданном seed."""
    with error_boundary():
        cfg = run_settings("property-suite", seed=seed, output=output)
        report = property_report_out(PropertySuiteService(cfg).run(cfg.seed, trials, only or None))
        emit(report, output)
        if xlsx is not None:
            ReportExcelBuilder().build_properties(report, xlsx)
        if report.failures:
            raise QrvError(f"Нарушений свойств: {report.failures}")


def verify(
    certificate: Annotated[Path, typer.Option("--certificate", help="JSON-сертификат для проверки")],
    output: OutputOpt = None,
) -> None:
    """Повторная проверка сертификата без решателей; код 2, если проверка не пройдена."""
    with error_boundary():
        cfg = run_settings("verify", certificate=certificate, output=output)
        report = VerifyService(cfg).verify_file(certificate)
        emit(report, output)
        if not report.ok:
            raise QrvValidationError(f"Сертификат не прошел проверку: {'; '.join(report.notes)}")
