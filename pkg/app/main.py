import typer

from app.commands import compute, order, reports
from app.core.config import settings
from app.core.logging import configure_logging

cli = typer.Typer(
    name=settings.PROJECT_NAME,
    help="Интегрирование квантовых случайных величин, полунорма ‖·‖₁ и порядки мажоризации.",
    no_args_is_help=True,
    add_completion=False,
)


@cli.callback()
def main() -> None:
    configure_logging(settings)


# --- Подключаем команды ---
cli.command("integrate")(compute.integrate)
cli.command("rn")(compute.rn)
cli.command("norm1")(compute.norm1)
cli.command("bracket")(compute.bracket)
cli.command("majorize")(order.majorize)
cli.command("separate")(order.separate)
cli.command("paper-examples")(reports.paper_examples)
cli.command("property-suite")(reports.property_suite)
cli.command("verify")(reports.verify)


if __name__ == "__main__":
    cli()
