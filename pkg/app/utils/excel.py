from __future__ import annotations

from pathlib import Path

from openpyxl import Workbook
from openpyxl.utils import get_column_letter

from app.schemas.certificates import ExampleReportOut, PropertyReportOut


class ReportExcelBuilder:
    example_columns = [
        "Пример",
        "Название",
        "Проверка",
        "Отношение",
        "Ожидается",
        "Получено",
        "Допуск",
        "Результат",
    ]

    property_columns = [
        "Свойство",
        "Пройдено",
        "Нарушено",
        "Пропущено",
        "Остановка решателя",
        "Худшее превышение",
        "Seed нарушений",
    ]

    @staticmethod
    def _autowidth(ws) -> None:
        # ширина по самой длинной ячейке, но не больше 50
        for i, column in enumerate(ws.columns, start=1):
            longest = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            ws.column_dimensions[get_column_letter(i)].width = min(max(longest + 2, 12), 50)

    @staticmethod
    def _save(wb: Workbook, path: str | Path) -> str:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        wb.save(target)
        return str(target)

    def build_examples(self, reports: list[ExampleReportOut], path: str | Path) -> str:
        wb = Workbook()
        ws = wb.active
        ws.title = "Примеры"
        ws.append(self.example_columns)
        for report in reports:
            for check in report.checks:
                ws.append(
                    [
                        report.example_id,
                        report.title,
                        check.name,
                        check.relation,
                        check.expected,
                        check.actual,
                        check.tol,
                        "OK" if check.passed else "ОШИБКА",
                    ]
                )
        self._autowidth(ws)
        return self._save(wb, path)

    def build_properties(self, report: PropertyReportOut, path: str | Path) -> str:
        """Таблица по свойствам и отдельный лист с параметрами запуска."""
        wb = Workbook()
        ws = wb.active
        ws.title = "Свойства"
        ws.append(self.property_columns)
        for t in report.tallies:
            ws.append(
                [
                    t.name,
                    t.passed,
                    t.failed,
                    t.skipped,
                    t.stalled,
                    t.worst_excess,
                    ", ".join(str(s) for s in t.failing_seeds),
                ]
            )
        self._autowidth(ws)

        meta = wb.create_sheet("Запуск")
        meta.append(["seed", report.seed])
        meta.append(["trials", report.trials])
        meta.append(["нарушений", report.failures])
        self._autowidth(meta)
        return self._save(wb, path)
