import re
import sys
from collections import Counter, defaultdict
from pathlib import Path

# Формат строк, которые пишет app.middleware.solver_calls
LOG_PATTERN = re.compile(r"SOLVER_CALL kind=(\S+) status=(\S+) size=(\d+) duration=([0-9.]+)")


def analyze_logs(log_file: Path) -> dict[tuple[str, str], tuple[int, float]] | None:
    """Число вызовов и суммарное время по парам (kind, status)."""
    if not log_file.exists():
        print(f"Ошибка: Файл логов '{log_file}' не найден.")
        return None

    calls: Counter[tuple[str, str]] = Counter()
    seconds: defaultdict[tuple[str, str], float] = defaultdict(float)

    with open(log_file, encoding="utf-8") as f:
        for line in f:
            match = LOG_PATTERN.search(line)
            if not match:
                continue
            kind, status, _size, duration = match.groups()
            calls[(kind, status)] += 1
            seconds[(kind, status)] += float(duration)

    print("--- Статистика вызовов решателей ---")
    if not calls:
        print("Нет данных о вызовах.")
        return {}

    for (kind, status), count in calls.most_common():
        print(f"{count:<10} {kind:<6} {status:<22} {seconds[(kind, status)]:.3f} с")

    return {key: (count, seconds[key]) for key, count in calls.items()}


if __name__ == "__main__":
    analyze_logs(Path(sys.argv[1] if len(sys.argv) > 1 else "solver_usage.log"))
