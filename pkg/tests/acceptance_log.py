"""Collects one pass/fail line per acceptance criterion."""

LINES = []


def record(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{criterion} {'PASS' if ok else 'FAIL'}: {detail}"
    LINES.append(line)
    print(line)
    return ok
