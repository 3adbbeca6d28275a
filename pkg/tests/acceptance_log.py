"""One PASS/FAIL line per acceptance check, printed at the end of the run."""

_LINES = []


def record(label, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
    _LINES.append(line)
    print(line)
    return passed


def lines():
    return list(_LINES)
