"""Collects acceptance outcomes for the end-of-session summary."""

from collections import OrderedDict

RESULTS = OrderedDict()


def record(criterion, part, passed, detail=""):
    RESULTS.setdefault(criterion, []).append((part, bool(passed), detail))
    line = f"{'PASS' if passed else 'FAIL'} criterion {criterion} [{part}] {detail}"
    print(line)
    return passed


def summary_lines():
    lines = []
    for criterion, parts in RESULTS.items():
        ok = all(p for _, p, _ in parts)
        lines.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}")
        for part, passed, detail in parts:
            lines.append(f"    {'pass' if passed else 'FAIL'}  {part}: {detail}")
    return lines
