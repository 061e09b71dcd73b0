from __future__ import annotations

import pytest

_LINES: dict = {}


class Verdict:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title, self.notes, self.problems = number, title, [], []

    def note(self, text: str) -> None:
        self.notes.append(text)

    def check(self, ok: bool, text: str) -> bool:
        if not ok:
            self.problems.append(text)
        return ok

    def line(self) -> str:
        status = "PASS" if not self.problems else "FAIL"
        detail = "; ".join(self.problems[:4] + (["..."] if len(self.problems) > 4 else []))
        extra = "; ".join(self.notes)
        body = detail if detail else extra
        return f"criterion {self.number:>2} [{status}] {self.title}" + (f" :: {body}" if body else "")


@pytest.fixture
def verdict(request):
    holder = {}

    def make(number, title):
        holder["v"] = Verdict(number, title)
        return holder["v"]

    yield make
    if "v" in holder:
        v = holder["v"]
        _LINES[v.number] = v.line()
        print(v.line())


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
