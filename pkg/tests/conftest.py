import time
from contextlib import contextmanager
from dataclasses import dataclass

import pytest

_RESULTS = {}


@dataclass
class Record:
    number: int
    title: str
    passed: bool = False
    detail: str = ""
    seconds: float = 0.0


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's outcome and runtime."""

    @contextmanager
    def run(number, title, limit_s=None):
        rec = Record(number, title)
        _RESULTS[number] = rec
        start = time.perf_counter()
        try:
            yield rec
            rec.seconds = time.perf_counter() - start
            if limit_s is not None:
                assert rec.seconds < limit_s, f"runtime {rec.seconds:.2f}s over the {limit_s}s budget"
            rec.passed = True
        except BaseException as exc:
            rec.seconds = time.perf_counter() - start
            rec.detail = (rec.detail + " | " if rec.detail else "") + f"{type(exc).__name__}: {exc}"[:300]
            raise

    return run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        r = _RESULTS[n]
        flag = "PASS" if r.passed else "FAIL"
        tr.write_line(f"[{flag}] criterion {n:2d}: {r.title} ({r.seconds:.2f}s) {r.detail}".rstrip())
    n_pass = sum(r.passed for r in _RESULTS.values())
    tr.write_line(f"{n_pass}/{len(_RESULTS)} criteria passed")
