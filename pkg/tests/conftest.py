from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

_CRITERIA: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[number] = (title, report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome, duration = _CRITERIA[number]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {number:2d}: {title} ({duration:.2f}s)")


def book_word_ids(path: Path = DATA / "botchan.txt") -> np.ndarray:
    """Lower-cased word tokens of the bundled public-domain novel, ids by first appearance."""
    text = path.read_text(encoding="utf-8")
    start = text.index("*** START")
    start = text.index("\n", start)
    end = text.index("*** END")
    words = re.findall(r"[a-z]+(?:'[a-z]+)?", text[start:end].lower())
    ids: dict[str, int] = {}
    return np.array([ids.setdefault(w, len(ids)) for w in words], dtype=np.int64)


@pytest.fixture(scope="session")
def book_tokens() -> np.ndarray:
    return book_word_ids()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
