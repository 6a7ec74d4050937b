import numpy as np
import pytest

from routewarp.align import align_trace
from routewarp.synth import synth_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """3 routes x 4 traversals on the default grid, with aligned series."""
    corpus = synth_corpus(3, 4, seed=0)
    return corpus, [align_trace(t) for t in corpus.traces]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def report():
    """``report(n, ok, detail)`` records one acceptance line for the terminal summary."""

    def add(n: int, title: str, ok: bool, detail: str) -> bool:
        _acceptance_lines.append(f"criterion {n} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
