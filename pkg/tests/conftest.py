import numpy as np
import pytest

from fresnelio import catalog as C
from fresnelio import corpus


@pytest.fixture
def params():
    return C.Params(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def fresnel_corpus():
    return corpus.fresnel_corpus()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or \
        __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        checks = mod.RESULTS.get(n)
        if not checks:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {mod.TITLES[n]}")
            continue
        ok = all(c[1] for c in checks)
        parts = "; ".join(f"{label}: {'ok' if good else 'FAILED'} ({detail})"
                          for label, good, detail in checks)
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {mod.TITLES[n]} | {parts}")
