import numpy as np
import pytest

from qlmass import exact_slices as es


def rn_by(r, m, Q):
    """Closed-form Brown-York mass of an areal sphere in a static RN slice."""
    return r * (1 - np.sqrt(1 - 2 * m / r + Q * Q / r**2))


@pytest.fixture(scope="session")
def kerr_spec():
    return es.SpacetimeSpec("kerr", m=1.0, a=0.6)


@pytest.fixture(scope="session")
def rn_spec():
    return es.SpacetimeSpec("reissner_nordstrom", m=1.0, Q=0.6)


# criterion number -> list of (part, ok, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(criterion: int, part: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p[1] for p in parts)
        failed = [p[0] for p in parts if not p[1]]
        note = "" if ok else " (failing: " + ", ".join(failed) + ")"
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if ok else 'FAIL'}{note}")
