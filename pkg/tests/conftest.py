from pathlib import Path

import pytest

from pathfair.report import AuditConfig, run_audit
from pathfair.scorer import SeparationWarning

ADULT_DIR = Path(__file__).resolve().parents[1] / "data" / "adult"
ADULT_TRAIN = ADULT_DIR / "adult.data"
ADULT_TEST = ADULT_DIR / "adult.test"

needs_adult = pytest.mark.skipif(not ADULT_TRAIN.exists(), reason="Adult data files not present")


@pytest.fixture(scope="session")
def adult_report():
    if not ADULT_TRAIN.exists():
        pytest.skip("Adult data files not present")
    # a few sparse Adult levels are quasi-separated; the warning is expected
    with pytest.warns(SeparationWarning):
        return run_audit(AuditConfig(train=str(ADULT_TRAIN), test=str(ADULT_TEST)), write=False)


@pytest.fixture(scope="session")
def adult_report_rounded():
    if not ADULT_TRAIN.exists():
        pytest.skip("Adult data files not present")
    with pytest.warns(SeparationWarning):
        return run_audit(AuditConfig(train=str(ADULT_TRAIN), test=str(ADULT_TEST), round_coefficient=3), write=False)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
