import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from camwake.config import ExperimentConfig
from camwake.simcore import TimeBase


@pytest.fixture
def small_config(tmp_path):
    """A few short runs and a small training set, for end-to-end tests."""
    return ExperimentConfig(time=TimeBase(n_test=40), n_train=120, n_tests=3, gp_restarts=2,
                            gt_rollouts=20, n_particles=50, out_dir=str(tmp_path / "out"))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
