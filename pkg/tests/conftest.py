import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asymstft.stft import StftConfig  # noqa: E402
from asymstft.window import WindowParams, make_window_pair  # noqa: E402

ACCEPTANCE_LINES: list[str] = []

# valid (n1, n2, hop) triples used by sweeps across modules
SWEEP_TRIPLES = [
    (64, 448, 64),
    (32, 200, 24),
    (16, 112, 16),
    (64, 960, 64),
    (64, 192, 64),
    (8, 64, 8),
    (100, 300, 60),
    (1, 30, 2),
    (48, 480, 160),
    (20, 150, 50),
    (64, 224, 32),
    (128, 896, 128),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)


@pytest.fixture
def default_pair():
    return make_window_pair(WindowParams())


@pytest.fixture
def verbatim_pair():
    return make_window_pair(WindowParams(tail_variant="verbatim"))


@pytest.fixture
def config():
    return StftConfig.from_params()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
