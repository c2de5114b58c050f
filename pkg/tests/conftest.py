import numpy as np
import pytest

from deeploop.image import GrayImage


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, w=160, h=120):
    return GrayImage.from_array(rng.integers(0, 256, size=(h, w), dtype=np.uint8))


# acceptance criteria register their verdicts here; printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
