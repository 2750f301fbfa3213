import numpy as np
import pytest

from datesort.features import FeatureParams
from datesort.pipeline import prepare
from datesort.synthcrop import SimulatorConfig, Variety, generate_dataset


def disk_mask(r, size=None, cy=None, cx=None):
    size = size or 2 * r + 9
    cy = size / 2 if cy is None else cy
    cx = size / 2 if cx is None else cx
    yy, xx = np.mgrid[0:size, 0:size]
    return (yy + 0.5 - cy) ** 2 + (xx + 0.5 - cx) ** 2 <= r * r


def ellipse_mask(a, b, size=None, cy=None, cx=None, theta=0.0):
    size = size or int(2 * max(a, b) + 9)
    cy = size / 2 if cy is None else cy
    cx = size / 2 if cx is None else cx
    yy, xx = np.mgrid[0:size, 0:size]
    dx, dy = xx + 0.5 - cx, yy + 0.5 - cy
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


@pytest.fixture(scope="session")
def small_samples():
    """48 samples, six per variety, on a 32-pixel canvas."""
    return generate_dataset({v: 6 for v in Variety}, 3, SimulatorConfig(image_size=32))


@pytest.fixture(scope="session")
def small_data(small_samples):
    return prepare(small_samples, SimulatorConfig().reference, FeatureParams(size=32))


@pytest.fixture(scope="session")
def small_model(small_data):
    from datesort.neuralmodel import ModelConfig, init, train
    cfg = ModelConfig(input_size=32, epochs=4, batch_size=16, seed=1)
    model = init(cfg)
    train(model, small_data, cfg)
    return model


def pytest_terminal_summary(terminalreporter):
    from oracles import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
