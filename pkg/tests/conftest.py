import numpy as np
import pytest

from irsradar.scene import IrsConfig, SceneConfig, build_channels, draw_reflectivities
from irsradar.validation import random_scene, random_unimodular


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def reference_scene():
    """Radar at the origin, target at (5000, 5000), three 8-element IRS."""
    return SceneConfig(
        radar_position=(0, 0),
        target_position=(5000, 5000),
        n_tx=8,
        n_rx=8,
        noise_variance=0.1,
        irs_list=(IrsConfig((500, 500), 8), IrsConfig((500, -800), 8), IrsConfig((300, 1300), 8)),
    )


@pytest.fixture(scope="session")
def reference_channels(reference_scene):
    return build_channels(reference_scene)


@pytest.fixture
def small_instance(rng):
    """Random small scene with waveform, phases and reflectivities (N_t=N_r=2, N_m=2, M=2, N=4)."""
    cfg = random_scene(rng, n_t=2, n_m=2, n_irs=2)
    ch = build_channels(cfg)
    x = random_unimodular(rng, (2, 4))
    nu = random_unimodular(rng, 4)
    alpha = draw_reflectivities(2, 7)
    return cfg, ch, x, nu, alpha


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Print and keep one PASS/FAIL line per acceptance criterion."""
    def record(number, title, passed, detail):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
