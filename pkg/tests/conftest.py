import numpy as np
import pytest
from hypothesis import settings

from rthsdeg.control import ControllerConfig
from rthsdeg.degradation import DegradationModel
from rthsdeg.engine import EngineConfig, resample_motion, run_rths
from rthsdeg.motion import MotionSpec, generate_kanai_tajimi
from rthsdeg.plant import VirtualPlant
from rthsdeg.structure import BuildingModel

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture(scope="session")
def building():
    return BuildingModel()


@pytest.fixture(scope="session")
def motion():
    """Default ground motion on the default engine grid."""
    return resample_motion(generate_kanai_tajimi(MotionSpec()), EngineConfig().dt)


@pytest.fixture(scope="session")
def nominal_record(building, motion):
    return run_rths(building, VirtualPlant(), ControllerConfig(), motion)


@pytest.fixture(scope="session")
def degraded_record(building, motion):
    plant = VirtualPlant().degraded(DegradationModel(), 120.0)
    return run_rths(building, plant, ControllerConfig(), motion)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects the one-line verdicts printed at the end of the session."""
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
