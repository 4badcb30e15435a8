from pathlib import Path

import pytest

from bus import MessageBus
from config import SCENARIOS_DIR
from knowledge import Knowledge
from microcontrollers import Ensemble
from phone_sim import PhoneSimulator
from scenario import TraceRecorder, load_scenario

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def knowledge():
    return Knowledge()


@pytest.fixture
def bus():
    return MessageBus()


@pytest.fixture
def phone():
    return PhoneSimulator(clock=540, meeting_start=600, meeting_end=660)


@pytest.fixture
def ensemble(knowledge, bus, phone):
    """A deployed adaptive ensemble"""
    deployed = Ensemble(knowledge, bus, phone)
    deployed.deploy()
    return deployed


@pytest.fixture
def recorder(ensemble, knowledge, bus):
    return TraceRecorder(knowledge, bus)


@pytest.fixture
def scenario_file():
    def load(name):
        return load_scenario(SCENARIOS_DIR / f"{name}.scn")
    return load


@pytest.fixture
def golden():
    def read(name):
        return (GOLDEN_DIR / f"{name}.trace").read_text(encoding="utf-8")
    return read
