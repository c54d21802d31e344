from __future__ import annotations

import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

CORPUS = HERE.parent / "corpus"
TRAFFIC = CORPUS / "trafficlight"


@pytest.fixture(scope="session")
def traffic():
    from vove.model.machine import load_machine
    return load_machine(TRAFFIC / "TrafficLight.mch")


@pytest.fixture(scope="session")
def traffic_ref():
    from vove.model.machine import load_machine
    return load_machine(TRAFFIC / "TrafficLight_Ref.mch")


@pytest.fixture(scope="session")
def traffic_sim():
    from vove.sim.config import load_sim_config
    return load_sim_config(TRAFFIC / "TrafficLight_Sim.json")


@pytest.fixture(scope="session")
def corpus_project():
    from vove.vo.project import load_project, load_project_config
    return load_project(load_project_config(TRAFFIC / "project.json"))


@pytest.fixture(scope="session")
def corpus_report(corpus_project):
    return corpus_project.evaluate()
