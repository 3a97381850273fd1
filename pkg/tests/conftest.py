import pytest

from intellichain.agents import default_scripted_backend
from intellichain.config import (
    load_demo_graph,
    load_demo_learner_entries,
    load_demo_problem,
)


@pytest.fixture(scope="session")
def demo_graph():
    return load_demo_graph()


@pytest.fixture(scope="session")
def demo_problem():
    return load_demo_problem()


@pytest.fixture(scope="session")
def demo_entries():
    return load_demo_learner_entries()


@pytest.fixture()
def scripted_backend():
    return default_scripted_backend()
