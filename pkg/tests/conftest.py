import pytest

from amstack import dsl, fixtures, graph as graphmod, substrate


def load_fixture(amg_name: str, substrate_name: str):
    """(resolved program, lowered graph, substrate model) for a bundled fixture."""
    program, diags = dsl.load_program(fixtures.path(amg_name))
    assert program is not None, [d.format_human() for d in diags]
    graph, _ = graphmod.lower(program)
    model = substrate.load_profiles(fixtures.path(substrate_name))
    return program, graph, model


@pytest.fixture
def robot_vacuum():
    return load_fixture("robot_vacuum.amg", "robot_vacuum_substrate.json")


@pytest.fixture
def av():
    return load_fixture("av.amg", "av_substrate.json")


@pytest.fixture
def orb():
    return load_fixture("orb.amg", "orb_substrate.json")


@pytest.fixture
def diamond():
    return load_fixture("diamond.amg", "diamond_substrate.json")
