import pytest

from vibrodiag import fixtures, intervalgebra


@pytest.fixture(scope="session")
def paper_table():
    return fixtures.paper_interval_table()


@pytest.fixture(scope="session")
def paper_rulebase(paper_table):
    return intervalgebra.compile_rules(paper_table)


@pytest.fixture(scope="session")
def paper_frames(paper_table):
    return fixtures.generate_frames(paper_table, n_frames=1000, seed=0)
