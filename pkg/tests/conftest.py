from pathlib import Path

import pytest

from src.lattice_tables.lattice_core import catalog
from src.lattice_tables.pudlak import build_homogenized, table_of

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def two():
    return catalog("2")


@pytest.fixture
def chain3():
    return catalog("3-chain")


@pytest.fixture
def two_tables():
    """Homogenized tables of the two-element lattice at stages 0 and 1."""
    graph = build_homogenized(catalog("2"), 1)
    return table_of(graph, 0), table_of(graph, 1)
