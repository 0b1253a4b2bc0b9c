import pytest

from src.lattice_tables.errors import BudgetExceededError, ValidationError
from src.lattice_tables.lattice_core import CATALOG_NAMES, catalog, lattice_from_order
from src.lattice_tables.lattice_table import Verdict
from src.lattice_tables.partitions import EqRel
from src.lattice_tables.pudlak import (
    GraphBuilder,
    alpha_cell,
    build_homogenized,
    build_pudlak,
    check_coherence,
    color_connectivity,
    dot_edge_multiset,
    graph_from_json,
    growth_stats,
    pentagon_pairs,
    table_of,
    verify_representation,
)
from utils.cache import CacheManager


def test_pentagon_pairs(two, chain3):
    assert pentagon_pairs(two, 0) == [(0, 0)]
    assert pentagon_pairs(chain3, 0) == [(0, 0), (0, 1), (1, 0)]
    assert pentagon_pairs(chain3, 1) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    cell = alpha_cell(chain3, 0)
    assert (cell.node_count, cell.edge_count) == (9, 12)
    with pytest.raises(ValidationError):
        alpha_cell(chain3, chain3.top)


def test_plain_growth(two):
    graph = build_pudlak(two, 2)
    assert graph.nodes_at == [2, 5, 20]
    assert graph.edges_at == [1, 5, 25]
    assert graph.mode == "pudlak"


def test_homogenized_growth(two):
    graph = build_homogenized(two, 2)
    assert graph.nodes_at == [2, 5, 62]
    assert graph.edges_at == [1, 5, 81]


def test_stage_zero_is_a_single_edge(chain3):
    for graph in (build_pudlak(chain3, 0), build_homogenized(chain3, 0)):
        assert graph.node_count(0) == 2
        assert list(graph.edges(0)) == [(0, 1, chain3.bottom)]


def test_budgets(two):
    with pytest.raises(BudgetExceededError):
        build_homogenized(two, 2, budget_nodes=10)
    with pytest.raises(BudgetExceededError):
        build_pudlak(two, 3, max_stages=2)
    with pytest.raises(ValidationError):
        GraphBuilder(lattice_from_order(["0"], []))


def test_provenance_and_stage_lookup(two):
    graph = build_homogenized(two, 2)
    prov = graph.provenance(2)
    assert (prov.stage, prov.cell, prov.parent_edge, prov.round, prov.copy) == (1, 0, 0, 1, 1)
    assert prov.pair == (0, 0) and prov.position == 1
    assert graph.provenance(0).cell is None
    assert graph.node_stage(5) == 2
    with pytest.raises(ValidationError):
        graph.node_count(3)


def test_color_connectivity(chain3):
    graph = build_homogenized(chain3, 1)
    n = graph.node_count(1)
    assert color_connectivity(graph, chain3.top) == EqRel.discrete(n)
    assert color_connectivity(graph, chain3.bottom) == EqRel.full(n)
    middle = color_connectivity(graph, chain3.id_of("m"))
    assert not middle.is_discrete() and not middle.is_full()


def test_stage_zero_table_is_not_injective(chain3):
    table = table_of(build_homogenized(chain3, 0), 0)
    m = chain3.id_of("m")
    assert table.rel[m] == table.rel[chain3.top] == EqRel.discrete(2)
    assert table.injectivity_witness() == (m, chain3.top)


def test_parallel_table_matches_serial():
    graph = build_homogenized(catalog("B2"), 1)
    assert table_of(graph, 1, jobs=3) == table_of(graph, 1)


def test_json_replay_and_dot_round_trip(chain3):
    graph = build_homogenized(chain3, 2)
    replayed = graph_from_json(graph.to_json())
    assert replayed.to_json() == graph.to_json()
    assert dot_edge_multiset(graph.to_dot(1)) == graph.edge_multiset(1)

    payload = graph.to_json(1)
    payload["edges"][0] = [0, 1, "m"]
    with pytest.raises(ValidationError):
        graph_from_json(payload)


def test_stats_histogram_by_name(two):
    rows = growth_stats(two, 2)
    assert [(r.nodes, r.edges) for r in rows] == [(2, 1), (5, 5), (20, 25)]
    assert rows[1].histogram == {"0": 5}


def test_stage_cache(tmp_path, chain3):
    cache = CacheManager(str(tmp_path), ttl_hours=1)
    first = GraphBuilder(chain3, cache=cache).grow_to(2)
    assert len(list(tmp_path.glob("*.json"))) == 1
    second = GraphBuilder(chain3, cache=cache).grow_to(2)
    assert second.to_json() == first.to_json()


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_coherence_first_stages(name):
    report = check_coherence(catalog(name), 1)
    assert report.ok
    assert [s["stage"] for s in report.stages] == [0]


@pytest.mark.slow
@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_coherence_two_stages(name):
    assert check_coherence(catalog(name), 2, budget_nodes=10**5).ok


def test_representation_of_small_chains(two, chain3):
    report = verify_representation(two, 0)
    assert report.verdict == Verdict.VERIFIED
    assert report.passed_stage == 0

    report = verify_representation(chain3, 1)
    assert report.passed_stage == 1
    assert report.stages[0].conditions["a"] is False
    assert report.stages[0].witnesses["a"] == ["m", "1"]


def test_representation_unknown_when_stages_run_out(chain3):
    report = verify_representation(chain3, 0)
    assert report.verdict == Verdict.UNKNOWN
    assert report.to_json()["passedStage"] is None


@pytest.mark.slow
@pytest.mark.parametrize("name", ["M3", "N5", "B2"])
def test_representation_of_non_chains(name):
    report = verify_representation(catalog(name), 3, budget_nodes=10**6)
    assert report.verdict == Verdict.VERIFIED
    assert report.passed_stage <= 3


def test_representation_diagnostic(two):
    report = verify_representation(two, 0, diagnostic=True, endo_budget=1000, seed=0)
    assert report.diagnostic == {"bestEffort": True, "complete": True, "sampled": 1, "outside": []}
