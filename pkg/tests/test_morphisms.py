import pytest

from src.lattice_tables import morphisms
from src.lattice_tables.errors import ValidationError
from src.lattice_tables.lattice_core import canonical_embedding, catalog, identity_hom, make_usl_hom
from src.lattice_tables.lattice_table import LatticeTable, Verdict
from src.lattice_tables.morphisms import (
    EmbeddingReport,
    SlotOrder,
    assemble_system,
    corrupt_embedding,
    embed_graph,
    embedding_from_json,
    embedding_to_json,
    padded_index,
    recolor,
    verify_embedding,
)
from src.lattice_tables.pudlak import build_homogenized


def hom_between(source, target):
    return canonical_embedding(catalog(source), catalog(target))


def test_slot_order():
    slots = SlotOrder()
    assert slots.slot(0, 0) == (1, 1)
    assert slots.first(0, 4) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert slots.first(1, 3) == [(2, 1), (2, 2), (2, 3)]
    assert slots.slot(0, 6) == (3, 1)


def test_recolor_uses_the_adjoint():
    hom = hom_between("2", "3-chain")
    graph = build_homogenized(catalog("3-chain"), 1)
    recolored = recolor(graph, hom)
    assert recolored.lattice == catalog("2")
    assert set(recolored.edge_color) == {0}
    assert set(recolored.pent_pair) == {(0, 0)}
    assert recolored.edge_u == graph.edge_u
    with pytest.raises(ValidationError):
        recolor(build_homogenized(catalog("2"), 0), hom)


def test_identity_embedding_is_the_identity():
    emb = embed_graph(identity_hom(catalog("2")), 2)
    assert emb.target_stage == 2
    assert emb.node_map == tuple(range(62))
    assert emb.stage_maps() == [0, 1, 2]
    assert verify_embedding(emb).ok


@pytest.mark.parametrize(
    "source, target, stage",
    [("2", "3-chain", 2), ("2", "B2", 3), ("3-chain", "N5", 2)],
)
def test_embeddings_verify(source, target, stage):
    emb = embed_graph(hom_between(source, target), 1)
    assert emb.target_stage == stage
    assert emb.stage_maps() == [0, stage]
    report = verify_embedding(emb)
    assert report.verdict == Verdict.VERIFIED
    assert set(report.checks) == {"injective", "baseEdge", "colors", "relations", "subtable"}


def test_allocation_log():
    emb = embed_graph(hom_between("2", "3-chain"), 1)
    slots = [entry.slot for entry in emb.allocation]
    assert slots == [(1, 1), (1, 2), (2, 1)]
    assert {entry.pair for entry in emb.allocation} == {("0", "0")}
    assert all(entry.target_edge == 0 for entry in emb.allocation)


def test_non_injective_hom_is_rejected():
    hom = make_usl_hom(catalog("B2"), catalog("2"), (0, 1, 1, 1))
    with pytest.raises(ValidationError):
        embed_graph(hom, 1)


def test_corrupted_embedding_is_refuted():
    emb = corrupt_embedding(embed_graph(hom_between("2", "3-chain"), 1))
    report = verify_embedding(emb)
    assert report.verdict == Verdict.REFUTED
    assert report.checks["baseEdge"] is False
    assert report.witnesses
    with pytest.raises(ValidationError):
        corrupt_embedding(emb, 1, 1)


def test_embedding_json_rebuild():
    emb = embed_graph(hom_between("3-chain", "N5"), 1)
    payload = embedding_to_json(emb)
    assert payload["stageMap"] == [0, 2]
    rebuilt = embedding_from_json(payload)
    assert rebuilt.node_map == emb.node_map
    assert verify_embedding(rebuilt).ok

    payload["targetStage"] = 5
    with pytest.raises(ValidationError):
        embedding_from_json(payload)


def test_padded_index():
    assert padded_index([0, 2, 4], 3) == 1
    assert padded_index([0, 2, 4], 9) == 2
    with pytest.raises(ValidationError):
        padded_index([1, 2], 0)


def test_single_level_system():
    assembly = assemble_system([catalog("2")], [], top_stage=1)
    assert assembly.stages == [1]
    assert assembly.markers == [[0, 1]]
    assert assembly.h == [0]
    assert assembly.verdict == Verdict.VERIFIED


def test_two_level_system():
    lattices = [catalog("2"), catalog("3-chain")]
    assembly = assemble_system(lattices, [hom_between("2", "3-chain")], top_stage=1)
    assert assembly.stages == [2, 1]
    assert assembly.level_maps == [[0, 2]]
    assert assembly.markers == [[0, 1, 2], [0, 2]]
    assert assembly.verdict == Verdict.VERIFIED
    assert assembly.table_at(1, 1) is assembly.tables[1][0]
    assert assembly.table_at(1, 2) is assembly.tables[1][1]
    assert set(assembly.table_at(1, 2).nodes) <= set(assembly.table_at(0, 2).nodes)
    with pytest.raises(ValidationError):
        assembly.table_at(2, 0)


def test_system_shape_is_checked():
    with pytest.raises(ValidationError):
        assemble_system([catalog("2"), catalog("3-chain")], [], top_stage=1)
    with pytest.raises(ValidationError):
        assemble_system([catalog("3-chain"), catalog("2")], [hom_between("2", "3-chain")], top_stage=1)


@pytest.mark.slow
def test_three_level_system():
    lattices = [catalog("2"), catalog("3-chain"), catalog("B2")]
    homs = [hom_between("2", "3-chain"), hom_between("3-chain", "B2")]
    assembly = assemble_system(lattices, homs, top_stage=1, budget_nodes=10**6)
    assert assembly.verdict == Verdict.VERIFIED
    assert assembly.level_maps[1] == [0, 2]
    assert assembly.stages[2] == 1
    assert assembly.h == [0, 0, 0]


def failing_report(embedding):
    return EmbeddingReport(checks={"injective": True, "colors": False}, witnesses={"colors": [0, 1, "0"]})


def test_failed_level_embedding_is_a_refuted_clause(monkeypatch):
    monkeypatch.setattr(morphisms, "verify_embedding", failing_report)
    lattices = [catalog("2"), catalog("3-chain")]
    assembly = assemble_system(lattices, [hom_between("2", "3-chain")], top_stage=1)
    assert assembly.verdict == Verdict.REFUTED
    clause = assembly.clauses["embedding"]
    assert clause.verdict == Verdict.REFUTED
    assert clause.witness == ("colors",)
    assert assembly.clauses["transport"].verdict == Verdict.VERIFIED
    assert assembly.to_json()["clauses"]["embedding"]["witness"] == ["colors"]


def with_node(table, position, node):
    nodes = table.nodes[:position] + (node,) + table.nodes[position + 1:]
    return LatticeTable(nodes=nodes, labels=table.labels, rel=table.rel)


def test_system_clauses_keep_the_first_failure(two_tables):
    small, big = two_tables
    stage_tables = [[small, with_node(big, 1, 100)], [small, with_node(big, 1, 200)]]
    clause = morphisms._stage_failure(stage_tables)
    assert (clause.detail, clause.witness) == ("level 0 stage 0", (1,))

    carrier_tables = [[small, big], [with_node(small, 1, 100), big], [with_node(small, 1, 200)]]
    clause = morphisms._carrier_failure([[1], [1]], carrier_tables)
    assert (clause.detail, clause.witness) == ("level 1 stage 0", (100,))
