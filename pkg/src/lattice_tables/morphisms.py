"""
Embeddings of graphs and tables induced by (0,1,∨)-homomorphisms.

For φ: L⁰ → L¹ the graph of L¹ is recolored through the Galois adjoint φ*
and mapped into the graph of L⁰: base edge to base edge, and each source
pentagon to a target pentagon of the image pair on the image edge. Target
pentagons come from fresh cell slots, so no two source pentagons share one.
"""

from __future__ import annotations

import dataclasses
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InternalConsistencyError, ValidationError
from .lattice_core import FiniteLattice, UslHom, galois_adjoint, lattice_from_json, make_usl_hom
from .lattice_table import ClauseResult, LatticeTable, Verdict, check_subtable
from .partitions import EqRel
from .pudlak import ColoredGraph, GraphBuilder, color_connectivity, table_of

logger = logging.getLogger(__name__)

Slot = Tuple[int, int]


def recolor(graph: ColoredGraph, hom: UslHom) -> ColoredGraph:
    """
    𝔠(φ): the same nodes and edges with every color β replaced by φ*β.

    ``graph`` is over the codomain of φ; the result is over its domain.
    """
    if graph.lattice != hom.target:
        raise ValidationError("graph lattice is not the codomain of the homomorphism")
    adjoint = galois_adjoint(hom)
    out = ColoredGraph(hom.source, graph.homogenized)
    out.stage = graph.stage
    out.nodes_at = list(graph.nodes_at)
    out.edges_at = list(graph.edges_at)
    out.node_cell = list(graph.node_cell)
    out.node_position = list(graph.node_position)
    out.edge_u = list(graph.edge_u)
    out.edge_v = list(graph.edge_v)
    out.edge_cell = list(graph.edge_cell)
    out.edge_color = [adjoint[c] for c in graph.edge_color]
    if hom.source.top in out.edge_color:
        raise InternalConsistencyError("recoloring produced an edge colored 1")
    out.cell_edge = list(graph.cell_edge)
    out.cell_round = list(graph.cell_round)
    out.cell_copy = list(graph.cell_copy)
    out.cell_stage = list(graph.cell_stage)
    out.cell_index = dict(graph.cell_index)
    out.edge_cells = {e: list(cells) for e, cells in graph.edge_cells.items()}
    out.pent_cell = list(graph.pent_cell)
    out.pent_first_node = list(graph.pent_first_node)
    out.pent_pair = [(adjoint[a1], adjoint[a2]) for a1, a2 in graph.pent_pair]
    # image pairs may repeat inside one cell; the index keeps the first
    for p, (a1, a2) in enumerate(out.pent_pair):
        out.pentagon_index.setdefault((out.pent_cell[p], a1, a2), p)
    out._edge_lookup = dict(graph._edge_lookup)
    return out


class SlotOrder:
    """Cell slots ``(round, copy)`` available on an edge born in a given round, by first stage."""

    def __init__(self):
        self._lists: Dict[int, Tuple[List[Slot], int]] = {}

    def slot(self, born: int, index: int) -> Slot:
        slots, level = self._lists.get(born, ([], born + 1))
        while len(slots) <= index:
            slots.extend(
                (r, k)
                for r in range(born + 1, level + 1)
                for k in range(1, level + 1)
                if max(r, k) == level
            )
            level += 1
        self._lists[born] = (slots, level)
        return slots[index]

    def first(self, born: int, count: int) -> List[Slot]:
        return [self.slot(born, i) for i in range(count)]


def _slot_key(graph: ColoredGraph, cell: int) -> Tuple[int, int, int]:
    r, k = graph.cell_round[cell], graph.cell_copy[cell]
    return max(r, k), r, k


@dataclass(frozen=True)
class AllocationEntry:
    source_pentagon: int
    source_edge: int
    target_edge: int
    pair: Tuple[str, str]
    slot: Slot
    target_pentagon: int
    target_stage: int

    def to_json(self) -> dict:
        return {
            "sourcePentagon": self.source_pentagon,
            "sourceEdge": self.source_edge,
            "targetEdge": self.target_edge,
            "pair": list(self.pair),
            "slot": list(self.slot),
            "targetPentagon": self.target_pentagon,
            "targetStage": self.target_stage,
        }


@dataclass(frozen=True)
class TableEmbedding:
    """Θ(φ) restricted to source stage n, landing in target stage m(n)."""

    hom: UslHom
    adjoint: Tuple[int, ...]
    source_stage: int
    target_stage: int
    source_graph: ColoredGraph
    target_graph: ColoredGraph
    node_map: Tuple[int, ...]
    edge_map: Tuple[int, ...]
    node_stage_needed: Tuple[int, ...]
    allocation: Tuple[AllocationEntry, ...] = ()

    def stage_map(self, stage: int) -> int:
        """m(j): least target stage holding the image of source stage j."""
        if not 0 <= stage <= self.source_stage:
            raise ValidationError(f"source stage {stage} outside 0..{self.source_stage}")
        return max(self.node_stage_needed[: self.source_graph.node_count(stage)])

    def stage_maps(self) -> List[int]:
        return [self.stage_map(j) for j in range(self.source_stage + 1)]


@dataclass
class _SymbolicTarget:
    """Target edges and pentagons named by slot before the target graph exists."""

    edge_round: List[int] = field(default_factory=lambda: [0])
    edge_stage: List[int] = field(default_factory=lambda: [0])
    pentagons: List[Tuple[int, int, int, Tuple[int, int], int]] = field(default_factory=list)
    pentagon_edges: List[Tuple[int, ...]] = field(default_factory=list)

    def add_pentagon(self, parent: int, slot: Slot, pair: Tuple[int, int]) -> int:
        r, k = slot
        stage = max(r, k, self.edge_stage[parent])
        edges = []
        for _ in range(4):
            edges.append(len(self.edge_round))
            self.edge_round.append(r)
            self.edge_stage.append(stage)
        self.pentagons.append((parent, r, k, pair, stage))
        self.pentagon_edges.append(tuple(edges))
        return len(self.pentagons) - 1


def embed_graph(
    hom: UslHom,
    source_stage: int,
    budget_nodes: Optional[int] = None,
    source_builder: Optional[GraphBuilder] = None,
    target_builder: Optional[GraphBuilder] = None,
) -> TableEmbedding:
    """
    Θ(φ) on stage ``source_stage`` of the homogenized graph of the codomain.

    Allocation runs symbolically first: source edges in id order, the cells
    on each edge in slot order, pentagons in pair order. The t-th source
    pentagon whose image pair on a target edge is P takes the t-th slot of
    that edge. The least target stage covering every used slot is then built
    and the slots are resolved to node ids.

    Raises:
        ValidationError: φ is not an injective (0,1,∨)-homomorphism
        BudgetExceededError: The needed target stage does not fit the budgets
    """
    if not hom.injective:
        raise ValidationError("embeddings need an injective homomorphism")
    L0, L1 = hom.source, hom.target
    source_builder = source_builder or GraphBuilder(L1, True, budget_nodes)
    target_builder = target_builder or GraphBuilder(L0, True, budget_nodes)
    if source_builder.lattice != L1 or target_builder.lattice != L0:
        raise ValidationError("builders do not match the homomorphism's lattices")
    source = source_builder.grow_to(source_stage)
    recolored = recolor(source, hom)

    cell_pentagons: Dict[int, List[int]] = defaultdict(list)
    for p in range((source.node_count(source_stage) - 2) // 3):
        cell_pentagons[source.pent_cell[p]].append(p)

    slots = SlotOrder()
    symbolic = _SymbolicTarget()
    used: Dict[Tuple[int, Tuple[int, int]], int] = defaultdict(int)
    edge_to_symbolic = [0] * source.edge_count(source_stage)
    node_needed = [0] * source.node_count(source_stage)
    pentagon_to_symbolic: Dict[int, int] = {}

    # pentagon edges get larger ids than their parent, so parents are mapped first
    for e in range(source.edge_count(source_stage)):
        te = edge_to_symbolic[e]
        cells = [c for c in source.cells_on(e) if source.cell_stage[c] <= source_stage]
        for c in sorted(cells, key=lambda c: _slot_key(source, c)):
            for p in cell_pentagons[c]:
                pair = recolored.pent_pair[p]
                slot = slots.slot(symbolic.edge_round[te], used[(te, pair)])
                used[(te, pair)] += 1
                sym = symbolic.add_pentagon(te, slot, pair)
                pentagon_to_symbolic[p] = sym
                stage = symbolic.pentagons[sym][4]
                for node in source.pentagon_nodes(p):
                    node_needed[node] = stage
                for s_edge, t_edge in zip(source.pentagon_edges(p), symbolic.pentagon_edges[sym]):
                    edge_to_symbolic[s_edge] = t_edge

    target_stage = max(node_needed)
    target = target_builder.grow_to(target_stage)

    actual_edge = [0] * len(symbolic.edge_round)
    resolved = [0] * len(symbolic.pentagons)
    for sym, (te, r, k, pair, _) in enumerate(symbolic.pentagons):
        cell = target.cell(actual_edge[te], r, k)
        pentagon = None if cell is None else target.pentagon(cell, pair)
        if pentagon is None:
            raise InternalConsistencyError(
                f"slot {(r, k)} for pair {pair} is missing on target edge {actual_edge[te]}"
            )
        resolved[sym] = pentagon
        for t_edge, edge in zip(symbolic.pentagon_edges[sym], target.pentagon_edges(pentagon)):
            actual_edge[t_edge] = edge

    node_map = list(range(2)) + [0] * (len(node_needed) - 2)
    allocation = []
    for p in sorted(pentagon_to_symbolic):
        sym = pentagon_to_symbolic[p]
        for s_node, t_node in zip(source.pentagon_nodes(p), target.pentagon_nodes(resolved[sym])):
            node_map[s_node] = t_node
        te, r, k, pair, stage = symbolic.pentagons[sym]
        allocation.append(AllocationEntry(
            source_pentagon=p,
            source_edge=source.cell_edge[source.pent_cell[p]],
            target_edge=actual_edge[te],
            pair=(L0.names[pair[0]], L0.names[pair[1]]),
            slot=(r, k),
            target_pentagon=resolved[sym],
            target_stage=stage,
        ))
    logger.info(
        f"🪢 Embedded stage {source_stage} ({source.node_count(source_stage)} nodes) "
        f"into target stage {target_stage} ({target.node_count(target_stage)} nodes)"
    )
    return TableEmbedding(
        hom=hom,
        adjoint=galois_adjoint(hom),
        source_stage=source_stage,
        target_stage=target_stage,
        source_graph=source,
        target_graph=target,
        node_map=tuple(node_map),
        edge_map=tuple(actual_edge[te] for te in edge_to_symbolic),
        node_stage_needed=tuple(node_needed),
        allocation=tuple(allocation),
    )


# Verification

@dataclass
class EmbeddingReport:
    checks: Dict[str, bool] = field(default_factory=dict)
    witnesses: Dict[str, list] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    @property
    def verdict(self) -> Verdict:
        return Verdict.VERIFIED if self.ok else Verdict.REFUTED

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "checks": self.checks, "witnesses": self.witnesses}


def _difference_witness(p: EqRel, q: EqRel) -> Optional[Tuple[int, int]]:
    """A pair related in exactly one of two relations on the same carrier."""
    for i, (a, b) in enumerate(zip(p.block_of, q.block_of)):
        if a != b:
            return min(a, b), i
    return None


def verify_embedding(embedding: TableEmbedding) -> EmbeddingReport:
    """
    Check a table embedding against its graphs.

    Checks: the node map is injective and fixes the base edge, every source
    edge lands on a target edge of color φ*β, ``e(φα)`` on the source equals
    ``e(α)`` of the target stage restricted to the image, and the image table
    is a sub-table of the target table.
    """
    hom = embedding.hom
    L0 = hom.source
    source, target = embedding.source_graph, embedding.target_graph
    n, m = embedding.source_stage, embedding.target_stage
    node_map = embedding.node_map
    report = EmbeddingReport()

    report.checks["injective"] = len(set(node_map)) == len(node_map)
    report.checks["baseEdge"] = tuple(node_map[:2]) in ((0, 1), (1, 0))
    if not report.checks["baseEdge"]:
        report.witnesses["baseEdge"] = list(node_map[:2])

    report.checks["colors"] = True
    for e, (u, v, color) in enumerate(source.edges(n)):
        image = target.edge_between(node_map[u], node_map[v])
        wanted = embedding.adjoint[color]
        if image is None or image >= target.edge_count(m) or target.edge_color[image] != wanted:
            report.checks["colors"] = False
            report.witnesses["colors"] = [u, v, source.lattice.names[color]]
            break

    target_table = table_of(target, m)
    source_rels = [color_connectivity(source, hom(alpha), n) for alpha in L0.elements]
    report.checks["relations"] = True
    for alpha in L0.elements:
        restricted = target_table.rel[alpha].restrict(node_map)
        witness = _difference_witness(source_rels[alpha], restricted)
        if witness is not None:
            report.checks["relations"] = False
            report.witnesses["relations"] = [witness[0], witness[1], L0.names[alpha]]
            break

    if report.checks["injective"]:
        image_table = LatticeTable(nodes=node_map, labels=L0, rel=tuple(source_rels))
        sub = check_subtable(image_table, target_table)
        report.checks["subtable"] = sub.ok
        if not sub.ok:
            report.witnesses["subtable"] = list(sub.witness)
    logger.info(f"🔍 Embedding check {n}→{m}: {report.verdict.value}")
    return report


def corrupt_embedding(embedding: TableEmbedding, a: int = 0, b: int = 2) -> TableEmbedding:
    """Copy of ``embedding`` with the images of source nodes ``a`` and ``b`` swapped."""
    size = len(embedding.node_map)
    if not (0 <= a < size and 0 <= b < size) or a == b:
        raise ValidationError(f"cannot swap nodes {a} and {b} of a {size}-node map")
    node_map = list(embedding.node_map)
    node_map[a], node_map[b] = node_map[b], node_map[a]
    return dataclasses.replace(embedding, node_map=tuple(node_map))


def embedding_to_json(embedding: TableEmbedding) -> dict:
    hom = embedding.hom
    return {
        "domain": hom.source.to_json(),
        "codomain": hom.target.to_json(),
        "hom": hom.to_json(),
        "sourceStage": embedding.source_stage,
        "targetStage": embedding.target_stage,
        "stageMap": embedding.stage_maps(),
        "nodeMap": list(embedding.node_map),
        "allocation": [entry.to_json() for entry in embedding.allocation],
    }


def embedding_from_json(payload: dict, budget_nodes: Optional[int] = None) -> TableEmbedding:
    """
    Rebuild both graphs and the allocation, keeping the stored node map.

    Raises:
        ValidationError: The payload is malformed or disagrees with the rebuild
    """
    try:
        L0 = lattice_from_json(payload["domain"])
        L1 = lattice_from_json(payload["codomain"])
        images = [L1.id_of(payload["hom"][name]) for name in L0.names]
        source_stage = int(payload["sourceStage"])
        target_stage = int(payload["targetStage"])
        node_map = tuple(int(x) for x in payload["nodeMap"])
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed embedding file: {e}") from e
    rebuilt = embed_graph(make_usl_hom(L0, L1, images), source_stage, budget_nodes)
    if rebuilt.target_stage != target_stage or len(rebuilt.node_map) != len(node_map):
        raise ValidationError("embedding file does not match the rebuilt allocation")
    return dataclasses.replace(rebuilt, node_map=node_map)


# Finite direct systems

def padded_index(markers: Sequence[int], k: int) -> int:
    """Largest j with ``markers[j] ≤ k``; stage k of a level repeats that table."""
    best = None
    for j, mark in enumerate(markers):
        if mark <= k:
            best = j
    if best is None:
        raise ValidationError(f"index {k} precedes the first marker {markers[0] if markers else None}")
    return best


@dataclass
class SystemAssembly:
    """
    Tables Θⁱⱼ for a chain L⁰ → L¹ → ... → Lᵏ, all carried by level-0 node ids.

    ``level_maps[i][j]`` is mᵢ(j), the stage of level i holding stage j of
    level i+1; ``markers[i][j]`` composes those maps down to level 0, and
    ``h[i] = markers[i][0]``.
    """

    lattices: List[FiniteLattice]
    homs: List[UslHom]
    stages: List[int]
    level_maps: List[List[int]]
    markers: List[List[int]]
    tables: List[List[LatticeTable]]
    embeddings: List[TableEmbedding] = field(default_factory=list)
    clauses: Dict[str, ClauseResult] = field(default_factory=dict)

    @property
    def h(self) -> List[int]:
        return [marks[0] for marks in self.markers]

    @property
    def verdict(self) -> Verdict:
        return Verdict.combine(c.verdict for c in self.clauses.values())

    def table_at(self, level: int, k: int) -> LatticeTable:
        """Θⁱₖ with padding: the stage-j table for the largest j whose marker is ≤ k."""
        if not 0 <= level < len(self.tables):
            raise ValidationError(f"no level {level}")
        return self.tables[level][padded_index(self.markers[level], k)]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "levels": [
                {
                    "elements": list(L.names),
                    "stages": self.stages[i],
                    "markers": self.markers[i],
                    "h": self.markers[i][0],
                    "nodes": [t.size for t in self.tables[i]],
                }
                for i, L in enumerate(self.lattices)
            ],
            "levelMaps": self.level_maps,
            "clauses": {name: c.to_json() for name, c in self.clauses.items()},
        }


def _carrier_failure(level_maps, tables) -> Optional[ClauseResult]:
    for i, maps in enumerate(level_maps):
        for j, big_stage in enumerate(maps):
            big = tables[i][big_stage]
            missing = [x for x in tables[i + 1][j].nodes if x not in big._positions]
            if missing:
                return ClauseResult(Verdict.REFUTED, f"level {i + 1} stage {j}", (missing[0],))
    return None


def _stage_failure(tables) -> Optional[ClauseResult]:
    for i, level in enumerate(tables):
        for j in range(len(level) - 1):
            sub = check_subtable(level[j], level[j + 1])
            if not sub.ok:
                return ClauseResult(Verdict.REFUTED, f"level {i} stage {j}", sub.witness)
    return None


def _transport_failure(lattices, homs, level_maps, tables) -> Optional[ClauseResult]:
    for i, hom in enumerate(homs):
        L = lattices[i]
        for j, big_stage in enumerate(level_maps[i]):
            small, big = tables[i + 1][j], tables[i][big_stage]
            positions = [big.position(x) for x in small.nodes]
            for alpha in L.elements:
                restricted = big.rel[alpha].restrict(positions)
                witness = _difference_witness(small.rel[hom(alpha)], restricted)
                if witness is not None:
                    return ClauseResult(
                        Verdict.REFUTED,
                        f"level {i + 1} stage {j}",
                        (small.nodes[witness[0]], small.nodes[witness[1]], L.names[alpha]),
                    )
    return None


def _check_system(lattices, homs, level_maps, tables) -> Dict[str, ClauseResult]:
    """Each clause reports its first failure in (level, stage) order."""
    verified = ClauseResult(Verdict.VERIFIED)
    carrier = _carrier_failure(level_maps, tables)
    clauses = {
        "carrier": carrier or verified,
        "stages": _stage_failure(tables) or verified,
    }
    if carrier is None:
        clauses["transport"] = _transport_failure(lattices, homs, level_maps, tables) or verified
    else:
        clauses["transport"] = ClauseResult(Verdict.UNKNOWN, "carrier inclusion failed")
    return clauses


def assemble_system(
    lattices: Sequence[FiniteLattice],
    homs: Sequence[UslHom],
    top_stage: int,
    budget_nodes: Optional[int] = None,
) -> SystemAssembly:
    """
    Embed stage ``top_stage`` of the last level down the chain and tabulate every level.

    Stage counts are fixed top-down: level k uses ``top_stage`` and level i
    uses mᵢ of the top stage of level i+1. mᵢ(j) is the least stage of level
    i that holds every cell slot the allocation uses for stage j, so the
    image lies in no earlier stage; a failed transport or sub-table clause is
    reported against that allocation rather than retried at later stages.

    A level embedding that fails its own check is recorded under the
    ``embedding`` clause (refuted, with the failing checks as witness) and
    its node map is still used for the remaining levels.

    Raises:
        ValidationError: The chain is inconsistent
        BudgetExceededError: Some level's stage does not fit the budgets
    """
    lattices = list(lattices)
    homs = list(homs)
    if not lattices:
        raise ValidationError("a direct system needs at least one lattice")
    if len(homs) != len(lattices) - 1:
        raise ValidationError(f"{len(lattices)} lattices need {len(lattices) - 1} homomorphisms")
    for i, hom in enumerate(homs):
        if hom.source != lattices[i] or hom.target != lattices[i + 1]:
            raise ValidationError(f"homomorphism {i} does not map level {i} to level {i + 1}")

    k = len(lattices) - 1
    builders = [GraphBuilder(L, True, budget_nodes) for L in lattices]
    stages = [0] * (k + 1)
    stages[k] = top_stage
    embeddings: List[Optional[TableEmbedding]] = [None] * k
    embedding_clause = ClauseResult(Verdict.VERIFIED)
    for i in range(k - 1, -1, -1):
        emb = embed_graph(homs[i], stages[i + 1], budget_nodes, builders[i + 1], builders[i])
        report = verify_embedding(emb)
        if not report.ok and embedding_clause.verdict == Verdict.VERIFIED:
            failed = tuple(name for name, ok in report.checks.items() if not ok)
            logger.warning(f"⚠️ Embedding of level {i + 1} into level {i} failed: {failed}")
            embedding_clause = ClauseResult(Verdict.REFUTED, f"level {i + 1} into level {i}", failed)
        embeddings[i] = emb
        stages[i] = emb.target_stage
    if k == 0:
        builders[0].grow_to(top_stage)

    level_maps = [embeddings[i].stage_maps() for i in range(k)]
    markers = [list(range(stages[0] + 1))]
    composites = [list(range(builders[0].graph.node_count(stages[0])))]
    for i in range(k):
        markers.append([markers[i][m] for m in level_maps[i]])
        composites.append([composites[i][x] for x in embeddings[i].node_map])

    tables = []
    for i, builder in enumerate(builders):
        graph = builder.graph
        level = []
        for j in range(stages[i] + 1):
            base = table_of(graph, j)
            nodes = tuple(composites[i][: graph.node_count(j)])
            level.append(LatticeTable(nodes=nodes, labels=lattices[i], rel=base.rel))
        tables.append(level)

    assembly = SystemAssembly(
        lattices=lattices,
        homs=homs,
        stages=stages,
        level_maps=level_maps,
        markers=markers,
        tables=tables,
        embeddings=[e for e in embeddings if e is not None],
        clauses={"embedding": embedding_clause, **_check_system(lattices, homs, level_maps, tables)},
    )
    logger.info(f"🏗️ Assembled {k + 1} levels with stages {stages}: {assembly.verdict.value}")
    return assembly
