"""
L−{1}-colored graphs grown by attaching α-cells, and the tables they induce.

A graph starts as a single edge colored 0. Each round attaches, to every
edge present at the start of the round, one α-cell per copy, where α is the
edge's color. The plain build uses one copy and one round per stage; the
homogenized stage j uses j rounds of j copies.

Ids are sequential in creation order and stage j only adds cells that first
appear at stage j, so the nodes of stage n are exactly ``0 .. nodes_at[n]-1``
and the same holds for edges.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx
import pydot

from config.build_config import BuildConfig
from config.check_config import CheckConfig
from utils.cache import CacheManager

from .errors import BudgetExceededError, InternalConsistencyError, ValidationError
from .lattice_core import FiniteLattice, lattice_from_json
from .lattice_table import LatticeTable, Verdict, check_subtable, restrict_table
from .partitions import EqRel, UnionFind

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def admissible_pair(lattice: FiniteLattice, a1: int, a2: int, alpha: int) -> bool:
    """Pentagon pairs: both colors below 1 and ``a1 ∧ a2 ≤ α``."""
    return a1 != lattice.top and a2 != lattice.top and lattice.leq(lattice.meet(a1, a2), alpha)


def pentagon_pairs(lattice: FiniteLattice, alpha: int) -> List[Pair]:
    proper = lattice.proper_elements()
    return [(a1, a2) for a1 in proper for a2 in proper if admissible_pair(lattice, a1, a2, alpha)]


@dataclass(frozen=True)
class CellTemplate:
    alpha: int
    pairs: Tuple[Pair, ...]

    @property
    def node_count(self) -> int:
        return 3 * len(self.pairs)

    @property
    def edge_count(self) -> int:
        return 4 * len(self.pairs)

    @staticmethod
    def chain_colors(pair: Pair) -> Tuple[int, int, int, int]:
        a1, a2 = pair
        return a1, a2, a1, a2


def alpha_cell(lattice: FiniteLattice, alpha: int) -> CellTemplate:
    """One pentagon per admissible ordered pair; pentagons share only the base edge."""
    alpha = lattice._check(alpha)
    if alpha == lattice.top:
        raise ValidationError("cells are attached only to edges colored below 1")
    return CellTemplate(alpha, tuple(pentagon_pairs(lattice, alpha)))


@dataclass(frozen=True)
class NodeProvenance:
    node: int
    stage: int
    cell: Optional[int]
    parent_edge: Optional[int]
    round: int
    copy: int
    pair: Optional[Pair]
    position: int  # 0 for base nodes, 1..3 for u1..u3

    def to_json(self) -> dict:
        return {
            "node": self.node,
            "stage": self.stage,
            "cell": self.cell,
            "parentEdge": self.parent_edge,
            "round": self.round,
            "copy": self.copy,
            "pair": list(self.pair) if self.pair else None,
            "position": self.position,
        }


class ColoredGraph:
    """Columnar storage of a staged colored graph and its construction provenance."""

    def __init__(self, lattice: FiniteLattice, homogenized: bool):
        self.lattice = lattice
        self.homogenized = homogenized
        self.stage = -1
        self.nodes_at: List[int] = []
        self.edges_at: List[int] = []

        self.node_cell: List[int] = []
        self.node_position: List[int] = []

        self.edge_u: List[int] = []
        self.edge_v: List[int] = []
        self.edge_color: List[int] = []
        self.edge_cell: List[int] = []

        self.cell_edge: List[int] = []
        self.cell_round: List[int] = []
        self.cell_copy: List[int] = []
        self.cell_stage: List[int] = []
        self.cell_index: Dict[Tuple[int, int, int], int] = {}
        self.edge_cells: Dict[int, List[int]] = {}

        self.pent_cell: List[int] = []
        self.pent_pair: List[Pair] = []
        self.pent_first_node: List[int] = []
        self.pentagon_index: Dict[Tuple[int, int, int], int] = {}

        self._edge_lookup: Dict[Tuple[int, int], int] = {}

    @property
    def mode(self) -> str:
        return "homogenized" if self.homogenized else "pudlak"

    # Counts and stages

    def _stage(self, stage: Optional[int]) -> int:
        if stage is None:
            return self.stage
        if not 0 <= stage <= self.stage:
            raise ValidationError(f"stage {stage} not built (built up to {self.stage})")
        return stage

    def node_count(self, stage: Optional[int] = None) -> int:
        return self.nodes_at[self._stage(stage)]

    def edge_count(self, stage: Optional[int] = None) -> int:
        return self.edges_at[self._stage(stage)]

    def node_stage(self, node: int) -> int:
        cell = self.node_cell[node]
        return 0 if cell < 0 else self.cell_stage[cell]

    def edge_stage(self, edge: int) -> int:
        cell = self.edge_cell[edge]
        return 0 if cell < 0 else self.cell_stage[cell]

    def edge_round(self, edge: int) -> int:
        cell = self.edge_cell[edge]
        return 0 if cell < 0 else self.cell_round[cell]

    def edges(self, stage: Optional[int] = None) -> Iterator[Tuple[int, int, int]]:
        for e in range(self.edge_count(stage)):
            yield self.edge_u[e], self.edge_v[e], self.edge_color[e]

    def color_histogram(self, stage: Optional[int] = None) -> Dict[int, int]:
        return dict(sorted(Counter(self.edge_color[: self.edge_count(stage)]).items()))

    # Provenance lookups

    def cell(self, edge: int, round_: int, copy: int) -> Optional[int]:
        return self.cell_index.get((edge, round_, copy))

    def pentagon(self, cell: int, pair: Pair) -> Optional[int]:
        return self.pentagon_index.get((cell, pair[0], pair[1]))

    def pentagon_nodes(self, pentagon: int) -> Tuple[int, int, int]:
        first = self.pent_first_node[pentagon]
        return first, first + 1, first + 2

    def pentagon_edges(self, pentagon: int) -> Tuple[int, int, int, int]:
        """Edge ids in path order x-u1, u1-u2, u2-u3, u3-y."""
        u1, u2, u3 = self.pentagon_nodes(pentagon)
        cell = self.pent_cell[pentagon]
        e = self.cell_edge[cell]
        x, y = self.edge_u[e], self.edge_v[e]
        return tuple(self.edge_between(a, b) for a, b in ((x, u1), (u1, u2), (u2, u3), (u3, y)))

    def cells_on(self, edge: int) -> List[int]:
        return self.edge_cells.get(edge, [])

    def edge_between(self, u: int, v: int) -> Optional[int]:
        return self._edge_lookup.get((min(u, v), max(u, v)))

    def provenance(self, node: int) -> NodeProvenance:
        cell = self.node_cell[node]
        if cell < 0:
            return NodeProvenance(node, 0, None, None, 0, 0, None, 0)
        pentagon = (node - 2) // 3
        return NodeProvenance(
            node=node,
            stage=self.cell_stage[cell],
            cell=cell,
            parent_edge=self.cell_edge[cell],
            round=self.cell_round[cell],
            copy=self.cell_copy[cell],
            pair=self.pent_pair[pentagon],
            position=self.node_position[node],
        )

    # Mutation (used by GraphBuilder and graph_from_json only)

    def _seed(self) -> None:
        for _ in range(2):
            self.node_cell.append(-1)
            self.node_position.append(0)
        self._add_edge(0, 1, self.lattice.bottom, -1)
        self._close_stage(0)

    def _add_edge(self, u: int, v: int, color: int, cell: int) -> None:
        if color == self.lattice.top:
            raise InternalConsistencyError(f"edge {u}-{v} would carry color 1")
        if u == v:
            raise InternalConsistencyError(f"loop at node {u}")
        self._edge_lookup[(min(u, v), max(u, v))] = len(self.edge_u)
        self.edge_u.append(u)
        self.edge_v.append(v)
        self.edge_color.append(color)
        self.edge_cell.append(cell)

    def _attach(self, edge: int, round_: int, copy: int, stage: int, pairs: List[Pair]) -> None:
        cell = len(self.cell_edge)
        self.cell_edge.append(edge)
        self.cell_round.append(round_)
        self.cell_copy.append(copy)
        self.cell_stage.append(stage)
        self.cell_index[(edge, round_, copy)] = cell
        self.edge_cells.setdefault(edge, []).append(cell)
        x, y = self.edge_u[edge], self.edge_v[edge]
        for a1, a2 in pairs:
            self.pentagon_index[(cell, a1, a2)] = len(self.pent_cell)
            self.pent_cell.append(cell)
            self.pent_pair.append((a1, a2))
            first = len(self.node_cell)
            self.pent_first_node.append(first)
            for position in (1, 2, 3):
                self.node_cell.append(cell)
                self.node_position.append(position)
            u1, u2, u3 = first, first + 1, first + 2
            self._add_edge(x, u1, a1, cell)
            self._add_edge(u1, u2, a2, cell)
            self._add_edge(u2, u3, a1, cell)
            self._add_edge(u3, y, a2, cell)

    def _close_stage(self, stage: int) -> None:
        self.stage = stage
        self.nodes_at.append(len(self.node_cell))
        self.edges_at.append(len(self.edge_u))

    # Serialization and export

    def to_json(self, stage: Optional[int] = None) -> dict:
        stage = self._stage(stage)
        names = self.lattice.names
        cells = [c for c in range(len(self.cell_edge)) if self.cell_stage[c] <= stage]
        pentagons = (self.nodes_at[stage] - 2) // 3
        return {
            "lattice": self.lattice.to_json(),
            "mode": self.mode,
            "stage": stage,
            "nodesAt": self.nodes_at[: stage + 1],
            "edgesAt": self.edges_at[: stage + 1],
            "edges": [[u, v, names[c]] for u, v, c in self.edges(stage)],
            "cells": [
                [self.cell_edge[c], self.cell_round[c], self.cell_copy[c], self.cell_stage[c]]
                for c in cells
            ],
            "pentagons": [
                [self.pent_cell[p], names[self.pent_pair[p][0]], names[self.pent_pair[p][1]]]
                for p in range(pentagons)
            ],
        }

    def to_networkx(self, stage: Optional[int] = None) -> nx.Graph:
        names = self.lattice.names
        g = nx.Graph()
        for node in range(self.node_count(stage)):
            g.add_node(node, stage=self.node_stage(node))
        for u, v, c in self.edges(stage):
            g.add_edge(u, v, label=names[c])
        return g

    def to_dot(self, stage: Optional[int] = None) -> str:
        return nx.nx_pydot.to_pydot(self.to_networkx(stage)).to_string()

    def edge_multiset(self, stage: Optional[int] = None) -> Counter:
        names = self.lattice.names
        return Counter((min(u, v), max(u, v), names[c]) for u, v, c in self.edges(stage))

    def stats(self) -> List["StageStats"]:
        names = self.lattice.names
        return [
            StageStats(
                stage=s,
                nodes=self.nodes_at[s],
                edges=self.edges_at[s],
                histogram={names[c]: n for c, n in self.color_histogram(s).items()},
            )
            for s in range(self.stage + 1)
        ]


def _unquote(text: str) -> str:
    return text.strip().strip('"')


def dot_edge_multiset(dot_text: str) -> Counter:
    """Edge multiset ``(u, v, label)`` of a DOT graph written by :meth:`ColoredGraph.to_dot`."""
    graphs = pydot.graph_from_dot_data(dot_text)
    if not graphs:
        raise ValidationError("no graph in DOT input")
    g = nx.nx_pydot.from_pydot(graphs[0])
    edges = Counter()
    for u, v, data in g.edges(data=True):
        a, b = int(_unquote(str(u))), int(_unquote(str(v)))
        edges[(min(a, b), max(a, b), _unquote(str(data.get("label", ""))))] += 1
    return edges


@dataclass(frozen=True)
class StageStats:
    stage: int
    nodes: int
    edges: int
    histogram: Dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"stage": self.stage, "nodes": self.nodes, "edges": self.edges, "histogram": self.histogram}


class GraphBuilder:
    """Grows one staged graph on demand, with node/stage budgets and an optional stage cache."""

    def __init__(
        self,
        lattice: FiniteLattice,
        homogenized: bool = True,
        budget_nodes: Optional[int] = None,
        max_stages: Optional[int] = None,
        cache: Optional[CacheManager] = None,
    ):
        if not lattice.nontrivial:
            raise ValidationError("graphs are built over nontrivial lattices only")
        self.lattice = lattice
        self.homogenized = homogenized
        self.budget_nodes = budget_nodes if budget_nodes is not None else BuildConfig.BUDGET_NODES
        self.max_stages = max_stages if max_stages is not None else BuildConfig.MAX_STAGES
        self.cache = cache
        self.pairs = {alpha: pentagon_pairs(lattice, alpha) for alpha in lattice.proper_elements()}
        self.cell_edge_hist = {}
        for alpha, pairs in self.pairs.items():
            hist = Counter()
            for a1, a2 in pairs:
                hist[a1] += 2
                hist[a2] += 2
            self.cell_edge_hist[alpha] = hist
        self.graph = ColoredGraph(lattice, homogenized)
        self.graph._seed()

    def grow_to(self, stage: int) -> ColoredGraph:
        """
        Build stages up to ``stage`` (no-op when already built).

        Raises:
            BudgetExceededError: Stage cap or node budget would be exceeded
        """
        if stage < 0:
            raise ValidationError("stage must not be negative")
        if stage > self.max_stages:
            raise BudgetExceededError("stage", self.max_stages, stage)
        if stage <= self.graph.stage:
            return self.graph
        key = None
        if self.cache is not None:
            key = CacheManager.stage_key(self.lattice.to_json(), self.graph.mode, stage)
            payload = self.cache.get(key)
            if payload is not None:
                self.graph = graph_from_json(payload, self.lattice)
                return self.graph
        while self.graph.stage < stage:
            self._grow()
        if key is not None:
            self.cache.set(key, self.graph.to_json())
        return self.graph

    def _copies(self, stage: int) -> int:
        return stage if self.homogenized else 1

    def _missing_copies(self, edge: int, round_: int, copies: int) -> List[int]:
        index = self.graph.cell_index
        return [k for k in range(1, copies + 1) if (edge, round_, k) not in index]

    def predict_new_nodes(self, stage: int) -> int:
        """Exact node growth of the next step, from color histograms only."""
        g = self.graph
        copies = self._copies(stage)
        old_edges = len(g.edge_u)
        new_edges_by_round: List[Counter] = []
        total = 0
        for r in range(1, stage + 1):
            cells = Counter()
            for e in range(old_edges):
                if g.edge_round(e) < r:
                    missing = len(self._missing_copies(e, r, copies))
                    if missing:
                        cells[g.edge_color[e]] += missing
            for hist in new_edges_by_round:
                for color, count in hist.items():
                    cells[color] += count * copies
            total += sum(3 * len(self.pairs[c]) * m for c, m in cells.items())
            born = Counter()
            for c, m in cells.items():
                for color, count in self.cell_edge_hist[c].items():
                    born[color] += count * m
            new_edges_by_round.append(born)
        return total

    def _grow(self) -> None:
        g = self.graph
        stage = g.stage + 1
        predicted = g.nodes_at[-1] + self.predict_new_nodes(stage)
        if predicted > self.budget_nodes:
            logger.warning(f"⚠️ Stage {stage} needs {predicted} nodes (budget {self.budget_nodes})")
            raise BudgetExceededError("node", self.budget_nodes, predicted)
        copies = self._copies(stage)
        for r in range(1, stage + 1):
            planned = [
                (e, k)
                for e in range(len(g.edge_u))
                if g.edge_round(e) < r
                for k in self._missing_copies(e, r, copies)
            ]
            for e, k in planned:
                g._attach(e, r, k, stage, self.pairs[g.edge_color[e]])
        g._close_stage(stage)
        if g.nodes_at[-1] != predicted:
            raise InternalConsistencyError(f"stage {stage}: predicted {predicted} nodes, built {g.nodes_at[-1]}")
        logger.info(f"🌱 {g.mode} stage {stage}: {g.nodes_at[-1]} nodes, {g.edges_at[-1]} edges")


def _builder(lattice, n, homogenized, budget_nodes, max_stages, cache) -> ColoredGraph:
    builder = GraphBuilder(lattice, homogenized, budget_nodes, max_stages, cache)
    return builder.grow_to(n)


def build_pudlak(
    lattice: FiniteLattice,
    n: int,
    budget_nodes: Optional[int] = None,
    max_stages: Optional[int] = None,
    cache: Optional[CacheManager] = None,
) -> ColoredGraph:
    """Stages 𝓐₀ᴾ ⊆ .. ⊆ 𝓐ₙᴾ: one cell per edge per stage."""
    return _builder(lattice, n, False, budget_nodes, max_stages, cache)


def build_homogenized(
    lattice: FiniteLattice,
    n: int,
    budget_nodes: Optional[int] = None,
    max_stages: Optional[int] = None,
    cache: Optional[CacheManager] = None,
) -> ColoredGraph:
    """Stages 𝓐₀ ⊆ .. ⊆ 𝓐ₙ: stage j is j rounds of j copies per edge."""
    return _builder(lattice, n, True, budget_nodes, max_stages, cache)


def graph_from_json(payload: dict, lattice: Optional[FiniteLattice] = None) -> ColoredGraph:
    """Replay the stored cells; the stored edge list must match the replay."""
    try:
        if lattice is None:
            lattice = lattice_from_json(payload["lattice"])
        homogenized = payload["mode"] == "homogenized"
        cells = payload["cells"]
        nodes_at = [int(v) for v in payload["nodesAt"]]
        edges_at = [int(v) for v in payload["edgesAt"]]
        stored_edges = [tuple(e) for e in payload["edges"]]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed graph file: {e}") from e
    graph = ColoredGraph(lattice, homogenized)
    graph._seed()
    pairs = {alpha: pentagon_pairs(lattice, alpha) for alpha in lattice.proper_elements()}
    for edge, round_, copy, cell_stage in cells:
        if edge >= len(graph.edge_u):
            raise ValidationError(f"cell refers to unknown edge {edge}")
        graph._attach(edge, round_, copy, cell_stage, pairs[graph.edge_color[edge]])
    graph.stage = len(nodes_at) - 1
    graph.nodes_at = nodes_at
    graph.edges_at = edges_at
    replayed = [(u, v, lattice.names[c]) for u, v, c in graph.edges()]
    if replayed != stored_edges or len(graph.node_cell) != nodes_at[-1]:
        raise ValidationError("graph file does not match its own construction record")
    return graph


# The map e and induced tables

def color_connectivity(graph: ColoredGraph, alpha: int, stage: Optional[int] = None) -> EqRel:
    """e(α): nodes connected through edges colored ≥ α, using stage edges only."""
    lattice = graph.lattice
    above = lattice.leq_table[lattice._check(alpha)]
    uf = UnionFind(graph.node_count(stage))
    for e in range(graph.edge_count(stage)):
        if above[graph.edge_color[e]]:
            uf.union(graph.edge_u[e], graph.edge_v[e])
    return EqRel(uf.labels())


def table_of(graph: ColoredGraph, stage: Optional[int] = None, jobs: int = 1) -> LatticeTable:
    """Θₙ with ``rel(α) = e(α)`` computed inside stage n."""
    lattice = graph.lattice
    stage = graph._stage(stage)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rels = list(pool.map(lambda a: color_connectivity(graph, a, stage), lattice.elements))
    else:
        rels = [color_connectivity(graph, a, stage) for a in lattice.elements]
    return LatticeTable(nodes=tuple(range(graph.node_count(stage))), labels=lattice, rel=tuple(rels))


def growth_stats(
    lattice: FiniteLattice,
    n: int,
    homogenized: bool = False,
    budget_nodes: Optional[int] = None,
) -> List[StageStats]:
    graph = _builder(lattice, n, homogenized, budget_nodes, None, None)
    return graph.stats()


@dataclass
class CoherenceReport:
    stages: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s["restrictionEqual"] and s["subtable"] for s in self.stages)

    def to_json(self) -> dict:
        return {"ok": self.ok, "stages": self.stages}


def check_coherence(
    lattice: FiniteLattice,
    max_stage: int,
    homogenized: bool = True,
    budget_nodes: Optional[int] = None,
    jobs: int = 1,
) -> CoherenceReport:
    """For each n < max_stage: Θₙ equals Θₙ₊₁ restricted to Aₙ, and Θₙ ⊆ Θₙ₊₁."""
    graph = _builder(lattice, max_stage, homogenized, budget_nodes, None, None)
    report = CoherenceReport()
    tables = [table_of(graph, s, jobs) for s in range(max_stage + 1)]
    for n in range(max_stage):
        restricted = restrict_table(tables[n + 1], tables[n].nodes)
        sub = check_subtable(tables[n], tables[n + 1])
        report.stages.append({
            "stage": n,
            "restrictionEqual": restricted == tables[n],
            "subtable": sub.ok,
            "witness": list(sub.witness),
        })
    logger.info(f"🧩 Coherence over stages 0..{max_stage}: {'ok' if report.ok else 'FAILED'}")
    return report


# Representation check

@dataclass
class StageCheck:
    stage: int
    nodes: int
    edges: int
    conditions: Dict[str, bool] = field(default_factory=dict)
    witnesses: Dict[str, list] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.conditions) and all(self.conditions.values())

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "nodes": self.nodes,
            "edges": self.edges,
            "conditions": self.conditions,
            "witnesses": self.witnesses,
        }


@dataclass
class RepresentationReport:
    lattice: FiniteLattice
    mode: str
    stages: List[StageCheck] = field(default_factory=list)
    passed_stage: Optional[int] = None
    diagnostic: Optional[dict] = None

    @property
    def verdict(self) -> Verdict:
        return Verdict.VERIFIED if self.passed_stage is not None else Verdict.UNKNOWN

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "mode": self.mode,
            "elements": list(self.lattice.names),
            "passedStage": self.passed_stage,
            "stages": [s.to_json() for s in self.stages],
            "diagnostic": self.diagnostic,
        }


def _check_stage(table: LatticeTable, next_table: Optional[LatticeTable], check: StageCheck) -> None:
    L = table.labels
    e = table.rel
    names = L.names

    witness = table.injectivity_witness()
    check.conditions["a"] = witness is None
    if witness is not None:
        check.witnesses["a"] = [names[a] for a in witness]

    check.conditions["b"] = True
    for a, b in itertools.product(L.elements, repeat=2):
        if L.leq(a, b) != e[b].leq(e[a]):
            check.conditions["b"] = False
            check.witnesses["b"] = [names[a], names[b]]
            break

    check.conditions["c"] = True
    for a, b in itertools.combinations(L.elements, 2):
        if e[L.join(a, b)] != e[a].meet(e[b]):
            check.conditions["c"] = False
            check.witnesses["c"] = [names[a], names[b]]
            break

    check.conditions["d"] = True
    if next_table is None:
        return
    positions = range(table.size)
    for a, b in L.incomparable_pairs():
        joined = next_table.rel[a].join(next_table.rel[b]).restrict(positions)
        if e[L.meet(a, b)] != joined:
            check.conditions["d"] = False
            check.witnesses["d"] = [names[a], names[b]]
            break


def verify_representation(
    lattice: FiniteLattice,
    max_stage: int,
    budget_nodes: Optional[int] = None,
    homogenized: bool = True,
    jobs: int = 1,
    diagnostic: bool = False,
    endo_budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> RepresentationReport:
    """
    Least stage n ≤ max_stage at which e is a dual isomorphism onto Θ̂ₙ.

    Conditions: (a) e injective, (b) α ≤ β iff e(α) ⊇ e(β), (c) joins go to
    intersections, (d) meets go to Part-joins, with the joins of incomparable
    elements taken in stage n+1 and restricted to Aₙ. Stage n+1 is built only
    when (a)-(c) hold and some pair is incomparable.

    Raises:
        BudgetExceededError: A needed stage does not fit the node budget
    """
    builder = GraphBuilder(lattice, homogenized, budget_nodes, max_stages=max_stage + 1)
    report = RepresentationReport(lattice, builder.graph.mode)
    needs_meets = bool(lattice.incomparable_pairs())
    for n in range(max_stage + 1):
        graph = builder.grow_to(n)
        table = table_of(graph, n, jobs)
        check = StageCheck(n, graph.node_count(n), graph.edge_count(n))
        _check_stage(table, None, check)
        if check.passed and needs_meets:
            graph = builder.grow_to(n + 1)
            _check_stage(table, table_of(graph, n + 1, jobs), check)
        report.stages.append(check)
        logger.info(f"🔎 Stage {n}: {check.conditions}")
        if check.passed:
            report.passed_stage = n
            if diagnostic:
                report.diagnostic = _con_end_diagnostic(table, endo_budget, seed)
            break
    return report


def _con_end_diagnostic(table: LatticeTable, endo_budget: Optional[int], seed: Optional[int]) -> dict:
    from .unary_algebra import con_end_diagnostic, endomorphisms

    endos = endomorphisms(table, endo_budget)
    seed = seed if seed is not None else CheckConfig.SEED
    return con_end_diagnostic(table, endos, sample=32, seed=seed)
