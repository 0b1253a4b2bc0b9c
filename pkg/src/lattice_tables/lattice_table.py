"""
Lattice tables: a carrier plus one equivalence relation per lattice element.

Nodes are global ids (for graph-derived tables, graph node ids); relations
are stored over local positions ``0 .. size-1`` in node order. Table order is
reverse inclusion, so ``α ≤ β`` in the labels must give ``rel(α) ⊇ rel(β)``.
"""

from __future__ import annotations

import enum
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import BudgetExceededError, NotFoundError, ValidationError
from .lattice_core import FiniteLattice, lattice_from_json
from .partitions import EqRel

logger = logging.getLogger(__name__)


class Verdict(str, enum.Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"

    @classmethod
    def combine(cls, verdicts: Iterable["Verdict"]) -> "Verdict":
        """Refuted beats unknown beats verified."""
        verdicts = list(verdicts)
        if cls.REFUTED in verdicts:
            return cls.REFUTED
        if cls.UNKNOWN in verdicts:
            return cls.UNKNOWN
        return cls.VERIFIED


class TableKind(str, enum.Enum):
    LATTICE = "lattice"
    USL = "usl"
    FAMILY = "family"


@dataclass(frozen=True)
class LatticeTable:
    nodes: Tuple[int, ...]
    labels: FiniteLattice
    rel: Tuple[EqRel, ...]

    def __post_init__(self):
        if len(self.rel) != self.labels.size:
            raise ValidationError(
                f"table has {len(self.rel)} relations for {self.labels.size} lattice elements"
            )
        if len(set(self.nodes)) != len(self.nodes):
            raise ValidationError("table nodes are not distinct")
        for r in self.rel:
            if r.size != len(self.nodes):
                raise ValidationError("relation carrier differs from table carrier")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @cached_property
    def _positions(self) -> Dict[int, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    def position(self, node: int) -> int:
        try:
            return self._positions[node]
        except KeyError:
            raise ValidationError(f"node {node} is not in the table") from None

    def relation(self, alpha: int) -> EqRel:
        return self.rel[self.labels._check(alpha)]

    def related(self, x: int, y: int, alpha: int) -> bool:
        return self.relation(alpha).related(self.position(x), self.position(y))

    def distinct_relations(self) -> List[EqRel]:
        """Θ̂, in order of first appearance by element id."""
        seen = {}
        for r in self.rel:
            seen.setdefault(r.block_of, r)
        return list(seen.values())

    def injectivity_witness(self) -> Optional[Tuple[int, int]]:
        """First pair of distinct elements labeling the same relation."""
        first = {}
        for alpha, r in enumerate(self.rel):
            if r.block_of in first:
                return first[r.block_of], alpha
            first[r.block_of] = alpha
        return None

    def order_reversal_witness(self) -> Optional[Tuple[int, int]]:
        """First ``α ≤ β`` with ``rel(α) ⊉ rel(β)``."""
        L = self.labels
        for a in L.elements:
            for b in L.elements:
                if L.leq(a, b) and not self.rel[b].leq(self.rel[a]):
                    return a, b
        return None

    @cached_property
    def closure_failures(self) -> List[str]:
        family = self.distinct_relations()
        present = {r.block_of for r in family}
        failures = []
        if EqRel.discrete(self.size).block_of not in present:
            failures.append("diagonal relation missing")
        if EqRel.full(self.size).block_of not in present:
            failures.append("full relation missing")
        for p, q in itertools.combinations(family, 2):
            if p.join(q).block_of not in present:
                failures.append(f"join of {p} and {q} missing")
                break
        for p, q in itertools.combinations(family, 2):
            if p.meet(q).block_of not in present:
                failures.append(f"meet of {p} and {q} missing")
                break
        return failures

    @cached_property
    def kind(self) -> TableKind:
        failures = self.closure_failures
        if not failures:
            return TableKind.LATTICE
        if all(f.startswith("meet") for f in failures):
            return TableKind.USL
        return TableKind.FAMILY

    def to_json(self) -> dict:
        return table_to_json(self)


def table_to_json(table: LatticeTable) -> dict:
    relations = {
        table.labels.names[alpha]: [[table.nodes[i] for i in block] for block in r.blocks()]
        for alpha, r in enumerate(table.rel)
    }
    return {
        "nodes": list(table.nodes),
        "relations": relations,
        "lattice": table.labels.to_json(),
    }


def table_from_json(payload: dict, labels: Optional[FiniteLattice] = None) -> LatticeTable:
    try:
        if labels is None:
            labels = lattice_from_json(payload["lattice"])
        nodes = tuple(int(n) for n in payload["nodes"])
        relations = payload["relations"]
        positions = {node: i for i, node in enumerate(nodes)}
        rel = []
        for name in labels.names:
            blocks = [[positions[node] for node in block] for block in relations[name]]
            rel.append(EqRel.from_blocks(len(nodes), blocks))
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed table file: {e}") from e
    return LatticeTable(nodes=nodes, labels=labels, rel=tuple(rel))


def restrict_table(table: LatticeTable, subset: Iterable[int]) -> LatticeTable:
    """
    Θ↾Y: carrier Y (kept in the table's node order) with every relation restricted.

    Raises:
        ValidationError: Y is empty or leaves the carrier
    """
    wanted = set(subset)
    if not wanted:
        raise ValidationError("cannot restrict a table to an empty node set")
    positions = sorted(table.position(node) for node in wanted)
    return LatticeTable(
        nodes=tuple(table.nodes[p] for p in positions),
        labels=table.labels,
        rel=tuple(r.restrict(positions) for r in table.rel),
    )


@dataclass(frozen=True)
class SubtableReport:
    ok: bool
    reason: Optional[str] = None
    witness: Tuple = ()

    def to_json(self) -> dict:
        return {"ok": self.ok, "reason": self.reason, "witness": list(self.witness)}


def check_subtable(small: LatticeTable, big: LatticeTable) -> SubtableReport:
    """
    Θ₀ ⊆ Θ₁: carrier inclusion and ``Θ̂₁↾|Θ₀| = Θ̂₀`` element by element.

    The witness for a relation mismatch is ``(x, y, α)`` with node ids and the
    element name.
    """
    if small.labels != big.labels:
        raise ValidationError("sub-table check needs a shared label lattice")
    for node in small.nodes:
        if node not in big._positions:
            return SubtableReport(False, "carrier", (node,))
    positions = [big.position(node) for node in small.nodes]
    for alpha in small.labels.elements:
        restricted = big.rel[alpha].restrict(positions)
        mine = small.rel[alpha]
        if restricted == mine:
            continue
        for i, j in itertools.combinations(range(small.size), 2):
            if restricted.related(i, j) != mine.related(i, j):
                return SubtableReport(
                    False,
                    "relation",
                    (small.nodes[i], small.nodes[j], small.labels.names[alpha]),
                )
    return SubtableReport(True)


@dataclass(frozen=True)
class TableChain:
    """Θ₀ ⊆ Θ₁ ⊆ ... with optional marker indices."""

    tables: Tuple[LatticeTable, ...]
    markers: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.tables:
            labels = self.tables[0].labels
            if any(t.labels != labels for t in self.tables):
                raise ValidationError("chain tables must share their label lattice")

    def __len__(self) -> int:
        return len(self.tables)

    def subsequence(self, indices: Sequence[int]) -> "TableChain":
        return TableChain(tuple(self.tables[i] for i in indices), tuple(indices))


def _blocks_by_rep(rel: EqRel) -> Dict[int, List[int]]:
    return {block[0]: block for block in rel.blocks()}


def find_meet_interpolants(
    table: LatticeTable,
    alpha: int,
    beta: int,
    x: int,
    y: int,
    budget: int,
) -> List[int]:
    """
    Shortest alternating chain ``x ∼α z₁ ∼β z₂ ⋯ ∼α zₙ ∼β y``.

    Breadth-first over (node, next link) states, expanding each α- or β-block
    once. An empty list means ``x = y``.

    Args:
        table: Table searched (for truncations, the next stage)
        alpha, beta: Lattice element ids
        x, y: Node ids with ``x ∼ y`` at ``α ∧ β``
        budget: Maximum number of visited states

    Returns:
        Interpolant node ids ``z₁ .. zₙ``

    Raises:
        NotFoundError: No chain exists in this table, or the budget ran out
    """
    L = table.labels
    if not table.related(x, y, L.meet(alpha, beta)):
        raise ValidationError(f"nodes {x}, {y} are not related at {L.names[L.meet(alpha, beta)]}")
    if x == y:
        return []
    start = table.position(x)
    goal = table.position(y)
    links = (table.rel[alpha], table.rel[beta])
    members = (_blocks_by_rep(links[0]), _blocks_by_rep(links[1]))

    parent: Dict[Tuple[int, int], Tuple[int, int]] = {(start, 0): None}
    expanded = set()
    queue = deque([(start, 0)])
    while queue:
        node, side = queue.popleft()
        rel = links[side]
        rep = rel.block_of[node]
        if (side, rep) in expanded:
            continue
        expanded.add((side, rep))
        for nxt in members[side][rep]:
            state = (nxt, 1 - side)
            if state in parent:
                continue
            parent[state] = (node, side)
            if len(parent) > budget:
                raise NotFoundError(f"meet interpolants for ({x}, {y}) not found within {budget} states")
            if state == (goal, 0):
                path = []
                cur = parent[state]
                while cur != (start, 0):
                    path.append(table.nodes[cur[0]])
                    cur = parent[cur]
                return path[::-1]
            queue.append(state)
    raise NotFoundError(f"no meet interpolants for ({x}, {y}) in this table")


@dataclass
class ClauseResult:
    verdict: Verdict
    detail: str = ""
    witness: Tuple = ()

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "detail": self.detail, "witness": list(self.witness)}


@dataclass
class SequentialReport:
    clauses: Dict[int, ClauseResult] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        return Verdict.combine(c.verdict for c in self.clauses.values())

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "clauses": {str(k): v.to_json() for k, v in sorted(self.clauses.items())},
        }


def _meet_clause(small: LatticeTable, big: LatticeTable) -> ClauseResult:
    """Meet interpolants for pairs of ``small`` inside ``big``."""
    L = small.labels
    positions = [big.position(node) for node in small.nodes]
    for alpha, beta in L.incomparable_pairs():
        joined = big.rel[alpha].join(big.rel[beta]).restrict(positions)
        below = small.rel[L.meet(alpha, beta)]
        if below.leq(joined):
            continue
        for i, j in below.pairs():
            if not joined.related(i, j):
                return ClauseResult(
                    Verdict.REFUTED,
                    "meet interpolants missing",
                    (small.nodes[i], small.nodes[j], L.names[alpha], L.names[beta]),
                )
    return ClauseResult(Verdict.VERIFIED)


def _interpolation_clauses(small: LatticeTable, big: LatticeTable, budget: int) -> Tuple[ClauseResult, ClauseResult]:
    from .unary_algebra import homogeneity_in_extension

    return _meet_clause(small, big), homogeneity_in_extension(small, big, budget)


def check_sequential(chain: TableChain, budget: int) -> SequentialReport:
    """
    Per-clause report for a finite chain Θ₀ ⊆ Θ₁ ⊆ ... .

    Clause 1 measures the kind of every stage; clause 2 checks that the last
    stage labels injectively and turns joins into intersections; clauses 3
    and 4 look for interpolants of each stage inside the next one.
    """
    report = SequentialReport()
    tables = chain.tables
    if not tables:
        for k in (1, 2, 3, 4):
            report.clauses[k] = ClauseResult(Verdict.VERIFIED, "empty chain")
        return report

    report.clauses[1] = ClauseResult(Verdict.VERIFIED)
    for index, table in enumerate(tables):
        if table.kind == TableKind.FAMILY:
            report.clauses[1] = ClauseResult(
                Verdict.REFUTED, "; ".join(table.closure_failures), (index,)
            )
            break

    last = tables[-1]
    L = last.labels
    report.clauses[2] = ClauseResult(Verdict.VERIFIED)
    witness = last.injectivity_witness()
    if witness is not None:
        report.clauses[2] = ClauseResult(
            Verdict.REFUTED, "labeling not injective", tuple(L.names[a] for a in witness)
        )
    else:
        for a, b in itertools.combinations(L.elements, 2):
            if last.rel[L.join(a, b)] != last.rel[a].meet(last.rel[b]):
                report.clauses[2] = ClauseResult(
                    Verdict.REFUTED, "join is not intersection", (L.names[a], L.names[b])
                )
                break

    meet_results = []
    homogeneity_results = []
    for n in range(len(tables) - 1):
        meet, homogeneity = _interpolation_clauses(tables[n], tables[n + 1], budget)
        meet_results.append((n, meet))
        homogeneity_results.append((n, homogeneity))
    report.clauses[3] = _first_failure(meet_results)
    report.clauses[4] = _first_failure(homogeneity_results)
    logger.info(f"📋 Sequential check over {len(tables)} tables: {report.verdict.value}")
    return report


def _first_failure(results: List[Tuple[int, ClauseResult]]) -> ClauseResult:
    verdict = Verdict.combine(r.verdict for _, r in results)
    for n, r in results:
        if r.verdict == verdict and verdict != Verdict.VERIFIED:
            return ClauseResult(verdict, f"stage {n}: {r.detail}", r.witness)
    return ClauseResult(Verdict.VERIFIED)


def sequentialize(chain: TableChain, budget: int) -> List[int]:
    """
    Greedy subsequence ``n₀ = 0``, ``nₖ₊₁`` = least m closing stage ``nₖ``.

    A stage is closed by m when every meet and homogeneity interpolant for it
    is found inside Θₘ. The subsequence stops at the last stage or at a stage
    no later table closes.

    Raises:
        BudgetExceededError: Budget is not positive, or a search ran out
    """
    if budget <= 0:
        raise BudgetExceededError("interpolant search", budget, 0)
    tables = chain.tables
    if not tables:
        return []
    indices = [0]
    while indices[-1] < len(tables) - 1:
        current = indices[-1]
        for m in range(current + 1, len(tables)):
            meet, homogeneity = _interpolation_clauses(tables[current], tables[m], budget)
            if Verdict.UNKNOWN in (meet.verdict, homogeneity.verdict):
                raise BudgetExceededError("interpolant search", budget)
            if meet.verdict == homogeneity.verdict == Verdict.VERIFIED:
                indices.append(m)
                break
        else:
            logger.warning(f"⚠️ Stage {current} is not closed by any later table")
            break
    logger.info(f"✅ Sequential subsequence: {indices}")
    return indices
