"""
Unary algebras, congruence lattices and endomorphisms of lattice tables.

Self-maps are tuples of local positions: ``f[i]`` is the image of position
``i``. Certificates translate positions back to table node ids.
"""

from __future__ import annotations

import itertools
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from config.check_config import CheckConfig

from .errors import BudgetExceededError, InternalConsistencyError, NotFoundError, ValidationError
from .lattice_core import FiniteLattice, lattice_from_order
from .lattice_table import ClauseResult, LatticeTable, Verdict
from .partitions import EqRel, all_partitions, principal_equivalence

logger = logging.getLogger(__name__)

SelfMap = Tuple[int, ...]


def compose(f: SelfMap, g: SelfMap) -> SelfMap:
    """f ∘ g (apply g first)."""
    return tuple(f[x] for x in g)


@dataclass(frozen=True)
class UnaryAlgebra:
    size: int
    maps: Tuple[SelfMap, ...]
    identity_adjoined: bool = False

    def __post_init__(self):
        for f in self.maps:
            if len(f) != self.size or any(not 0 <= v < self.size for v in f):
                raise ValidationError(f"map {f} is not a total self-map of {self.size} points")

    def is_closed(self) -> bool:
        present = set(self.maps)
        return all(compose(f, g) in present for f in self.maps for g in self.maps)

    def preserves(self, rel: EqRel) -> bool:
        return all(
            rel.related(f[x], f[rep])
            for f in self.maps
            for x, rep in enumerate(rel.block_of)
        )


def close_composition(
    generators: Iterable[Sequence[int]],
    size: Optional[int] = None,
    budget: Optional[int] = None,
    adjoin_identity: bool = False,
) -> UnaryAlgebra:
    """
    Least composition-closed set of maps containing the generators.

    Args:
        generators: Total self-maps of a common carrier
        size: Carrier size (needed when there are no generators)
        budget: Largest number of maps (default from config)
        adjoin_identity: Add the identity map first

    Raises:
        BudgetExceededError: The closure grows past the budget
    """
    budget = budget if budget is not None else CheckConfig.CLOSURE_BUDGET
    maps = [tuple(int(v) for v in g) for g in generators]
    if size is None:
        if not maps:
            raise ValidationError("carrier size is required without generators")
        size = len(maps[0])
    if adjoin_identity:
        maps.insert(0, tuple(range(size)))

    found: Dict[SelfMap, None] = {}
    queue = deque()
    for f in maps:
        if f not in found:
            found[f] = None
            queue.append(f)
    while queue:
        f = queue.popleft()
        for g in list(found):
            for h in (compose(f, g), compose(g, f)):
                if h not in found:
                    found[h] = None
                    if len(found) > budget:
                        raise BudgetExceededError("composition closure", budget, len(found))
                    queue.append(h)
    return UnaryAlgebra(size, tuple(sorted(found)), adjoin_identity)


def congruence_lattice(algebra: UnaryAlgebra, bound: Optional[int] = None) -> Tuple[List[EqRel], FiniteLattice]:
    """
    Con A by exhaustive search over Part(X).

    Congruences are listed finest first; element ``i`` of the returned lattice
    is congruence ``i``, ordered by inclusion.
    """
    bound = bound if bound is not None else CheckConfig.EXHAUSTIVE_BOUND
    if algebra.size > bound:
        raise BudgetExceededError("exhaustive carrier", bound, algebra.size)
    congruences = [rel for rel in all_partitions(algebra.size) if algebra.preserves(rel)]
    congruences.sort(key=lambda r: (-r.num_blocks, r.block_of))
    names = [str(r) for r in congruences]
    pairs = [
        (names[i], names[j])
        for i, p in enumerate(congruences)
        for j, q in enumerate(congruences)
        if i != j and p.leq(q)
    ]
    lattice = lattice_from_order(names, pairs, size_bound=max(len(names), 1))
    return congruences, lattice


def dual_con_table(algebra: UnaryAlgebra, bound: Optional[int] = None) -> LatticeTable:
    """The table with Θ̂ = Con A, labeled by the dual of Con A."""
    congruences, lattice = congruence_lattice(algebra, bound)
    return LatticeTable(
        nodes=tuple(range(algebra.size)),
        labels=lattice.dual(),
        rel=tuple(congruences),
    )


# Endomorphism search

@dataclass(frozen=True)
class EndomorphismSet:
    maps: Tuple[SelfMap, ...]
    complete: bool
    visited: int


@dataclass(frozen=True)
class _SearchOutcome:
    maps: List[SelfMap]
    exhausted: bool
    visited: int


def is_endomorphism(table: LatticeTable, images: Sequence[int]) -> bool:
    if len(images) != table.size or any(not 0 <= v < table.size for v in images):
        return False
    return all(
        rel.related(images[x], images[rep])
        for rel in table.distinct_relations()
        for x, rep in enumerate(rel.block_of)
    )


def _search(
    table: LatticeTable,
    budget: int,
    fixed: Optional[Dict[int, int]] = None,
    stop_after: Optional[int] = None,
) -> _SearchOutcome:
    """
    Depth-first enumeration of endomorphisms with block forward checking.

    Fixed positions are assigned first, then the rest by position. Each
    relation records, per source block, the block its image must land in.
    """
    fixed = fixed or {}
    n = table.size
    if n == 0:
        return _SearchOutcome([()], False, 0)
    rels = [r for r in table.distinct_relations() if not r.is_discrete() and not r.is_full()]
    members = [{block[0]: block for block in r.blocks()} for r in rels]
    order = list(fixed) + [x for x in range(n) if x not in fixed]
    required: List[Dict[int, int]] = [{} for _ in rels]
    image = [0] * n
    found: List[SelfMap] = []
    visited = 0

    def candidates(x: int) -> List[int]:
        pool = [fixed[x]] if x in fixed else None
        checks = []
        for k, rel in enumerate(rels):
            label = required[k].get(rel.block_of[x])
            if label is not None:
                checks.append((rel, label))
                block = members[k][label]
                if pool is None or len(block) < len(pool):
                    pool = block
        if pool is None:
            pool = range(n)
        return [c for c in pool if all(rel.block_of[c] == label for rel, label in checks)]

    frames = [(iter(candidates(order[0])), [])]
    while frames:
        it, undo = frames[-1]
        for k, key in undo:
            del required[k][key]
        undo.clear()
        depth = len(frames) - 1
        x = order[depth]
        c = next(it, None)
        if c is None:
            frames.pop()
            continue
        visited += 1
        if visited > budget:
            return _SearchOutcome(found, True, budget)
        image[x] = c
        for k, rel in enumerate(rels):
            key = rel.block_of[x]
            if key not in required[k]:
                required[k][key] = rel.block_of[c]
                undo.append((k, key))
        if depth + 1 == n:
            found.append(tuple(image))
            if stop_after is not None and len(found) >= stop_after:
                break
        else:
            frames.append((iter(candidates(order[depth + 1])), []))
    return _SearchOutcome(found, False, visited)


def endomorphisms(table: LatticeTable, budget: Optional[int] = None) -> EndomorphismSet:
    """
    End Θ by backtracking; ``complete`` is False when the budget ran out.

    Budget counts visited partial assignments.
    """
    budget = budget if budget is not None else CheckConfig.BUDGET_ENDOS
    outcome = _search(table, budget)
    if outcome.exhausted:
        logger.warning(f"⚠️ Endomorphism search stopped at budget {budget} with {len(outcome.maps)} maps")
    else:
        logger.debug(f"🔍 {len(outcome.maps)} endomorphisms in {outcome.visited} steps")
    return EndomorphismSet(tuple(outcome.maps), not outcome.exhausted, outcome.visited)


def find_endomorphism(table: LatticeTable, fixed: Dict[int, int], budget: int) -> Tuple[Optional[SelfMap], bool]:
    """
    First endomorphism extending ``fixed`` (positions to positions).

    Returns:
        ``(map or None, exhausted)``; ``(None, False)`` proves no extension exists
    """
    outcome = _search(table, budget, fixed=fixed, stop_after=1)
    return (outcome.maps[0] if outcome.maps else None), outcome.exhausted


def principal_congruence(table: LatticeTable, x: int, y: int, endos: EndomorphismSet) -> EqRel:
    """
    End_Θ(x, y) on local positions.

    Only a lower bound when ``endos.complete`` is False.
    """
    i = table.position(x)
    j = table.position(y)
    return EqRel.generated(table.size, ((f[i], f[j]) for f in endos.maps))


# Homogeneity

@dataclass(frozen=True)
class HomogeneityCertificate:
    quadruple: Tuple[int, int, int, int]
    chain: Tuple[int, ...]
    maps: Tuple[Tuple[int, ...], ...]

    @property
    def length(self) -> int:
        """n, with ``chain = z₀ .. zₙ₊₁``."""
        return len(self.chain) - 2


def certificate_to_json(cert: HomogeneityCertificate) -> dict:
    return {
        "quadruple": list(cert.quadruple),
        "chain": list(cert.chain),
        "maps": [list(m) for m in cert.maps],
    }


def _premise_holds(table: LatticeTable, x: int, y: int, u: int, v: int) -> bool:
    i, j, k, l = (table.position(n) for n in (x, y, u, v))
    return all(rel.related(k, l) for rel in table.distinct_relations() if rel.related(i, j))


def _node_map(table: LatticeTable, f: SelfMap) -> Tuple[int, ...]:
    return tuple(table.nodes[v] for v in f)


def _chain_search(
    table: LatticeTable,
    i: int,
    j: int,
    start: int,
    maps: Sequence[SelfMap],
) -> Dict[int, Tuple[int, int]]:
    """BFS tree from ``start`` over edges {f(i), f(j)}; parent pointers with map index."""
    adjacency: Dict[int, List[Tuple[int, int]]] = {}
    for index, f in enumerate(maps):
        a, b = f[i], f[j]
        if a != b:
            adjacency.setdefault(a, []).append((b, index))
            adjacency.setdefault(b, []).append((a, index))
    parent = {start: None}
    queue = deque([start])
    while queue:
        z = queue.popleft()
        for w, index in adjacency.get(z, ()):
            if w not in parent:
                parent[w] = (z, index)
                queue.append(w)
    return parent


def _certificate_from_tree(
    table: LatticeTable,
    quadruple: Tuple[int, int, int, int],
    parent: Dict[int, Tuple[int, int]],
    goal: int,
    maps: Sequence[SelfMap],
) -> HomogeneityCertificate:
    chain = [goal]
    used = []
    cur = goal
    while parent[cur] is not None:
        prev, index = parent[cur]
        chain.append(prev)
        used.append(maps[index])
        cur = prev
    chain.reverse()
    used.reverse()
    return HomogeneityCertificate(
        quadruple=quadruple,
        chain=tuple(table.nodes[z] for z in chain),
        maps=tuple(_node_map(table, f) for f in used),
    )


def find_homogeneity_interpolants(
    table: LatticeTable,
    x: int,
    y: int,
    u: int,
    v: int,
    budget: Optional[int] = None,
    endos: Optional[EndomorphismSet] = None,
) -> HomogeneityCertificate:
    """
    Chain ``u = z₀, .., zₙ₊₁ = v`` with ``{fᵢ(x), fᵢ(y)} = {zᵢ, zᵢ₊₁}``.

    Raises:
        ValidationError: The premise ``(∀α)(x ∼α y → u ∼α v)`` fails
        NotFoundError: v is not reached with the available endomorphisms
    """
    if not _premise_holds(table, x, y, u, v):
        raise ValidationError(f"premise fails for quadruple {(x, y, u, v)}")
    quadruple = (x, y, u, v)
    if u == v:
        return HomogeneityCertificate(quadruple, (u,), ())
    if endos is None:
        endos = endomorphisms(table, budget)
    i, j = table.position(x), table.position(y)
    parent = _chain_search(table, i, j, table.position(u), endos.maps)
    goal = table.position(v)
    if goal not in parent:
        qualifier = "" if endos.complete else " within budget"
        raise NotFoundError(f"no homogeneity interpolants for {quadruple}{qualifier}")
    return _certificate_from_tree(table, quadruple, parent, goal, endos.maps)


def recheck_certificate(table: LatticeTable, payload: dict) -> Tuple[bool, str]:
    """Independent re-verification of a serialized certificate."""
    try:
        x, y, u, v = (int(n) for n in payload["quadruple"])
        chain = [int(z) for z in payload["chain"]]
        maps = [[int(n) for n in m] for m in payload["maps"]]
    except (KeyError, TypeError, ValueError) as e:
        return False, f"malformed certificate: {e}"
    if not chain or chain[0] != u or chain[-1] != v:
        return False, "chain does not run from u to v"
    if len(maps) != len(chain) - 1:
        return False, "chain and map counts disagree"
    if not _premise_holds(table, x, y, u, v):
        return False, "premise fails"
    for index, node_images in enumerate(maps):
        try:
            images = [table.position(n) for n in node_images]
        except ValidationError:
            return False, f"map {index} leaves the carrier"
        if not is_endomorphism(table, images):
            return False, f"map {index} is not an endomorphism"
        pair = {node_images[table.position(x)], node_images[table.position(y)]}
        if pair != {chain[index], chain[index + 1]}:
            return False, f"map {index} does not link chain nodes {index}, {index + 1}"
    return True, "ok"


@dataclass
class MaltsevReport:
    verdict: Verdict
    complete: bool
    endomorphism_count: int
    quadruples: int = 0
    counterexample: Optional[Tuple[int, int, int, int]] = None
    certificates: List[HomogeneityCertificate] = field(default_factory=list)
    congruences_in_family: bool = True
    equality_pairs: int = 0

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "complete": self.complete,
            "endomorphisms": self.endomorphism_count,
            "quadruples": self.quadruples,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "certificates": [certificate_to_json(c) for c in self.certificates],
            "congruencesInFamily": self.congruences_in_family,
            "equalityPairs": self.equality_pairs,
        }


def check_maltsev(
    table: LatticeTable,
    budget: Optional[int] = None,
    max_certificates: int = 16,
) -> MaltsevReport:
    """
    Check C_Θ(x, y) ⊆ End_Θ(x, y) for every pair.

    Every quadruple whose premise holds is either certified by a chain over
    the found endomorphisms or becomes a counterexample. A counterexample
    refutes only when the endomorphism enumeration was complete.
    """
    endos = endomorphisms(table, budget)
    family = {r.block_of for r in table.distinct_relations()}
    report = MaltsevReport(Verdict.VERIFIED, endos.complete, len(endos.maps))

    for i, j in itertools.combinations(range(table.size), 2):
        x, y = table.nodes[i], table.nodes[j]
        c = principal_equivalence(table, x, y)
        e = principal_congruence(table, x, y, endos)
        if not e.leq(c):
            raise InternalConsistencyError(f"End({x}, {y}) is not inside C({x}, {y})")
        if e.block_of not in family:
            report.congruences_in_family = False
        if e == c:
            report.equality_pairs += 1
        for block in c.blocks():
            report.quadruples += len(block) * (len(block) - 1)
        if not c.leq(e):
            if report.counterexample is None:
                k, l = next((k, l) for k, l in c.pairs() if not e.related(k, l))
                report.counterexample = (x, y, table.nodes[k], table.nodes[l])
            continue
        if len(report.certificates) < max_certificates:
            for block in c.blocks():
                if len(block) < 2:
                    continue
                parent = _chain_search(table, i, j, block[0], endos.maps)
                for l in block[1:]:
                    if len(report.certificates) >= max_certificates:
                        break
                    quadruple = (x, y, table.nodes[block[0]], table.nodes[l])
                    report.certificates.append(
                        _certificate_from_tree(table, quadruple, parent, l, endos.maps)
                    )

    if report.counterexample is not None:
        report.verdict = Verdict.REFUTED if endos.complete else Verdict.UNKNOWN
    logger.info(
        f"🧪 Mal'tsev check on {table.size} nodes: {report.verdict.value} "
        f"({len(endos.maps)} endomorphisms, complete={endos.complete})"
    )
    return report


class _SharedBudget:
    """Step allowance shared by a series of targeted searches."""

    def __init__(self, limit: int):
        self.remaining = limit
        self.exhausted = False

    def extend(self, table: LatticeTable, fixed: Dict[int, int]) -> Optional[SelfMap]:
        if self.remaining <= 0:
            self.exhausted = True
            return None
        step = _search(table, self.remaining, fixed=fixed, stop_after=1)
        self.remaining -= step.visited
        self.exhausted = self.exhausted or step.exhausted
        return step.maps[0] if step.maps else None


def homogeneity_in_extension(small: LatticeTable, big: LatticeTable, budget: int) -> ClauseResult:
    """
    Homogeneity interpolants for every quadruple of ``small`` using maps of ``big``.

    For each pair (x, y) and each block of C(x, y) in ``small``, grows the set
    of nodes reachable from the block's least node, one targeted search per
    candidate link. Links stay inside the matching block of C(x, y) in ``big``.
    """
    spend = _SharedBudget(budget)
    for i, j in itertools.combinations(range(small.size), 2):
        x, y = small.nodes[i], small.nodes[j]
        targets = [
            [small.nodes[p] for p in block]
            for block in principal_equivalence(small, x, y).blocks()
            if len(block) > 1
        ]
        if not targets:
            continue
        bx, by = big.position(x), big.position(y)
        c_big = principal_equivalence(big, x, y)
        for block in targets:
            start = big.position(block[0])
            pool = [p for p in range(big.size) if c_big.related(p, start)]
            goals = {big.position(node) for node in block[1:]}
            reached = {start}
            queue = deque([start])
            while queue and not goals <= reached and not spend.exhausted:
                z = queue.popleft()
                for w in pool:
                    if w in reached:
                        continue
                    f = spend.extend(big, {bx: z, by: w})
                    if f is None:
                        f = spend.extend(big, {bx: w, by: z})
                    if f is not None:
                        reached.add(w)
                        queue.append(w)
                    if spend.exhausted:
                        break
            missing = goals - reached
            if missing:
                witness = (x, y, block[0], big.nodes[min(missing)])
                if spend.exhausted:
                    return ClauseResult(Verdict.UNKNOWN, "search budget exhausted", witness)
                return ClauseResult(Verdict.REFUTED, "homogeneity interpolants missing", witness)
    return ClauseResult(Verdict.VERIFIED)


def con_end_diagnostic(
    table: LatticeTable,
    endos: EndomorphismSet,
    sample: int,
    seed: int = 0,
) -> dict:
    """
    Best-effort: sampled principal congruences of the found maps, and which
    of them fall outside Θ̂.
    """
    pairs = list(itertools.combinations(table.nodes, 2))
    rng = random.Random(seed)
    chosen = pairs if len(pairs) <= sample else rng.sample(pairs, sample)
    family = {r.block_of for r in table.distinct_relations()}
    outside = [
        [x, y]
        for x, y in chosen
        if principal_congruence(table, x, y, endos).block_of not in family
    ]
    return {
        "bestEffort": True,
        "complete": endos.complete,
        "sampled": len(chosen),
        "outside": outside,
    }
