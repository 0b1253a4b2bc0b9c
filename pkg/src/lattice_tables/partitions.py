"""
Equivalence relations on finite carriers and the partition lattice Part(X).

Carriers are id ranges ``0 .. size-1``. An :class:`EqRel` stores, for every
node, the least node of its block, so two relations are equal exactly when
their label tuples are equal.
"""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, List, Sequence, Tuple

from .errors import ValidationError

if TYPE_CHECKING:
    from .lattice_table import LatticeTable

logger = logging.getLogger(__name__)


class Comparison(str, enum.Enum):
    """Inclusion comparison of two relations as sets of pairs."""

    EQUAL = "equal"
    FINER = "finer"
    COARSER = "coarser"
    INCOMPARABLE = "incomparable"


class UnionFind:
    """Array union-find with path compression and union by rank."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        a = self.find(a)
        b = self.find(b)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True

    def labels(self) -> Tuple[int, ...]:
        """Canonical labels: the least member of each block."""
        least = {}
        out = []
        for x in range(len(self.parent)):
            root = self.find(x)
            out.append(least.setdefault(root, x))
        return tuple(out)


def _canonical(labels: Sequence) -> Tuple[int, ...]:
    first = {}
    return tuple(first.setdefault(label, x) for x, label in enumerate(labels))


@dataclass(frozen=True)
class EqRel:
    """An element of Part({0..size-1})."""

    block_of: Tuple[int, ...]

    def __post_init__(self):
        for x, rep in enumerate(self.block_of):
            if not (0 <= rep <= x) or self.block_of[rep] != rep:
                raise ValidationError(f"non-canonical block labels at node {x}")

    # Construction

    @classmethod
    def discrete(cls, size: int) -> "EqRel":
        return cls(tuple(range(size)))

    @classmethod
    def full(cls, size: int) -> "EqRel":
        return cls((0,) * size)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "EqRel":
        """Relation whose blocks are the fibres of an arbitrary labeling."""
        return cls(_canonical(labels))

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> "EqRel":
        labels = [None] * size
        for index, block in enumerate(blocks):
            for x in block:
                if not 0 <= x < size:
                    raise ValidationError(f"node {x} outside carrier of size {size}")
                if labels[x] is not None:
                    raise ValidationError(f"node {x} appears in two blocks")
                labels[x] = index
        missing = [x for x, label in enumerate(labels) if label is None]
        if missing:
            raise ValidationError(f"blocks do not cover nodes {missing}")
        return cls.from_labels(labels)

    @classmethod
    def generated(cls, size: int, pairs: Iterable[Tuple[int, int]]) -> "EqRel":
        """Least equivalence relation containing ``pairs``."""
        uf = UnionFind(size)
        for x, y in pairs:
            uf.union(x, y)
        return cls(uf.labels())

    # Queries

    @property
    def size(self) -> int:
        return len(self.block_of)

    def related(self, x: int, y: int) -> bool:
        size = len(self.block_of)
        if not (0 <= x < size and 0 <= y < size):
            raise ValidationError(f"nodes ({x}, {y}) outside carrier of size {size}")
        return self.block_of[x] == self.block_of[y]

    def blocks(self) -> List[List[int]]:
        grouped = {}
        for x, rep in enumerate(self.block_of):
            grouped.setdefault(rep, []).append(x)
        return [grouped[rep] for rep in sorted(grouped)]

    @property
    def num_blocks(self) -> int:
        return sum(1 for x, rep in enumerate(self.block_of) if x == rep)

    def is_discrete(self) -> bool:
        return self.num_blocks == self.size

    def is_full(self) -> bool:
        return self.num_blocks <= 1

    def pairs(self) -> Iterator[Tuple[int, int]]:
        """Related pairs ``(x, y)`` with ``x < y``."""
        for block in self.blocks():
            for i, x in enumerate(block):
                for y in block[i + 1:]:
                    yield x, y

    def leq(self, other: "EqRel") -> bool:
        """Inclusion as sets of pairs."""
        _same_carrier(self, other)
        ob = other.block_of
        return all(ob[x] == ob[rep] for x, rep in enumerate(self.block_of))

    # Part(X) operations

    def join(self, other: "EqRel") -> "EqRel":
        """Transitive closure of the union."""
        _same_carrier(self, other)
        uf = UnionFind(self.size)
        for x in range(self.size):
            uf.union(x, self.block_of[x])
            uf.union(x, other.block_of[x])
        return EqRel(uf.labels())

    def meet(self, other: "EqRel") -> "EqRel":
        """Block-wise intersection."""
        _same_carrier(self, other)
        return EqRel.from_labels(list(zip(self.block_of, other.block_of)))

    def restrict(self, positions: Sequence[int]) -> "EqRel":
        """Restriction to the given nodes, relabeled ``0 .. len(positions)-1``."""
        return EqRel.from_labels([self.block_of[p] for p in positions])

    # Serialization

    def to_json(self) -> List[List[int]]:
        return self.blocks()

    @classmethod
    def from_json(cls, size: int, blocks: Iterable[Iterable[int]]) -> "EqRel":
        return cls.from_blocks(size, blocks)

    def __str__(self) -> str:
        return "|".join(",".join(map(str, block)) for block in self.blocks())


def _same_carrier(p: EqRel, q: EqRel) -> None:
    if p.size != q.size:
        raise ValidationError(f"carrier mismatch: {p.size} vs {q.size}")


def part_ops(p: EqRel, q: EqRel) -> Tuple[EqRel, EqRel]:
    """Return ``(join, meet)`` of two relations in Part(X)."""
    return p.join(q), p.meet(q)


def compare(p: EqRel, q: EqRel) -> Comparison:
    below = p.leq(q)
    above = q.leq(p)
    if below and above:
        return Comparison.EQUAL
    if below:
        return Comparison.FINER
    if above:
        return Comparison.COARSER
    return Comparison.INCOMPARABLE


def join_all(relations: Iterable[EqRel], size: int) -> EqRel:
    """Left-to-right join; the discrete relation for an empty family."""
    return functools.reduce(EqRel.join, relations, EqRel.discrete(size))


def all_partitions(size: int) -> Iterator[EqRel]:
    """Every partition of ``0 .. size-1`` (restricted growth strings)."""
    if size == 0:
        yield EqRel(())
        return
    labels = [0] * size
    maxima = [0] * size

    def extend(i: int) -> Iterator[EqRel]:
        if i == size:
            yield EqRel.from_labels(labels)
            return
        for label in range(maxima[i - 1] + 2):
            labels[i] = label
            maxima[i] = max(maxima[i - 1], label)
            yield from extend(i + 1)

    yield from extend(1)


def principal_equivalence(table: "LatticeTable", x: int, y: int) -> EqRel:
    """
    C_Θ(x, y): intersection of the members of Θ̂ that contain (x, y).

    Args:
        table: The lattice table
        x, y: Node ids of the table

    Returns:
        The intersection, as a relation on the table's local positions
    """
    i = table.position(x)
    j = table.position(y)
    result = EqRel.full(table.size)
    for rel in table.distinct_relations():
        if rel.related(i, j):
            result = result.meet(rel)
    return result
