"""
Finite bounded lattices, (0,1,∨)-homomorphisms, Galois adjoints and direct limits.

Element ids are dense integers ``0 .. size-1``; display names travel
separately. Join and meet tables are materialized once at validation.
"""

from __future__ import annotations

import functools
import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config.build_config import BuildConfig

from .errors import (
    BudgetExceededError,
    InternalConsistencyError,
    LatticeValidationError,
    ValidationError,
)
from .partitions import EqRel, UnionFind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FiniteLattice:
    """A validated bounded finite lattice. Build with :func:`validate_lattice`."""

    names: Tuple[str, ...]
    leq_table: Tuple[Tuple[bool, ...], ...]
    join_table: Tuple[Tuple[int, ...], ...]
    meet_table: Tuple[Tuple[int, ...], ...]
    bottom: int
    top: int

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def elements(self) -> range:
        return range(self.size)

    @property
    def nontrivial(self) -> bool:
        return self.bottom != self.top

    def _check(self, a: int) -> int:
        if not (isinstance(a, (int, np.integer)) and 0 <= a < self.size):
            raise ValidationError(f"unknown element id {a!r}")
        return int(a)

    def leq(self, a: int, b: int) -> bool:
        return self.leq_table[a][b]

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.leq_table[a][b]

    def comparable(self, a: int, b: int) -> bool:
        return self.leq_table[a][b] or self.leq_table[b][a]

    def join(self, a: int, b: int) -> int:
        return self.join_table[a][b]

    def meet(self, a: int, b: int) -> int:
        return self.meet_table[a][b]

    def join_all(self, items: Iterable[int]) -> int:
        return functools.reduce(self.join, items, self.bottom)

    def meet_all(self, items: Iterable[int]) -> int:
        return functools.reduce(self.meet, items, self.top)

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown element name {name!r}") from None

    def name_of(self, a: int) -> str:
        return self.names[self._check(a)]

    def proper_elements(self) -> List[int]:
        """L − {1}, in id order."""
        return [a for a in self.elements if a != self.top]

    def incomparable_pairs(self) -> List[Tuple[int, int]]:
        return [
            (a, b)
            for a, b in itertools.combinations(self.elements, 2)
            if not self.comparable(a, b)
        ]

    def dual(self) -> "FiniteLattice":
        """The order-dual lattice on the same names."""
        n = self.size
        return FiniteLattice(
            names=self.names,
            leq_table=tuple(tuple(self.leq_table[b][a] for b in range(n)) for a in range(n)),
            join_table=self.meet_table,
            meet_table=self.join_table,
            bottom=self.top,
            top=self.bottom,
        )

    def to_json(self) -> dict:
        pairs = [
            [self.names[a], self.names[b]]
            for a in self.elements
            for b in self.elements
            if a != b and self.leq_table[a][b]
        ]
        return {
            "elements": list(self.names),
            "leq": pairs,
            "join": [list(row) for row in self.join_table],
            "meet": [list(row) for row in self.meet_table],
        }


@dataclass(frozen=True)
class AxiomFailure:
    axiom: str
    witness: Tuple


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_lattice`."""

    failures: List[AxiomFailure] = field(default_factory=list)
    lattice: Optional[FiniteLattice] = None

    @property
    def ok(self) -> bool:
        return not self.failures and self.lattice is not None

    @property
    def bounded(self) -> bool:
        return self.lattice is not None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "bounded": self.bounded,
            "failures": [{"axiom": f.axiom, "witness": list(f.witness)} for f in self.failures],
        }


def _least(candidates: np.ndarray, leq: np.ndarray) -> Optional[int]:
    idx = np.flatnonzero(candidates)
    for u in idx:
        if leq[u, idx].all():
            return int(u)
    return None


def _greatest(candidates: np.ndarray, leq: np.ndarray) -> Optional[int]:
    idx = np.flatnonzero(candidates)
    for u in idx:
        if leq[idx, u].all():
            return int(u)
    return None


def validate_lattice(
    names: Sequence[str],
    leq_pairs: Iterable[Tuple[str, str]],
    size_bound: Optional[int] = None,
) -> ValidationReport:
    """
    Check that a finite order candidate is a bounded lattice.

    The relation is closed reflexively and transitively first; then every
    axiom is checked exhaustively and each failure is reported with a
    witness pair.

    Args:
        names: Element display names, in id order
        leq_pairs: Pairs ``(a, b)`` of names meaning ``a ≤ b``
        size_bound: Largest accepted size (default from config)

    Returns:
        Report; on success ``report.lattice`` holds the materialized lattice
    """
    bound = size_bound if size_bound is not None else BuildConfig.LATTICE_SIZE_BOUND
    names = tuple(str(n) for n in names)
    n = len(names)
    if n > bound:
        raise BudgetExceededError("lattice size", bound, n)
    if len(set(names)) != n:
        raise ValidationError("duplicate element names")
    index = {name: i for i, name in enumerate(names)}

    report = ValidationReport()
    if n == 0:
        report.failures.append(AxiomFailure("nonempty", ()))
        return report

    leq = np.eye(n, dtype=bool)
    for a, b in leq_pairs:
        if a not in index or b not in index:
            raise ValidationError(f"unknown element in pair ({a!r}, {b!r})")
        leq[index[a], index[b]] = True
    for k in range(n):
        leq |= leq[:, k:k + 1] & leq[k:k + 1, :]

    both = leq & leq.T
    np.fill_diagonal(both, False)
    for a, b in zip(*np.nonzero(both)):
        if a < b:
            report.failures.append(AxiomFailure("antisymmetry", (names[a], names[b])))
    if report.failures:
        return report

    join = [[0] * n for _ in range(n)]
    meet = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            j = _least(leq[a] & leq[b], leq)
            m = _greatest(leq[:, a] & leq[:, b], leq)
            if j is None:
                report.failures.append(AxiomFailure("join", (names[a], names[b])))
            else:
                join[a][b] = join[b][a] = j
            if m is None:
                report.failures.append(AxiomFailure("meet", (names[a], names[b])))
            else:
                meet[a][b] = meet[b][a] = m
    if report.failures:
        return report

    bottom = _least(np.ones(n, dtype=bool), leq)
    top = _greatest(np.ones(n, dtype=bool), leq)
    if bottom is None or top is None:
        report.failures.append(AxiomFailure("bounds", ()))
        return report

    for a in range(n):
        if join[a][a] != a or meet[a][a] != a:
            report.failures.append(AxiomFailure("idempotence", (names[a],)))
        for b in range(n):
            if join[a][meet[a][b]] != a or meet[a][join[a][b]] != a:
                report.failures.append(AxiomFailure("absorption", (names[a], names[b])))
    if report.failures:
        return report

    report.lattice = FiniteLattice(
        names=names,
        leq_table=tuple(tuple(bool(v) for v in row) for row in leq),
        join_table=tuple(tuple(row) for row in join),
        meet_table=tuple(tuple(row) for row in meet),
        bottom=bottom,
        top=top,
    )
    return report


def lattice_from_order(
    names: Sequence[str],
    leq_pairs: Iterable[Tuple[str, str]],
    size_bound: Optional[int] = None,
) -> FiniteLattice:
    """Like :func:`validate_lattice` but raise on failure."""
    report = validate_lattice(names, leq_pairs, size_bound)
    if not report.ok:
        first = report.failures[0]
        raise LatticeValidationError(
            f"not a bounded lattice: {first.axiom} fails at {first.witness}", report
        )
    return report.lattice


def lattice_from_json(payload: dict, size_bound: Optional[int] = None) -> FiniteLattice:
    try:
        names = payload["elements"]
        pairs = [tuple(pair) for pair in payload.get("leq", [])]
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed lattice file: {e}") from e
    return lattice_from_order(names, pairs, size_bound)


def lattice_to_json(lattice: FiniteLattice) -> dict:
    return lattice.to_json()


def bounds(lattice: FiniteLattice, a: int, b: int) -> Tuple[int, int]:
    """Return ``(a ∨ b, a ∧ b)``."""
    a = lattice._check(a)
    b = lattice._check(b)
    return lattice.join(a, b), lattice.meet(a, b)


# Catalog of test lattices

_CATALOG: Dict[str, Tuple[List[str], List[Tuple[str, str]]]] = {
    "2": (["0", "1"], [("0", "1")]),
    "3-chain": (["0", "m", "1"], [("0", "m"), ("m", "1")]),
    "4-chain": (["0", "a", "b", "1"], [("0", "a"), ("a", "b"), ("b", "1")]),
    "M3": (
        ["0", "a", "b", "c", "1"],
        [("0", x) for x in "abc"] + [(x, "1") for x in "abc"],
    ),
    "N5": (
        ["0", "a", "b", "c", "1"],
        [("0", "a"), ("a", "c"), ("c", "1"), ("0", "b"), ("b", "1")],
    ),
    "B2": (["0", "a", "b", "1"], [("0", "a"), ("0", "b"), ("a", "1"), ("b", "1")]),
}

CATALOG_NAMES = tuple(_CATALOG)


@functools.lru_cache(maxsize=None)
def catalog(name: str) -> FiniteLattice:
    """Built-in test lattice by name (2, 3-chain, 4-chain, M3, N5, B2)."""
    if name not in _CATALOG:
        raise ValidationError(f"unknown catalog lattice {name!r}; known: {', '.join(CATALOG_NAMES)}")
    names, pairs = _CATALOG[name]
    return lattice_from_order(names, pairs)


def load_lattice(ref: str) -> FiniteLattice:
    """Resolve ``catalog:NAME`` or a path to a lattice JSON file."""
    if ref.startswith("catalog:"):
        return catalog(ref.split(":", 1)[1])
    path = Path(ref)
    if not path.exists():
        raise ValidationError(f"lattice file not found: {ref}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"lattice file is not JSON: {e}") from e
    return lattice_from_json(payload)


# (0,1,∨)-homomorphisms

@dataclass(frozen=True)
class UslHom:
    source: FiniteLattice
    target: FiniteLattice
    images: Tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.images[a]

    @property
    def injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    def image(self) -> List[int]:
        return sorted(set(self.images))

    def to_json(self) -> dict:
        return {
            self.source.names[a]: self.target.names[b]
            for a, b in enumerate(self.images)
        }


@dataclass(frozen=True)
class HomReport:
    ok: bool
    violation: Optional[str] = None
    witness: Tuple = ()


def check_usl_hom(images: Sequence[int], source: FiniteLattice, target: FiniteLattice) -> HomReport:
    """
    Check the (0,1,∨)-homomorphism equations, reporting the first violation.

    Raises:
        ValidationError: The map is not total on ``source`` or leaves ``target``
    """
    images = tuple(images)
    if len(images) != source.size:
        raise ValidationError(f"map has {len(images)} values for {source.size} elements")
    for b in images:
        target._check(b)
    if images[source.bottom] != target.bottom:
        return HomReport(False, "bottom not preserved", (source.names[source.bottom],))
    if images[source.top] != target.top:
        return HomReport(False, "top not preserved", (source.names[source.top],))
    for a, b in itertools.combinations(source.elements, 2):
        if images[source.join(a, b)] != target.join(images[a], images[b]):
            return HomReport(False, "join not preserved", (source.names[a], source.names[b]))
    return HomReport(True)


def make_usl_hom(source: FiniteLattice, target: FiniteLattice, images: Sequence[int]) -> UslHom:
    report = check_usl_hom(images, source, target)
    if not report.ok:
        raise ValidationError(f"not a (0,1,∨)-homomorphism: {report.violation} at {report.witness}")
    return UslHom(source, target, tuple(images))


def identity_hom(lattice: FiniteLattice) -> UslHom:
    return UslHom(lattice, lattice, tuple(lattice.elements))


def enumerate_usl_homs(source: FiniteLattice, target: FiniteLattice) -> Iterator[UslHom]:
    """All (0,1,∨)-homomorphisms, in lexicographic order of images."""
    free = [a for a in source.elements if a not in (source.bottom, source.top)]
    for values in itertools.product(target.elements, repeat=len(free)):
        images = [0] * source.size
        images[source.bottom] = target.bottom
        images[source.top] = target.top
        for a, b in zip(free, values):
            images[a] = b
        if check_usl_hom(images, source, target).ok:
            yield UslHom(source, target, tuple(images))


def canonical_embedding(source: FiniteLattice, target: FiniteLattice) -> UslHom:
    """The first injective (0,1,∨)-homomorphism in lexicographic order."""
    for hom in enumerate_usl_homs(source, target):
        if hom.injective:
            return hom
    raise ValidationError("no injective (0,1,∨)-homomorphism between the given lattices")


def galois_adjoint(hom: UslHom) -> Tuple[int, ...]:
    """
    φ*β = ⋁{α ∈ L⁰ : φ(α) ≤ β}, as a map from target ids to source ids.

    The adjoint identities are verified before returning; a violation
    means the input was not a valid homomorphism.
    """
    report = check_usl_hom(hom.images, hom.source, hom.target)
    if not report.ok:
        raise ValidationError(f"not a (0,1,∨)-homomorphism: {report.violation} at {report.witness}")
    src, tgt = hom.source, hom.target
    adjoint = tuple(
        src.join_all(a for a in src.elements if tgt.leq(hom(a), beta))
        for beta in tgt.elements
    )
    _verify_adjoint(hom, adjoint)
    return adjoint


def _verify_adjoint(hom: UslHom, adjoint: Tuple[int, ...]) -> None:
    src, tgt = hom.source, hom.target

    def fail(clause: str, witness) -> None:
        raise InternalConsistencyError(f"Galois adjoint violates {clause} at {witness}")

    for a in src.elements:
        for beta in tgt.elements:
            if src.leq(a, adjoint[beta]) != tgt.leq(hom(a), beta):
                fail("adjunction", (src.names[a], tgt.names[beta]))
            if src.leq(a, adjoint[beta]) != src.leq(adjoint[hom(a)], adjoint[beta]):
                fail("closure round trip", (src.names[a], tgt.names[beta]))
    if adjoint[tgt.top] != src.top:
        fail("top preservation", (tgt.names[tgt.top],))
    for b1, b2 in itertools.combinations(tgt.elements, 2):
        if adjoint[tgt.meet(b1, b2)] != src.meet(adjoint[b1], adjoint[b2]):
            fail("meet preservation", (tgt.names[b1], tgt.names[b2]))
    for beta in tgt.elements:
        if beta != tgt.top and adjoint[beta] == src.top:
            fail("proper elements stay proper", (tgt.names[beta],))
    image = hom.image()
    if len({adjoint[beta] for beta in image}) != len(image):
        fail("injective on the image", tuple(tgt.names[b] for b in image))


# Direct limits

@dataclass(frozen=True)
class DirectLimitSystem:
    """Lattices L⁰..Lᵏ with homs φᵢ: Lⁱ → Lⁱ⁺¹ and a cutoff stage."""

    lattices: Tuple[FiniteLattice, ...]
    homs: Tuple[UslHom, ...]
    cutoff: int

    def validate(self) -> None:
        if len(self.homs) != len(self.lattices) - 1:
            raise ValidationError("a system of k+1 lattices needs k homomorphisms")
        if not 0 <= self.cutoff < len(self.lattices):
            raise ValidationError(f"cutoff {self.cutoff} outside 0..{len(self.lattices) - 1}")
        for i, hom in enumerate(self.homs):
            if hom.source != self.lattices[i] or hom.target != self.lattices[i + 1]:
                raise ValidationError(f"φ{i} does not map L{i} to L{i + 1}")
            report = check_usl_hom(hom.images, hom.source, hom.target)
            if not report.ok:
                raise ValidationError(f"φ{i}: {report.violation} at {report.witness}")


@dataclass(frozen=True)
class DirectLimit:
    """
    The quotient of the tagged disjoint union L⁰ ⊔ .. ⊔ Lᵏ by ≈.

    ``lattice`` is Lᵏ, which represents every ≈-class exactly once;
    ``canonical_maps[i]`` is the composed map Lⁱ → Lᵏ.
    """

    lattice: FiniteLattice
    canonical_maps: Tuple[Tuple[int, ...], ...]
    offsets: Tuple[int, ...]
    classes: EqRel

    def identified(self, i: int, a: int, j: int, b: int) -> bool:
        return self.classes.related(self.offsets[i] + a, self.offsets[j] + b)


def direct_limit(system: DirectLimitSystem) -> DirectLimit:
    system.validate()
    k = system.cutoff
    lattices = system.lattices[: k + 1]
    offsets = tuple(itertools.accumulate([0] + [L.size for L in lattices[:-1]]))
    uf = UnionFind(sum(L.size for L in lattices))
    for i in range(k):
        for a in lattices[i].elements:
            uf.union(offsets[i] + a, offsets[i + 1] + system.homs[i](a))

    maps = []
    for i in range(k + 1):
        images = list(lattices[i].elements)
        for hom in system.homs[i:k]:
            images = [hom(a) for a in images]
        maps.append(tuple(images))
    logger.info(f"🔗 Direct limit at cutoff {k}: {lattices[k].size} classes")
    return DirectLimit(
        lattice=lattices[k],
        canonical_maps=tuple(maps),
        offsets=offsets,
        classes=EqRel(uf.labels()),
    )
