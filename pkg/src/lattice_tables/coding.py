"""
The height-three lattice L(U) coding a finite set, its scrambled presentations and decoders.

Atoms: p, s, e0, e1, g0..g{N-1}. Co-atoms: f0 over the even g's, f1 over
the odd g's, a{n} = e1 ∨ g{2n}, b{n} = e0 ∨ g{2n+1}, and c{i} = g{i} ∨ s
for every i outside U. The g's form a Shore sequence and a Slaman-Woodin
set for p with q = 1, and n ∈ U exactly when g{n} ∨ s = 1.

Decoders see a presentation only through :class:`PresentationView`: join
lookups, the ≤-facts in enumeration order, and the landmark ids.
"""

from __future__ import annotations

import dataclasses
import logging
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DecodeError, InternalConsistencyError, ValidationError
from .lattice_core import FiniteLattice, lattice_from_order

logger = logging.getLogger(__name__)

LANDMARKS = ("p", "q", "e0", "e1", "f0", "f1", "g0", "s")


@dataclass(frozen=True)
class CodedLattice:
    n: int
    u: FrozenSet[int]
    lattice: FiniteLattice
    p: int
    s: int
    e0: int
    e1: int
    f0: int
    f1: int
    g: Tuple[int, ...]

    @property
    def q(self) -> int:
        return self.lattice.top


@dataclass(frozen=True)
class PredicateReport:
    ok: bool
    witness: Tuple = ()

    def to_json(self) -> dict:
        return {"ok": self.ok, "witness": list(self.witness)}


def _coded_order(u: FrozenSet[int], n: int) -> Tuple[List[str], List[Tuple[str, str]]]:
    g = [f"g{i}" for i in range(n)]
    atoms = ["p", "s", "e0", "e1"] + g
    covers: Dict[str, List[str]] = {
        "f0": [g[i] for i in range(0, n, 2)],
        "f1": [g[i] for i in range(1, n, 2)],
    }
    for k in range(0, n, 2):
        covers[f"a{k // 2}"] = ["e1"] + [g[i] for i in (k, k + 1) if i < n]
    for k in range(1, n, 2):
        covers[f"b{k // 2}"] = ["e0"] + [g[i] for i in (k, k + 1) if i < n]
    for i in range(n):
        if i not in u:
            covers[f"c{i}"] = [g[i], "s"]

    names = ["0"] + atoms + list(covers) + ["1"]
    pairs = [("0", a) for a in atoms]
    for coatom, below in covers.items():
        pairs.extend((a, coatom) for a in below)
        pairs.append(("0", coatom))
        pairs.append((coatom, "1"))
    pairs.extend((a, "1") for a in atoms)
    return names, pairs


def _height(lattice: FiniteLattice) -> int:
    order = sorted(lattice.elements, key=lambda a: sum(lattice.leq_table[b][a] for b in lattice.elements))
    depth = {}
    for a in order:
        depth[a] = max((depth[b] + 1 for b in depth if lattice.lt(b, a)), default=0)
    return depth[lattice.top]


def build_coded_lattice(u: Iterable[int], n: int) -> CodedLattice:
    """
    L(U) truncated to N g-atoms, with every coding invariant checked.

    Raises:
        ValidationError: N < 1 or U leaves {0..N-1}
        InternalConsistencyError: The built lattice breaks an invariant
    """
    u = frozenset(int(i) for i in u)
    if n < 1:
        raise ValidationError("the coded lattice needs at least one g-atom")
    if any(not 0 <= i < n for i in u):
        raise ValidationError(f"set {sorted(u)} is not inside 0..{n - 1}")
    names, pairs = _coded_order(u, n)
    lattice = lattice_from_order(names, pairs, size_bound=len(names))
    ids = {name: lattice.id_of(name) for name in ("p", "s", "e0", "e1", "f0", "f1")}
    coded = CodedLattice(n=n, u=u, lattice=lattice, g=tuple(lattice.id_of(f"g{i}") for i in range(n)), **ids)
    _verify_coded(coded)
    logger.info(f"🧮 Coded {sorted(u)} with N={n} in a {lattice.size}-element lattice")
    return coded


def _verify_coded(coded: CodedLattice) -> None:
    L = coded.lattice
    if _height(L) > 3:
        raise InternalConsistencyError("coded lattice is taller than three")
    for i, gi in enumerate(coded.g):
        if (L.join(gi, coded.s) == L.top) != (i in coded.u):
            raise InternalConsistencyError(f"g{i} ∨ s does not code membership of {i}")
    shore = check_shore_sequence(L, coded.g, coded.e0, coded.e1, coded.f0, coded.f1)
    if not shore.ok:
        raise InternalConsistencyError(f"g-atoms are not a Shore sequence at {shore.witness}")
    sw = check_sw_set(L, coded.g, coded.p, coded.q)
    if not sw.ok:
        raise InternalConsistencyError(f"g-atoms are not a Slaman-Woodin set at {sw.witness}")


def check_sw_set(lattice: FiniteLattice, members: Sequence[int], p: int, q: int) -> PredicateReport:
    """Every g has g ∨ p ≥ q and no y < g has y ∨ p ≥ q."""
    L = lattice
    p, q = L._check(p), L._check(q)
    for g in members:
        g = L._check(g)
        if not L.leq(q, L.join(g, p)):
            return PredicateReport(False, (L.names[g],))
        for y in L.elements:
            if L.lt(y, g) and L.leq(q, L.join(y, p)):
                return PredicateReport(False, (L.names[g], L.names[y]))
    return PredicateReport(True)


def check_shore_sequence(
    lattice: FiniteLattice, seq: Sequence[int], e0: int, e1: int, f0: int, f1: int
) -> PredicateReport:
    """g(2i+1) = (g(2i) ∨ e1) ∧ f1 and g(2i+2) = (g(2i+1) ∨ e0) ∧ f0 wherever both sides are in range."""
    L = lattice
    seq = [L._check(x) for x in seq]
    e0, e1, f0, f1 = (L._check(x) for x in (e0, e1, f0, f1))
    for k in range(len(seq) - 1):
        e, f = (e1, f1) if k % 2 == 0 else (e0, f0)
        if seq[k + 1] != L.meet(L.join(seq[k], e), f):
            return PredicateReport(False, (k, L.names[seq[k]], L.names[seq[k + 1]]))
    return PredicateReport(True)


def check_decode_uniqueness(coded: CodedLattice) -> PredicateReport:
    """Each decode step's formula has exactly the next g-atom as solution."""
    L = coded.lattice
    for k in range(coded.n - 1):
        e, f = (coded.e1, coded.f1) if k % 2 == 0 else (coded.e0, coded.f0)
        bound = L.join(coded.g[k], e)
        solutions = [
            y for y in L.elements
            if L.leq(y, bound) and L.leq(y, f) and L.leq(coded.q, L.join(y, coded.p))
        ]
        if solutions != [coded.g[k + 1]]:
            return PredicateReport(False, (k, [L.names[y] for y in solutions]))
    return PredicateReport(True)


# Presentations

@dataclass(frozen=True)
class PresentationTruth:
    """Ground truth kept apart from what decoders see."""

    u: FrozenSet[int]
    permutation: Tuple[int, ...]
    names: Tuple[str, ...]


@dataclass(frozen=True)
class Presentation:
    size: int
    joins: Tuple[Tuple[int, ...], ...]
    leq_facts: Tuple[Tuple[int, int], ...]
    landmarks: Dict[str, int]
    seed: int
    g_count: int
    truth: Optional[PresentationTruth] = None

    def view(self) -> "PresentationView":
        return PresentationView(self)


class PresentationView:
    """Join lookups, enumerated ≤-facts and landmarks; nothing else."""

    def __init__(self, presentation: Presentation):
        self._joins = presentation.joins
        self._facts = presentation.leq_facts
        self._landmarks = dict(presentation.landmarks)
        self.size = presentation.size
        self.g_count = presentation.g_count

    def join(self, a: int, b: int) -> int:
        if not (0 <= a < self.size and 0 <= b < self.size):
            raise ValidationError(f"unknown presented ids ({a}, {b})")
        return self._joins[a][b]

    def leq_facts(self) -> Iterator[Tuple[int, int]]:
        return iter(self._facts)

    def landmark(self, name: str) -> int:
        try:
            return self._landmarks[name]
        except KeyError:
            raise ValidationError(f"presentation has no landmark {name!r}") from None


def scramble(
    source: Union[CodedLattice, FiniteLattice],
    seed: int,
    landmarks: Optional[Dict[str, int]] = None,
) -> Presentation:
    """
    Relabel ids by a seeded permutation and enumerate ≤-facts in a seeded order.

    A :class:`CodedLattice` carries its own landmarks and coded set. A plain
    :class:`FiniteLattice` gets only the ``landmarks`` passed in (original
    ids), an empty coded set and no g-atoms.

    Raises:
        ValidationError: A landmark names an element outside the lattice
    """
    if isinstance(source, CodedLattice):
        L = source.lattice
        originals = {
            "p": source.p, "q": source.q, "e0": source.e0, "e1": source.e1,
            "f0": source.f0, "f1": source.f1, "g0": source.g[0], "s": source.s,
        }
        u, g_count = source.u, source.n
    else:
        L = source
        originals = dict(landmarks or {})
        u, g_count = frozenset(), 0
    for name, element in originals.items():
        if not 0 <= element < L.size:
            raise ValidationError(f"landmark {name!r} = {element} outside 0..{L.size - 1}")
    rng = random.Random(seed)
    perm = list(L.elements)
    rng.shuffle(perm)
    joins = [[0] * L.size for _ in L.elements]
    for a in L.elements:
        for b in L.elements:
            joins[perm[a]][perm[b]] = perm[L.join(a, b)]
    facts = [(perm[a], perm[b]) for a in L.elements for b in L.elements if L.leq(a, b)]
    rng.shuffle(facts)
    return Presentation(
        size=L.size,
        joins=tuple(tuple(row) for row in joins),
        leq_facts=tuple(facts),
        landmarks={name: perm[element] for name, element in originals.items()},
        seed=seed,
        g_count=g_count,
        truth=PresentationTruth(u=u, permutation=tuple(perm), names=L.names),
    )


def _as_view(presentation: Union[Presentation, PresentationView]) -> PresentationView:
    return presentation.view() if isinstance(presentation, Presentation) else presentation


def decode_g_sequence(presentation: Union[Presentation, PresentationView], count: int) -> List[int]:
    """
    Presented ids of g0 .. g{count-1}.

    From x = g{k} the next atom is the first y, in fact-enumeration order,
    for which the facts y ≤ x ∨ e, y ≤ f and q ≤ y ∨ p have all been seen,
    with (e, f) = (e1, f1) for even k and (e0, f0) for odd k.

    Raises:
        ValidationError: count outside 1..g_count
        DecodeError: No candidate completes a step
    """
    view = _as_view(presentation)
    if not 1 <= count <= view.g_count:
        raise ValidationError(f"count {count} outside 1..{view.g_count}")
    p, q = view.landmark("p"), view.landmark("q")
    steps = {0: (view.landmark("e1"), view.landmark("f1")), 1: (view.landmark("e0"), view.landmark("f0"))}
    joined_with_p: Dict[int, List[int]] = {}
    for y in range(view.size):
        joined_with_p.setdefault(view.join(y, p), []).append(y)

    seq = [view.landmark("g0")]
    for k in range(count - 1):
        e, f = steps[k % 2]
        bound = view.join(seq[-1], e)
        seen: Dict[int, set] = {}
        found = None
        for a, b in view.leq_facts():
            marks = []
            if b == bound:
                marks.append((a, "bound"))
            if b == f:
                marks.append((a, "f"))
            if a == q:
                marks.extend((y, "q") for y in joined_with_p.get(b, ()))
            for y, mark in marks:
                seen.setdefault(y, set()).add(mark)
                if len(seen[y]) == 3:
                    found = y
                    break
            if found is not None:
                break
        if found is None:
            raise DecodeError(f"no candidate for g{k + 1}")
        seq.append(found)
    return seq


def decode_U(presentation: Union[Presentation, PresentationView]) -> FrozenSet[int]:
    """{n : the fact q ≤ g{n} ∨ s is enumerated}."""
    view = _as_view(presentation)
    seq = decode_g_sequence(view, view.g_count)
    q, s = view.landmark("q"), view.landmark("s")
    facts = set(view.leq_facts())
    decoded = frozenset(i for i, g in enumerate(seq) if (q, view.join(g, s)) in facts)
    logger.info(f"🔓 Decoded {len(decoded)} of {view.g_count} indices")
    return decoded


def corrupt_join(presentation: Presentation, a: int, b: int, value: int) -> Presentation:
    """Copy with both entries for the join of ``a`` and ``b`` set to ``value``."""
    size = presentation.size
    if not all(0 <= x < size for x in (a, b, value)):
        raise ValidationError(f"ids ({a}, {b}, {value}) outside the presentation")
    joins = [list(row) for row in presentation.joins]
    joins[a][b] = joins[b][a] = value
    return dataclasses.replace(presentation, joins=tuple(tuple(row) for row in joins))


def recover_lattice(presentation: Presentation) -> FiniteLattice:
    """
    The lattice behind a presentation.

    With ground truth the original names and ids come back; without it the
    presented ids become the names.
    """
    truth = presentation.truth
    if truth is None:
        names = [str(x) for x in range(presentation.size)]
        pairs = [(names[a], names[b]) for a, b in presentation.leq_facts]
        return lattice_from_order(names, pairs, size_bound=presentation.size)
    inverse = {presented: original for original, presented in enumerate(truth.permutation)}
    pairs = [(truth.names[inverse[a]], truth.names[inverse[b]]) for a, b in presentation.leq_facts]
    return lattice_from_order(list(truth.names), pairs, size_bound=presentation.size)


def presentation_to_json(presentation: Presentation, include_truth: bool = True) -> dict:
    payload = {
        "n": presentation.size,
        "joins": [list(row) for row in presentation.joins],
        "leqFacts": [list(fact) for fact in presentation.leq_facts],
        "landmarks": dict(presentation.landmarks),
        "seed": presentation.seed,
        "gCount": presentation.g_count,
    }
    if include_truth and presentation.truth is not None:
        truth = presentation.truth
        payload["truth"] = {
            "set": sorted(truth.u),
            "permutation": list(truth.permutation),
            "names": list(truth.names),
        }
    return payload


def presentation_from_json(payload: dict) -> Presentation:
    try:
        size = int(payload["n"])
        joins = tuple(tuple(int(v) for v in row) for row in payload["joins"])
        facts = tuple((int(a), int(b)) for a, b in payload["leqFacts"])
        landmarks = {str(name): int(v) for name, v in payload["landmarks"].items()}
        seed = int(payload.get("seed", 0))
        g_count = int(payload["gCount"])
        truth = None
        if "truth" in payload:
            raw = payload["truth"]
            truth = PresentationTruth(
                u=frozenset(int(i) for i in raw["set"]),
                permutation=tuple(int(x) for x in raw["permutation"]),
                names=tuple(raw["names"]),
            )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed presentation file: {e}") from e
    if len(joins) != size or any(len(row) != size for row in joins):
        raise ValidationError("join table does not match the presentation size")
    if any(not 0 <= v < size for row in joins for v in row):
        raise ValidationError("join table refers to unknown ids")
    if any(not 0 <= v < size for v in landmarks.values()):
        raise ValidationError("landmarks refer to unknown ids")
    missing = [name for name in LANDMARKS if name not in landmarks]
    if g_count > 0 and missing:
        raise ValidationError(f"coded presentation lacks landmarks {missing}")
    return Presentation(size, joins, facts, landmarks, seed, g_count, truth)
