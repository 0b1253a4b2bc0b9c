"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from src.lattice_tables.partitions import EqRel
from src.lattice_tables.unary_algebra import close_composition


def labels_of_size(size):
    return st.lists(st.integers(0, size - 1), min_size=size, max_size=size)


# Random partitions of carriers with at most seven points
partitions = st.integers(1, 7).flatmap(lambda n: labels_of_size(n).map(EqRel.from_labels))

partition_pairs = st.integers(1, 7).flatmap(
    lambda n: st.tuples(labels_of_size(n), labels_of_size(n)).map(
        lambda pair: (EqRel.from_labels(pair[0]), EqRel.from_labels(pair[1]))
    )
)

partition_triples = st.integers(1, 6).flatmap(
    lambda n: st.tuples(labels_of_size(n), labels_of_size(n), labels_of_size(n)).map(
        lambda t: tuple(EqRel.from_labels(labels) for labels in t)
    )
)


@st.composite
def unary_algebras(draw, max_size=5, max_generators=2):
    """Composition-closed algebras with the identity adjoined."""
    size = draw(st.integers(1, max_size))
    count = draw(st.integers(1, max_generators))
    generators = [draw(labels_of_size(size)) for _ in range(count)]
    return close_composition(generators, size, adjoin_identity=True)
