import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.lattice_tables.coding import (
    build_coded_lattice,
    check_decode_uniqueness,
    check_shore_sequence,
    check_sw_set,
    corrupt_join,
    decode_U,
    decode_g_sequence,
    presentation_from_json,
    presentation_to_json,
    recover_lattice,
    scramble,
)
from src.lattice_tables.errors import DecodeError, ValidationError
from src.lattice_tables.lattice_core import catalog, validate_lattice


@pytest.fixture
def coded():
    return build_coded_lattice({0, 1, 3}, 5)


def test_coded_lattice_shape(coded):
    L = coded.lattice
    # 0, 9 atoms, f0 f1 a0 a1 a2 b0 b1 c2 c4, 1
    assert L.size == 20
    assert coded.q == L.top
    for i, g in enumerate(coded.g):
        assert (L.join(g, coded.s) == L.top) == (i in coded.u)


def test_coded_lattice_validates():
    coded = build_coded_lattice(set(), 3)
    names, pairs = coded.lattice.names, [
        (coded.lattice.names[a], coded.lattice.names[b])
        for a in coded.lattice.elements
        for b in coded.lattice.elements
        if coded.lattice.leq(a, b)
    ]
    assert validate_lattice(names, pairs, size_bound=len(names)).ok


def test_coding_predicates(coded):
    L = coded.lattice
    assert check_sw_set(L, coded.g, coded.p, coded.q).ok
    assert check_shore_sequence(L, coded.g, coded.e0, coded.e1, coded.f0, coded.f1).ok
    assert check_decode_uniqueness(coded).ok


def test_predicates_report_witnesses(coded):
    L = coded.lattice
    report = check_sw_set(L, [coded.p], coded.p, coded.q)
    assert not report.ok and report.witness == ("p",)
    swapped = [coded.g[1], coded.g[0]] + list(coded.g[2:])
    report = check_shore_sequence(L, swapped, coded.e0, coded.e1, coded.f0, coded.f1)
    assert not report.ok and report.witness[0] == 0


def test_single_atom_lattice():
    coded = build_coded_lattice({0}, 1)
    assert coded.g == (coded.lattice.id_of("g0"),)
    assert decode_U(scramble(coded, 3)) == frozenset({0})


def test_input_checks():
    with pytest.raises(ValidationError):
        build_coded_lattice(set(), 0)
    with pytest.raises(ValidationError):
        build_coded_lattice({5}, 5)


def test_scramble_is_seeded(coded):
    assert scramble(coded, 7) == scramble(coded, 7)
    assert scramble(coded, 7).leq_facts != scramble(coded, 8).leq_facts


def test_decode_matches_truth(coded):
    for seed in range(10):
        pres = scramble(coded, seed)
        perm = pres.truth.permutation
        assert decode_g_sequence(pres, 5) == [perm[g] for g in coded.g]
        assert decode_U(pres) == frozenset({0, 1, 3})


@given(st.sets(st.integers(0, 4)), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_decode_round_trip(members, seed):
    coded = build_coded_lattice(members, 5)
    assert decode_U(scramble(coded, seed)) == frozenset(members)


def test_view_hides_everything_else(coded):
    view = scramble(coded, 1).view()
    assert not hasattr(view, "truth")
    with pytest.raises(ValidationError):
        view.landmark("g1")
    with pytest.raises(ValidationError):
        decode_g_sequence(view, 6)


def test_corrupted_join_fails_to_decode(coded):
    pres = scramble(coded, 2)
    g0, e1 = pres.landmarks["g0"], pres.landmarks["e1"]
    broken = corrupt_join(pres, g0, e1, g0)
    with pytest.raises(DecodeError):
        decode_g_sequence(broken, 2)
    with pytest.raises(ValidationError):
        corrupt_join(pres, g0, e1, pres.size)


def test_presentation_json(coded):
    pres = scramble(coded, 4)
    assert presentation_from_json(presentation_to_json(pres)) == pres
    blind = presentation_from_json(presentation_to_json(pres, include_truth=False))
    assert blind.truth is None
    assert decode_U(blind) == coded.u
    with pytest.raises(ValidationError):
        presentation_from_json({"n": 2})


def test_recover_lattice(coded):
    pres = scramble(coded, 5)
    assert recover_lattice(pres) == coded.lattice
    assert recover_lattice(presentation_from_json(presentation_to_json(pres, False))).size == coded.lattice.size


def test_scramble_plain_lattice():
    N5 = catalog("N5")
    pres = scramble(N5, 3, landmarks={"p": N5.bottom})
    assert pres.size == 5 and pres.g_count == 0
    assert pres.landmarks["p"] == pres.truth.permutation[N5.bottom]
    assert recover_lattice(pres) == N5
    assert presentation_from_json(presentation_to_json(pres)) == pres
    with pytest.raises(ValidationError):
        pres.view().landmark("q")
    with pytest.raises(ValidationError):
        decode_U(pres)
    with pytest.raises(ValidationError):
        scramble(N5, 3, landmarks={"p": 5})


def test_coded_presentation_needs_every_landmark(coded):
    payload = presentation_to_json(scramble(coded, 6))
    del payload["landmarks"]["s"]
    with pytest.raises(ValidationError):
        presentation_from_json(payload)
