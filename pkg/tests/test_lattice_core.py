import itertools
import json

import pytest

from src.lattice_tables.errors import BudgetExceededError, LatticeValidationError, ValidationError
from src.lattice_tables.lattice_core import (
    CATALOG_NAMES,
    DirectLimitSystem,
    UslHom,
    bounds,
    canonical_embedding,
    catalog,
    check_usl_hom,
    direct_limit,
    enumerate_usl_homs,
    galois_adjoint,
    identity_hom,
    lattice_from_json,
    lattice_from_order,
    load_lattice,
    make_usl_hom,
    validate_lattice,
)


@pytest.mark.parametrize("name, size", [("2", 2), ("3-chain", 3), ("4-chain", 4), ("M3", 5), ("N5", 5), ("B2", 4)])
def test_catalog_sizes(name, size):
    L = catalog(name)
    assert L.size == size
    assert L.names[L.bottom] == "0"
    assert L.names[L.top] == "1"


def test_bounds_do_not_depend_on_element_order():
    L = lattice_from_order(["top", "mid", "bot"], [("bot", "mid"), ("mid", "top")])
    assert L.names[L.bottom] == "bot" and L.names[L.top] == "top"
    assert L.join(L.bottom, L.id_of("mid")) == L.id_of("mid")
    assert L.meet(L.top, L.id_of("mid")) == L.id_of("mid")


def test_n5_operations():
    L = catalog("N5")
    a, b, c = (L.id_of(x) for x in "abc")
    assert L.lt(a, c)
    assert not L.comparable(b, c)
    assert bounds(L, a, b) == (L.top, L.bottom)
    assert L.meet(c, b) == L.bottom
    assert L.join(a, c) == c


def test_missing_join_is_reported():
    report = validate_lattice(["0", "a", "b"], [("0", "a"), ("0", "b")])
    assert not report.ok
    assert report.failures[0].axiom == "join"
    assert report.failures[0].witness == ("a", "b")


def test_antisymmetry_failure():
    report = validate_lattice(["a", "b"], [("a", "b"), ("b", "a")])
    assert [f.axiom for f in report.failures] == ["antisymmetry"]


def test_transitive_closure_is_taken():
    L = lattice_from_order(["0", "m", "1"], [("0", "m"), ("m", "1")])
    assert L.leq(L.id_of("0"), L.id_of("1"))


def test_lattice_from_order_raises_with_report():
    with pytest.raises(LatticeValidationError) as info:
        lattice_from_order(["0", "a", "b"], [("0", "a"), ("0", "b")])
    assert info.value.report is not None


def test_input_errors():
    with pytest.raises(ValidationError):
        validate_lattice(["0", "1"], [("0", "x")])
    with pytest.raises(ValidationError):
        validate_lattice(["0", "0"], [])
    with pytest.raises(BudgetExceededError):
        validate_lattice([str(i) for i in range(5)], [], size_bound=4)
    with pytest.raises(ValidationError):
        catalog("Z7")


def test_dual_swaps_bounds_and_operations():
    L = catalog("N5")
    D = L.dual()
    assert D.bottom == L.top and D.top == L.bottom
    a, b = L.id_of("a"), L.id_of("b")
    assert D.join(a, b) == L.meet(a, b)
    assert D.leq(L.top, a)


def test_json_and_file_loading(tmp_path):
    L = catalog("M3")
    assert lattice_from_json(L.to_json()) == L
    path = tmp_path / "m3.json"
    path.write_text(json.dumps(L.to_json()))
    assert load_lattice(str(path)) == L
    assert load_lattice("catalog:M3") == L
    with pytest.raises(ValidationError):
        load_lattice(str(tmp_path / "missing.json"))
    with pytest.raises(ValidationError):
        lattice_from_json({"leq": []})


def test_check_usl_hom_reports_first_violation():
    two, chain = catalog("2"), catalog("3-chain")
    assert check_usl_hom((0, 2), two, chain).ok
    report = check_usl_hom((0, 1), two, chain)
    assert not report.ok and report.violation == "top not preserved"
    with pytest.raises(ValidationError):
        check_usl_hom((0,), two, chain)


def test_join_violation():
    B2, chain = catalog("B2"), catalog("3-chain")
    # a, b both to m: a ∨ b = 1 must go to m ∨ m = m
    report = check_usl_hom((0, 1, 1, 2), B2, chain)
    assert report.violation == "join not preserved"


def test_canonical_embeddings():
    assert canonical_embedding(catalog("2"), catalog("3-chain")).images == (0, 2)
    assert canonical_embedding(catalog("3-chain"), catalog("N5")).images == (0, 1, 4)
    assert canonical_embedding(catalog("3-chain"), catalog("B2")).images == (0, 1, 3)
    with pytest.raises(ValidationError):
        canonical_embedding(catalog("B2"), catalog("3-chain"))


def test_enumerate_from_two_is_single():
    for name in CATALOG_NAMES:
        homs = list(enumerate_usl_homs(catalog("2"), catalog(name)))
        assert len(homs) == 1


def test_adjoint_examples():
    hom = make_usl_hom(catalog("2"), catalog("3-chain"), (0, 2))
    assert galois_adjoint(hom) == (0, 0, 1)
    hom = make_usl_hom(catalog("3-chain"), catalog("N5"), (0, 1, 4))
    assert galois_adjoint(hom) == (0, 1, 0, 1, 2)
    L = catalog("M3")
    assert galois_adjoint(identity_hom(L)) == tuple(L.elements)


def test_adjoint_rejects_non_homomorphism():
    bad = UslHom(catalog("2"), catalog("3-chain"), (0, 1))
    with pytest.raises(ValidationError):
        galois_adjoint(bad)


def test_adjoint_identities_over_whole_catalog():
    for s, t in itertools.product(CATALOG_NAMES, repeat=2):
        L0, L1 = catalog(s), catalog(t)
        for hom in enumerate_usl_homs(L0, L1):
            adjoint = galois_adjoint(hom)
            assert adjoint[L1.top] == L0.top
            for a in L0.elements:
                for beta in L1.elements:
                    assert L0.leq(a, adjoint[beta]) == L1.leq(hom(a), beta)


def test_direct_limit_identifies_along_maps():
    L = [catalog("2"), catalog("3-chain"), catalog("B2")]
    homs = (canonical_embedding(L[0], L[1]), canonical_embedding(L[1], L[2]))
    limit = direct_limit(DirectLimitSystem(tuple(L), homs, cutoff=2))
    assert limit.lattice == L[2]
    assert limit.canonical_maps[0] == (0, 3)
    assert limit.canonical_maps[1] == (0, 1, 3)
    assert limit.identified(0, 1, 2, 3)
    assert limit.identified(1, 1, 2, 1)
    assert not limit.identified(1, 1, 2, 2)


def test_direct_limit_system_validation():
    two, chain = catalog("2"), catalog("3-chain")
    with pytest.raises(ValidationError):
        direct_limit(DirectLimitSystem((two, chain), (), cutoff=1))
    hom = canonical_embedding(two, chain)
    with pytest.raises(ValidationError):
        direct_limit(DirectLimitSystem((two, chain), (hom,), cutoff=2))
