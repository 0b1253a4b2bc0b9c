import pytest

from utils.ref_parser import RefParser


@pytest.mark.parametrize(
    "text, expected",
    [
        ("catalog:M3", "M3"),
        ("pentagon", "N5"),
        (" 2x2 ", "B2"),
        ("two", "2"),
        ("catalog:3-chain", "3-chain"),
        ("lattices/foo.json", None),
        ("catalog:Z9", None),
    ],
)
def test_catalog_name(text, expected):
    assert RefParser.catalog_name(text) == expected


def test_lattice_ref():
    assert RefParser.lattice_ref("diamond") == "catalog:M3"
    assert RefParser.lattice_ref(" lattices/foo.json ") == "lattices/foo.json"


def test_parse_set():
    assert RefParser.parse_set("0,1,3") == frozenset({0, 1, 3})
    assert RefParser.parse_set("{0, 1}") == frozenset({0, 1})
    assert RefParser.parse_set("{}") == frozenset()
    assert RefParser.parse_set("") == frozenset()
    for bad in ("0,x", "-1", "1,,2"):
        with pytest.raises(ValueError):
            RefParser.parse_set(bad)


def test_parse_chain():
    assert RefParser.parse_chain("2>3-chain>B2") == ["catalog:2", "catalog:3-chain", "catalog:B2"]
    assert RefParser.parse_chain("two > pentagon") == ["catalog:2", "catalog:N5"]
    with pytest.raises(ValueError):
        RefParser.parse_chain("B2")


def test_format_set():
    assert RefParser.format_set({3, 0, 1}) == "{0,1,3}"
    assert RefParser.format_set(set()) == "{}"
