import hashlib
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import TABLE1
from farhash.attributes import (
    Attribute,
    AttributeClass,
    AttributeManifest,
    ManifestError,
    aggregate_volatile,
    canonicalize,
    parse_manifest,
)


def sha_hex(s: str) -> str:
    return hashlib.sha256(s.encode()).hexdigest()


def test_parse_table1(table1):
    assert table1.object_label == "3D vision sensor"
    assert [a.name for a in table1.attributes] == [
        "Operating Temperature", "Working sensors", "IP address", "Mac address", "Type of sensors",
    ]
    assert len(table1.of_class(AttributeClass.STATIC)) == 2
    assert table1.attributes[3].value == "e5:84:e6:2f:33:61"


def test_serialize_is_canonical(table1):
    assert table1.serialize() == TABLE1
    noisy = "# comment\n\n" + TABLE1.replace("dynamic|IP", "\n# x\ndynamic|IP")
    assert parse_manifest(noisy).serialize() == TABLE1


def test_value_keeps_everything_after_first_equals():
    m = parse_manifest("object: o\nstatic|k= a=b \n")
    assert m.attributes[0].value == " a=b "


def test_empty_document():
    with pytest.raises(ManifestError, match="no attributes"):
        parse_manifest("")


def test_duplicate_name_reports_lines():
    with pytest.raises(ManifestError) as err:
        parse_manifest("object: o\nstatic|ip=1\ndynamic|ip=2\n")
    assert err.value.line == 3
    assert "first on line 2" in str(err.value)


@pytest.mark.parametrize(
    "text,line",
    [
        ("object: o\nfixed|a=1\n", 2),
        ("object: o\nstatic|a\n", 2),
        ("object: o\nstatic a=1\n", 2),
        ("object: o\nstatic|=1\n", 2),
        ("static|a=1\n", 1),
        ("object: o\nstatic|a=1\r\n", 2),
    ],
)
def test_malformed_lines(text, line):
    with pytest.raises(ManifestError) as err:
        parse_manifest(text)
    assert err.value.line == line


def test_needs_static():
    with pytest.raises(ManifestError, match="static"):
        parse_manifest("object: o\ndynamic|a=1\nvolatile|b=2\n")


def test_attribute_invariants():
    with pytest.raises(ManifestError):
        Attribute("", "v", AttributeClass.STATIC)
    with pytest.raises(ManifestError):
        Attribute("a=b", "v", AttributeClass.STATIC)
    with pytest.raises(ManifestError):
        Attribute("a", "v\nw", AttributeClass.STATIC)


def test_canonicalize():
    assert canonicalize("4") == b"\x34"
    assert canonicalize("28.60") == bytes.fromhex("32382e3630")
    assert sha_hex("28.60")[:8] == "e9162517"
    assert canonicalize("Infrared") != canonicalize("infrared")
    assert canonicalize("28.60") != canonicalize("28.6")


names = st.text(
    alphabet=st.characters(blacklist_characters="\n\r=", blacklist_categories=("Cs",)), min_size=1
).filter(lambda s: not s.startswith("#"))
values = st.text(alphabet=st.characters(blacklist_characters="\n\r", blacklist_categories=("Cs",)))


@st.composite
def manifests(draw):
    attr_names = draw(st.lists(names, min_size=1, max_size=6, unique=True))
    classes = draw(
        st.lists(st.sampled_from(list(AttributeClass)), min_size=len(attr_names), max_size=len(attr_names))
    )
    classes[0] = AttributeClass.STATIC
    label = draw(st.text(alphabet=st.characters(blacklist_characters="\n\r", blacklist_categories=("Cs",))))
    attrs = tuple(Attribute(n, draw(values), c) for n, c in zip(attr_names, classes))
    return AttributeManifest(label.strip(), attrs)


@given(manifests())
def test_round_trip(m):
    text = m.serialize()
    again = parse_manifest(text)
    assert again == m
    assert again.serialize() == text


# ---- volatile aggregation -------------------------------------------------


def test_aggregate_first_call_is_candidate():
    agg = aggregate_volatile(["a", "b", "c"])
    expected = sha_hex(sha_hex("a") + sha_hex("b") + sha_hex("c"))[:8]
    assert agg.value == expected
    assert agg.threshold == Fraction(1, 2)


def test_aggregate_below_threshold_keeps_previous():
    prev = aggregate_volatile(["a", "b", "c"])
    assert aggregate_volatile(["a", "B", "c"], prev) is prev


def test_aggregate_above_threshold_updates():
    prev = aggregate_volatile(["a", "b", "c"])
    new = aggregate_volatile(["A", "B", "c"], prev)
    assert new.value == sha_hex(sha_hex("A") + sha_hex("B") + sha_hex("c"))[:8]
    assert new.value != prev.value


def test_aggregate_errors():
    with pytest.raises(ManifestError, match="no volatile attributes"):
        aggregate_volatile([])
    with pytest.raises(ValueError):
        aggregate_volatile(["a"], threshold=0)
    with pytest.raises(ValueError):
        aggregate_volatile(["a"], threshold=Fraction(3, 2))


@given(
    n=st.integers(min_value=2, max_value=12),
    tau=st.fractions(min_value=Fraction(1, 20), max_value=1),
    order=st.randoms(use_true_random=False),
)
def test_hysteresis(n, tau, order):
    values = [f"v{i}" for i in range(n)]
    first = aggregate_volatile(values, threshold=tau)
    current = first
    indices = list(range(n))
    order.shuffle(indices)
    for step, i in enumerate(indices, start=1):
        values[i] = values[i] + "'"
        current = aggregate_volatile(values, current, tau)
        if Fraction(step, n) <= tau:
            assert current is first
        else:
            assert current.value != first.value
            break
