import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridquorum import (
    AttributeSchema,
    CardinalityWarning,
    Predicate,
    build_universe,
    restrict,
    restricted_cardinality,
)


def test_universe_sizes():
    os_loc = AttributeSchema.from_cardinalities([5, 7])
    assert build_universe(os_loc).n == 35
    assert build_universe(AttributeSchema.from_cardinalities([4])).n == 4
    assert build_universe(AttributeSchema.from_cardinalities([4, 4, 4])).n == 64


def test_id_coord_roundtrip():
    uni = build_universe(AttributeSchema.from_cardinalities([5, 7, 4]))
    for pid in uni:
        assert uni.coords_to_id(uni.id_to_coords(pid)) == pid


def test_restrict_examples():
    uni = build_universe(AttributeSchema.from_cardinalities([5, 7]))
    assert len(restrict(uni, Predicate.empty())) == 35
    assert len(restrict(uni, Predicate.of({0: [2]}))) == 7
    assert len(restrict(uni, Predicate.of({0: [2], 1: [0, 1]}))) == 2


def test_restricted_cardinality_examples():
    schema = AttributeSchema.from_cardinalities([5, 7])
    assert restricted_cardinality(schema, Predicate.of({0: [0]})) == 7
    assert restricted_cardinality(schema, Predicate.of({0: [0, 1], 1: [0, 1, 2]})) == 6
    assert restricted_cardinality(schema, Predicate.of({0: range(5)})) == 35


def test_restrict_membership_is_exact():
    uni = build_universe(AttributeSchema.from_cardinalities([4, 5, 4]))
    pred = Predicate.of({0: [1, 3], 2: [0]})
    got = set(restrict(uni, pred))
    want = {pid for pid in uni
            if uni.coord(pid, 0) in (1, 3) and uni.coord(pid, 2) == 0}
    assert got == want


@st.composite
def schema_and_predicate(draw):
    d = draw(st.integers(1, 3))
    ks = [draw(st.integers(4, 9)) for _ in range(d)]
    schema = AttributeSchema.from_cardinalities(ks)
    constrained = draw(st.lists(st.integers(0, d - 1), unique=True, max_size=d))
    mapping = {}
    for j in constrained:
        values = draw(st.lists(st.integers(0, ks[j] - 1), unique=True,
                               min_size=1, max_size=ks[j]))
        mapping[j] = values
    return schema, Predicate.of(mapping)


@given(schema_and_predicate())
@settings(max_examples=150, deadline=None)
def test_formula_matches_enumeration(case):
    schema, pred = case
    uni = build_universe(schema)
    assert restricted_cardinality(schema, pred) == len(restrict(uni, pred))


@given(schema_and_predicate())
@settings(max_examples=60, deadline=None)
def test_disjoint_value_sets_partition(case):
    # restricting one attribute to disjoint value sets yields disjoint sets
    # whose cardinalities add up to the unsplit restriction
    schema, _ = case
    uni = build_universe(schema)
    k0 = schema.k(0)
    left = list(range(k0 // 2))
    right = list(range(k0 // 2, k0))
    a = restrict(uni, Predicate.of({0: left})) if left else uni.empty_set()
    b = restrict(uni, Predicate.of({0: right}))
    assert a.isdisjoint(b)
    assert len(a) + len(b) == uni.n


def test_low_cardinality_warns_but_builds():
    with pytest.warns(CardinalityWarning):
        schema = AttributeSchema.from_cardinalities([3, 5])
    assert build_universe(schema).n == 15


def test_schema_validation_errors():
    with pytest.raises(ValueError):
        AttributeSchema(())
    with pytest.raises(ValueError):
        AttributeSchema((("A", ()),))
    with pytest.raises(ValueError):
        AttributeSchema((("A", ("x", "x")),))
    with pytest.raises(ValueError):
        AttributeSchema((("A", ("x",)), ("A", ("y",))))


def test_predicate_validation_errors():
    uni = build_universe(AttributeSchema.from_cardinalities([4, 4]))
    with pytest.raises(IndexError):
        restrict(uni, Predicate.of({5: [0]}))
    with pytest.raises(IndexError):
        restrict(uni, Predicate.of({0: [9]}))


def test_process_set_algebra():
    uni = build_universe(AttributeSchema.from_cardinalities([4, 4]))
    a = uni.process_set([0, 1, 2])
    b = uni.process_set([2, 3])
    assert len(a | b) == 4
    assert len(a & b) == 1
    assert len(a - b) == 2
    assert (a - b).issubset(a)
    assert a.complement().complement() == a
    assert sorted(a & b) == [2]


def test_schema_json_roundtrip(tmp_path):
    schema = AttributeSchema(
        (("OS", ("linux", "mac", "bsd", "windows")), ("Loc", ("CH", "DE", "IT", "UK"))))
    path = tmp_path / "schema.json"
    path.write_text(json.dumps(schema.to_json()))
    assert AttributeSchema.load(path) == schema
