import io
from fractions import Fraction

import pytest

from conftest import system_for

from gridquorum import (
    AttributeSchema,
    FailproneDescriptor,
    GridSystem,
    alpha_tightness_sweep,
    alpha_upper_cap,
    check_b3_exhaustive,
    check_q3_exhaustive,
    full_failure_counterexample,
    materialize,
    max_alpha,
    verify_witness,
    write_alpha_csv,
)
from gridquorum.tightness import is_alpha_feasible


def test_counterexample_chunks_small_k():
    cx = full_failure_counterexample(AttributeSchema.from_cardinalities([4, 4]), 0)
    assert cx.inflated_f == 2
    assert set().union(*cx.full_value_choices()) == {0, 1, 2, 3}
    cx = full_failure_counterexample(AttributeSchema.from_cardinalities([6, 4]), 0)
    assert cx.inflated_f == 2
    assert set().union(*cx.full_value_choices()) == set(range(6))


def test_counterexample_covers_and_violates_for_all_k():
    for k in range(4, 21):
        schema = AttributeSchema.from_cardinalities([k, 4])
        cx = full_failure_counterexample(schema, 0)
        inflated = GridSystem(schema).with_overrides(0, f=cx.inflated_f)
        assert verify_witness(inflated, cx.witness)
        union = 0
        for data in cx.witness["descriptors"]:
            union |= materialize(inflated, FailproneDescriptor.from_json(data)).mask
        assert union == inflated.universe.full_mask
        # and the default parameters never admit a cover
        assert check_q3_exhaustive(GridSystem(schema), 0, budget=None).holds


def test_counterexample_confirmed_by_checker():
    schema = AttributeSchema.from_cardinalities([5, 5])
    cx = full_failure_counterexample(schema, 0)
    inflated = GridSystem(schema).with_overrides(0, f=cx.inflated_f)
    verdict = check_q3_exhaustive(inflated, 0, budget=None)
    assert not verdict.holds


def test_alpha_cap_terminates_search():
    schema = AttributeSchema.from_cardinalities([4, 4])
    assert alpha_upper_cap(schema, 0, 1) == 3
    res = max_alpha(schema, 0, 1, mode="EXHAUSTIVE")
    assert res.default_alpha == 0
    assert res.max_feasible_alpha >= res.default_alpha


def test_max_alpha_exhaustive_frozen_values():
    assert max_alpha(AttributeSchema.from_cardinalities([4, 4]), 0).max_feasible_alpha == 1
    assert max_alpha(AttributeSchema.from_cardinalities([4, 5]), 0).max_feasible_alpha == 1
    assert max_alpha(AttributeSchema.from_cardinalities([5, 5]), 0).max_feasible_alpha == 1
    assert max_alpha(AttributeSchema.from_cardinalities([4, 7]), 0).max_feasible_alpha == 2


def test_max_alpha_boundary_is_sharp():
    for ks in ((4, 4), (4, 5), (5, 5), (4, 7)):
        schema = AttributeSchema.from_cardinalities(ks)
        res = max_alpha(schema, 0, 1, mode="EXHAUSTIVE")
        best = res.max_feasible_alpha
        assert is_alpha_feasible(schema, 0, 1, best)
        assert not is_alpha_feasible(schema, 0, 1, best + 1)
        over = GridSystem(schema).with_overrides(0, alpha=best)
        assert check_b3_exhaustive(over, 0, 1, budget=None).holds
        assert check_q3_exhaustive(over, 0, budget=None).holds
        # one past the maximum: whichever check breaks yields a live witness
        beyond = GridSystem(schema).with_overrides(0, alpha=best + 1)
        q3 = check_q3_exhaustive(beyond, 0, budget=None)
        b3 = check_b3_exhaustive(beyond, 0, 1, budget=None)
        assert not q3.holds or not b3.holds
        failing = q3 if not q3.holds else b3
        assert failing.witness is not None
        assert verify_witness(beyond, failing.witness)


def test_k5_pair_becomes_useful_through_searched_alpha():
    # the d=2, k=5 configuration becomes useful exactly through max alpha
    schema = AttributeSchema.equal(2, 5)
    res = max_alpha(schema, 0, 1, mode="EXHAUSTIVE")
    assert res.max_feasible_alpha >= 1
    from gridquorum import usefulness
    rec = usefulness(schema, 0, optimized_alpha=res.max_feasible_alpha)
    assert not rec.useful and rec.useful_opt


def test_adversarial_mode_matches_exhaustive_on_small():
    for ks in ((4, 4), (5, 5), (8, 8)):
        schema = AttributeSchema.from_cardinalities(ks)
        exh = max_alpha(schema, 0, 1, mode="EXHAUSTIVE")
        adv = max_alpha(schema, 0, 1, mode="ADVERSARIAL", effort=8)
        assert adv.max_feasible_alpha == exh.max_feasible_alpha
        assert adv.method == "ADVERSARIAL"
        assert adv.to_json()["feasibility_proven"] is False


def test_simultaneous_flag_smoke():
    schema = AttributeSchema.from_cardinalities([4, 4])
    res = max_alpha(schema, 0, 1, mode="EXHAUSTIVE", simultaneous=True)
    assert res.max_feasible_alpha <= 1


def test_sweep_rows_and_zero_increase_cells():
    rows = list(alpha_tightness_sweep(range(4, 9), range(4, 9), mode="EXHAUSTIVE"))
    assert len(rows) == 25
    by_cell = {(k1, k2): res for k1, k2, res in rows}
    assert all(res.increase_percent >= 0 for res in by_cell.values())
    # cells where the default budget is already maximal report 0%
    assert by_cell[(7, 7)].max_feasible_alpha == by_cell[(7, 7)].default_alpha == 1
    assert by_cell[(7, 7)].increase_percent == 0
    assert by_cell[(4, 4)].increase_percent == Fraction(75)


def test_alpha_csv_format():
    rows = list(alpha_tightness_sweep([4], [4, 5], mode="EXHAUSTIVE"))
    buf = io.StringIO()
    write_alpha_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k1,k2,default_alpha,max_alpha,method,increase_percent"
    assert lines[1] == "4,4,0,1,EXHAUSTIVE,75.000000"


def test_exhaustive_mode_requires_two_attributes():
    schema = AttributeSchema.equal(3, 4)
    with pytest.raises(ValueError):
        max_alpha(schema, 0, 1, mode="EXHAUSTIVE")
    res = max_alpha(schema, 0, 1, mode="ADVERSARIAL", effort=2)
    assert res.max_feasible_alpha >= res.default_alpha


def test_all_pairs_mode_for_higher_dimensions():
    schema = AttributeSchema.equal(3, 4)
    all_pairs = max_alpha(schema, 0, None, mode="ADVERSARIAL", effort=2, seed=0)
    assert all_pairs.paired_belief is None
    assert all_pairs.to_json()["paired_belief"] is None
    # against every partner is at most as permissive as against one
    single = max_alpha(schema, 0, 1, mode="ADVERSARIAL", effort=2, seed=0)
    assert all_pairs.max_feasible_alpha <= single.max_feasible_alpha
    assert is_alpha_feasible(schema, 0, None, all_pairs.max_feasible_alpha,
                             mode="ADVERSARIAL")
