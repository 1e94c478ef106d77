import io
from fractions import Fraction

import pytest

from gridquorum import (
    AttributeSchema,
    UnsupportedCardinality,
    grid_params,
    sweep_2d,
    sweep_equal,
    threshold_card,
    usefulness,
    verify_usefulness_inequalities,
    write_scan_csv,
)


def test_threshold_card_examples():
    assert threshold_card(64) == 21
    assert threshold_card(128) == 42
    assert threshold_card(6) == 1
    with pytest.raises(ValueError):
        threshold_card(3)


def test_ceiling_placements_coincide():
    # ceil(n/3 - 1) == ceil(n/3) - 1 for every integer n
    import math
    for n in range(4, 5000):
        assert math.ceil(n / 3 - 1) == -(-n // 3) - 1 == threshold_card(n)


def test_usefulness_known_configurations():
    rec = usefulness(AttributeSchema.equal(3, 4), 0)
    assert (rec.grid_card, rec.threshold_card, rec.useful) == (22, 21, True)
    rec = usefulness(AttributeSchema.from_cardinalities([8, 4, 4]), 0)
    assert (rec.grid_card, rec.threshold_card, rec.useful) == (44, 42, True)
    rec = usefulness(AttributeSchema.equal(2, 9), 0)
    assert (rec.grid_card, rec.threshold_card, rec.useful) == (25, 26, False)
    assert usefulness(AttributeSchema.from_cardinalities([4, 7]), 0).useful


def test_usefulness_definition_consistency():
    for k in range(4, 40):
        rec = usefulness(AttributeSchema.equal(2, k), 0)
        assert rec.useful == (rec.grid_card > rec.threshold_card)
        assert rec.useful == (rec.ratio > 1)


def test_usefulness_rejects_low_cardinality():
    with pytest.warns(UserWarning):
        schema = AttributeSchema.from_cardinalities([3, 6])
    with pytest.raises(UnsupportedCardinality):
        usefulness(schema, 0)


def test_equal_sweep_verdicts():
    records = list(sweep_equal([2], range(4, 65)))
    verdicts = {rec.cardinalities[0]: rec.useful for rec in records}
    for k in (7, 8, 10, 11, 13, 14, *range(15, 65)):
        assert verdicts[k], f"k={k} should be useful"
    for k in (4, 5, 6, 9, 12):
        assert not verdicts[k], f"k={k} should not be useful"


def test_equal_sweep_higher_dimensions():
    for d in (3, 4, 5, 6):
        for k in (7, 8, 9):
            assert usefulness(AttributeSchema.equal(d, k), 0).useful
    assert not usefulness(AttributeSchema.equal(3, 6), 0).useful


def test_2d_sweep_unequal_verdicts():
    records = {rec.cardinalities: rec for rec in sweep_2d([4, 5, 7], range(4, 20))}
    for k2 in (7, 8, 9, 13, 14, 15):
        assert records[(4, k2)].useful
    for k2 in (10, 11, 12):
        assert not records[(4, k2)].useful
    for k2 in range(7, 20):
        assert records[(7, k2)].useful
    rec = records[(5, 7)]
    assert rec.grid_card == rec.threshold_card == 11 and not rec.useful


def test_optimized_alpha_column():
    rec = usefulness(AttributeSchema.equal(2, 5), 0, optimized_alpha=1)
    assert not rec.useful and rec.useful_opt
    assert rec.optimized_alpha == 1


def test_k5_higher_dimensions_useful_with_searched_alpha():
    # k=5 at d in {3,4,5} only becomes useful through the budget search
    from gridquorum import max_alpha
    for d in (3, 4, 5):
        schema = AttributeSchema.equal(d, 5)
        assert not usefulness(schema, 0).useful
        found = max_alpha(schema, 0, 1, mode="ADVERSARIAL", effort=4, seed=0)
        rec = usefulness(schema, 0, optimized_alpha=found.max_feasible_alpha)
        assert rec.useful_opt, f"d={d}"


def test_ratio_window_and_jitter_monotonicity():
    prev = None
    for k in range(30, 65):
        schema = AttributeSchema.equal(2, k)
        rec = usefulness(schema, 0)
        assert Fraction(1) < rec.ratio < Fraction(4, 3)
        if prev is not None:
            par = grid_params(schema, 0)
            jitter = Fraction(par.p + par.slice_size, rec.threshold_card)
            assert rec.ratio >= prev - jitter
        prev = rec.ratio


def test_inequality_report():
    report = verify_usefulness_inequalities(k_max=64, d_max=8, mixed_samples=3000, seed=1)
    assert report.violations == []
    names = {c.name for c in report.checks}
    assert {"two_dim_k_ge_15", "d_dim_k_4", "d_dim_k_789", "d_dim_k_ge_10",
            "two_dim_k1_4_k2_ge_13", "two_dim_k1_7_k2_ge_7",
            "d_dim_k1_4", "d_dim_k1_7", "d_dim_k1_8"} == names
    assert report.total_checked > 3000


def test_csv_output_is_deterministic():
    records = list(sweep_2d(range(4, 8), range(4, 8)))
    buf1, buf2 = io.StringIO(), io.StringIO()
    write_scan_csv(records, buf1)
    write_scan_csv(list(sweep_2d(range(4, 8), range(4, 8), threads=2)), buf2)
    assert buf1.getvalue() == buf2.getvalue()
    lines = buf1.getvalue().splitlines()
    assert lines[0] == ("d,k1,k2,belief,grid_card,threshold_card,ratio,useful,"
                        "optimized_alpha,useful_opt")
    assert lines[1] == "2,4,4,0,4,5,0.800000,false,,"
    assert len(lines) == 1 + 16
