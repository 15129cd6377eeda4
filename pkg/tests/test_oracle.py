from fractions import Fraction

import pytest

from hulltool import bundled_rule
from hulltool.errors import BudgetExceeded, DimensionMismatch
from hulltool.oracle import empirical_frequencies, verify_against


def test_thue_morse_is_exactly_balanced_at_even_depths():
    rule = bundled_rule("thue_morse")
    table = empirical_frequencies(rule, 10)
    assert table.frequencies["a"] == Fraction(1, 2)
    assert table.frequencies["b"] == Fraction(1, 2)


def test_solenoid_frequency_is_one():
    table = empirical_frequencies(bundled_rule("solenoid"), 8)
    assert table.frequencies == {"a": Fraction(1)}


def test_fibonacci_frequency_approaches_golden_ratio(pipeline):
    stage = pipeline("fibonacci")
    table = empirical_frequencies(stage.rule, 20)
    exact = stage.measure.base_level_weights(0)[0]
    diff = exact - table.frequencies["a"]
    absdiff = diff if diff.sign() >= 0 else -diff
    assert (absdiff - Fraction(1, 10**4)).sign() < 0


def test_deviation_shrinks_with_depth(pipeline):
    stage = pipeline("period_doubling")
    exact = stage.measure.base_level_weights(0)[0]
    previous = None
    for k in range(8, 21, 2):
        table = empirical_frequencies(stage.rule, k)
        diff = exact - table.frequencies["a"]
        absdiff = diff if diff.sign() >= 0 else -diff
        if previous is not None:
            assert (absdiff - previous).sign() <= 0
        previous = absdiff


def test_collared_census_counts(pipeline):
    stage = pipeline("fibonacci")
    table = empirical_frequencies(stage.rule, 10, collared=True, mode="face")
    assert set(table.counts) == set(stage.efs.complex.top_labels)
    assert sum(table.counts.values()) == table.total


def test_verify_against_trivial_and_mismatch():
    rule = bundled_rule("solenoid")
    table = empirical_frequencies(rule, 5)
    report = verify_against({"a": Fraction(1)}, table, Fraction(1, 10**6))
    assert report.passed
    with pytest.raises(DimensionMismatch):
        verify_against({"a": Fraction(1), "zz": Fraction(0)}, table, Fraction(1, 2))


def test_verify_against_respects_volumes():
    from hulltool.rules import parse_rule

    rule = parse_rule("""
        {"dimension": 1,
         "tiles": [{"label": "a", "dims": ["2"]}, {"label": "b", "dims": ["1"]}],
         "images": {"a": "ab", "b": "aa"}}""")
    table = empirical_frequencies(rule, 10)
    volumes = {"a": Fraction(2), "b": Fraction(1)}
    # per unit length a-tiles occur with density count_a / (2 n_a + n_b)
    density = Fraction(table.counts["a"], 2 * table.counts["a"] + table.counts["b"])
    report = verify_against({"a": density, "b": Fraction(table.counts["b"],
                                                         2 * table.counts["a"] + table.counts["b"])},
                            table, Fraction(1, 10**9), volumes)
    assert report.passed


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        empirical_frequencies(bundled_rule("thue_morse"), 30, budget=10**5)
