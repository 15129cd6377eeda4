"""End-to-end pipeline on a 1-D rule with non-unit rational tile lengths."""

import json
from fractions import Fraction

import pytest

from hulltool.collars import collared_rule
from hulltool.complexes import kirchhoff_residual
from hulltool.efs import build_efs, level_extent, make_hull_point, translate_point
from hulltool.gaplabels import build_frequency_module, contains
from hulltool.measures import invariant_measure, unique_ergodicity
from hulltool.oracle import empirical_frequencies, verify_against
from hulltool.rules import parse_rule


@pytest.fixture(scope="module")
def stage():
    rule = parse_rule(json.dumps({
        "dimension": 1,
        "tiles": [{"label": "a", "dims": ["3/2"]}, {"label": "b", "dims": ["1"]}],
        "images": {"a": "ab", "b": "a"},
    }))
    crule = collared_rule(rule)
    efs = build_efs(crule)
    return rule, crule, efs, invariant_measure(efs)


def test_mass_and_residuals(stage):
    rule, crule, efs, m = stage
    for n in range(5):
        assert (m.hull_mass(n) - 1).is_zero()
    residual = kirchhoff_residual(efs.complex, m.level_weights(0))
    assert all(r.is_zero() for r in residual)


def test_level_volumes_follow_lengths(stage):
    rule, crule, efs, m = stage
    vols = dict(zip(efs.complex.top_labels, efs.level_volumes(1)))
    for cell, volume in vols.items():
        word = crule.forget_patch(crule.rule.images[cell])
        expected = sum((rule.tile(c).volume for c in word.cells), Fraction(0))
        assert volume == expected


def test_oracle_agreement_with_volumes(stage):
    rule, crule, efs, m = stage
    table = empirical_frequencies(rule, 18)
    exact = dict(zip(rule.labels, m.base_level_weights(0)))
    volumes = {t: rule.tile(t).volume for t in rule.labels}
    report = verify_against(exact, table, Fraction(1, 1000), volumes)
    assert report.passed


def test_translation_with_rational_lengths(stage):
    rule, crule, efs, m = stage
    cell = efs.complex.top_labels[0]
    extent = level_extent(efs, 3, cell)[0]
    assert extent.denominator in (1, 2)  # multiples of 1/2
    point = make_hull_point(efs, 3, cell, [Fraction(1, 3)])
    one = translate_point(efs, point, [Fraction(5, 4)])
    two = translate_point(efs, translate_point(efs, point, [Fraction(1, 2)]),
                          [Fraction(3, 4)])
    assert one == two


def test_gap_labels_and_certificate(stage):
    rule, crule, efs, m = stage
    cert = unique_ergodicity(efs)
    assert cert.status == "TRUE" and cert.strictly_decreasing
    module = build_frequency_module(m, 2)
    assert module.stabilized
    assert all(contains(module, g.value) for g in module.generators)
