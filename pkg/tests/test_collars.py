import pytest

from conftest import ALL_RULES
from hulltool import bundled_rule
from hulltool.algebraic import perron_root_field
from hulltool.collars import (
    CollaredTile,
    check_flattening,
    collared_rule,
    corona_offsets,
    enumerate_collared,
    trivial_collaring,
)
from hulltool.homology import mat_transpose
from hulltool.rules import abelianization, expand, parse_rule


def census_oracle(rule, depth, mode="face"):
    """Independent corona census from a single deep inflation scan."""
    offsets = corona_offsets(rule.dimension, mode)
    found = set()
    for seed in rule.labels:
        patch = expand(rule, rule.single(seed), depth)
        for pos in patch.positions():
            corona = []
            ok = True
            for off in offsets:
                npos = tuple(p + o for p, o in zip(pos, off))
                if any(not 0 <= x < s for x, s in zip(npos, patch.shape)):
                    ok = False
                    break
                corona.append((off, patch.get(npos)))
            if ok:
                found.add(CollaredTile(patch.get(pos), tuple(corona)))
    return found


def test_fibonacci_has_four_collared_letters():
    rule = bundled_rule("fibonacci")
    tiles = enumerate_collared(rule)
    assert len(tiles) == 4
    assert set(census_oracle(rule, 12)) == set(tiles)


def test_single_letter_rule_has_one_collared_tile():
    rule = bundled_rule("solenoid")
    tiles = enumerate_collared(rule)
    assert len(tiles) == 1
    assert tiles[0] == CollaredTile("a", (((-1,), "a"), ((1,), "a")))


def test_thue_morse_census_stabilizes():
    rule = bundled_rule("thue_morse")
    tiles = enumerate_collared(rule)
    assert set(census_oracle(rule, 12)) == set(tiles)
    assert len(tiles) == 6


def test_chair_census_matches_oracle():
    rule = bundled_rule("chair")
    tiles = enumerate_collared(rule, mode="corner")
    assert set(census_oracle(rule, 6, mode="corner")) == set(tiles)


@pytest.mark.parametrize("name", ALL_RULES)
def test_forgetful_map_intertwines_substitution(name, pipeline):
    cr = pipeline(name).crule
    for code in cr.rule.labels:
        collapsed = cr.forget_patch(cr.rule.images[code])
        assert collapsed == cr.base.images[cr.forget[code]]


def test_solenoid_collared_rule_is_itself(pipeline):
    cr = pipeline("solenoid").crule
    assert len(cr.rule.labels) == 1
    label = cr.rule.labels[0]
    assert list(cr.rule.images[label].cells) == [label, label]


def test_flattening_verdicts(pipeline):
    assert check_flattening(pipeline("fibonacci").crule).ok
    assert check_flattening(pipeline("thue_morse").crule).ok
    report = check_flattening(trivial_collaring(bundled_rule("fibonacci")))
    assert not report.ok
    w = report.witness
    # two legal extensions map the wedge vertex star to different sheets
    assert {w["germ_a"], w["germ_b"]} == {"a", "b"}
    assert {w["image_a"], w["image_b"]} == {"a", "b"}
    assert check_flattening(trivial_collaring(bundled_rule("solenoid"))).ok


def test_chair_needs_corner_coronas(pipeline):
    cr = pipeline("chair").crule
    assert cr.mode == "corner"
    assert cr.rounds == 1
    face_report = check_flattening(collared_rule(
        bundled_rule("chair"), ensure_flattening=False))
    assert not face_report.ok  # face coronas alone do not force the border


@pytest.mark.parametrize("name", ALL_RULES)
def test_collared_perron_root_matches_base(name, pipeline):
    stage = pipeline(name)
    base_field = perron_root_field(abelianization(stage.rule))
    coll_field = perron_root_field(abelianization(stage.crule.rule))
    assert base_field.minpoly == coll_field.minpoly


@pytest.mark.parametrize("name", ALL_RULES)
def test_collared_set_closed_under_substitution(name, pipeline):
    cr = pipeline(name).crule
    labels = set(cr.rule.labels)
    for code in cr.rule.labels:
        assert set(cr.rule.images[code].cells) <= labels


@pytest.mark.parametrize("name", ALL_RULES)
def test_injectivity_radius_proxy_grows(name, pipeline):
    # smallest level-n cell size in the self-similar metric (volumes taken
    # from the left Perron vector) must increase strictly with n
    from hulltool.measures import perron_data

    stage = pipeline(name)
    A = abelianization(stage.crule.rule)
    pd = perron_data(A)
    level = list(pd.left)
    previous = None
    At = mat_transpose(A)
    for _ in range(5):
        smallest = min(level)
        if previous is not None:
            assert (smallest - previous).sign() > 0
        previous = smallest
        level = [sum((row[j] * level[j] for j in range(len(level))), pd.field.zero())
                 for row in At]


def test_collaring_is_deterministic():
    a = collared_rule(bundled_rule("thue_morse"))
    b = collared_rule(bundled_rule("thue_morse"))
    assert a.rule.labels == b.rule.labels
    assert {k: list(v.cells) for k, v in a.rule.images.items()} == \
           {k: list(v.cells) for k, v in b.rule.images.items()}


def test_collar_rejects_non_primitive():
    from hulltool.errors import NonPrimitiveRule

    doc = """{"dimension": 1,
              "tiles": [{"label": "a", "dims": ["1"]}, {"label": "b", "dims": ["1"]}],
              "images": {"a": "ab", "b": "b"}}"""
    with pytest.raises(NonPrimitiveRule):
        enumerate_collared(parse_rule(doc))


def test_thue_morse_flattens_after_one_round(pipeline):
    cr = pipeline("thue_morse").crule
    assert cr.rounds == 1 and cr.mode == "face"
