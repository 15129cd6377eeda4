"""Three-dimensional rules: lower strata come from the transitive closure of
facet identifications, so the classical 3-torus is a sharp oracle for the
gluing and sign conventions."""

import json

from hulltool.collars import check_flattening, collared_rule
from hulltool.complexes import build_complex
from hulltool.efs import build_efs, make_hull_point, translate_point
from hulltool.homology import FGAbelianGroup, homology_group, mat_mul
from hulltool.measures import invariant_measure
from hulltool.rules import abelianization, is_primitive, parse_rule


def solenoid_3d():
    return parse_rule(json.dumps({
        "dimension": 3,
        "tiles": [{"label": "a", "dims": ["1", "1", "1"]}],
        "expansion": [2, 2, 2],
        "images": {"a": [[["a", "a"], ["a", "a"]], [["a", "a"], ["a", "a"]]]},
    }))


def checkerboard_3d():
    img_a = [[["a" if (x + y + z) % 2 == 0 else "b" for x in range(2)]
              for y in range(2)] for z in range(2)]
    img_b = [[["b" if (x + y + z) % 2 == 0 else "a" for x in range(2)]
              for y in range(2)] for z in range(2)]
    return parse_rule(json.dumps({
        "dimension": 3,
        "tiles": [{"label": "a", "dims": ["1", "1", "1"]},
                  {"label": "b", "dims": ["1", "1", "1"]}],
        "expansion": [2, 2, 2],
        "images": {"a": img_a, "b": img_b},
    }))


def test_single_cube_quotient_is_the_three_torus():
    X = build_complex(solenoid_3d())
    assert X.counts() == [1, 3, 3, 1]
    assert [homology_group(X, i) for i in range(4)] == [
        FGAbelianGroup(1, ()), FGAbelianGroup(3, ()),
        FGAbelianGroup(3, ()), FGAbelianGroup(1, ())]
    for i in (2, 3):
        prod = mat_mul(X.boundary_matrix(i - 1), X.boundary_matrix(i))
        assert not any(any(row) for row in prod)


def test_three_torus_tower_and_measure():
    cr = collared_rule(solenoid_3d())
    assert len(cr.rule.labels) == 1
    assert check_flattening(cr).ok
    efs = build_efs(cr)
    m = invariant_measure(efs)
    assert efs.scale == 8
    assert (m.hull_mass(3) - 1).is_zero()
    point = make_hull_point(efs, 2, efs.complex.top_labels[0], [1, 2, 3])
    assert translate_point(efs, point, [0, 0, 0]) == point
    from fractions import Fraction

    moved = translate_point(efs, point, [Fraction(3, 2), Fraction(-1, 2), Fraction(1, 3)])
    back = translate_point(efs, moved, [Fraction(-3, 2), Fraction(1, 2), Fraction(-1, 3)])
    assert back == point


def test_checkerboard_complex_and_collar():
    rule = checkerboard_3d()
    assert abelianization(rule) == [[4, 4], [4, 4]]
    assert is_primitive(abelianization(rule)) == (True, 1)
    X = build_complex(rule)
    assert X.counts() == [1, 3, 3, 2]
    assert X.euler_characteristic() == -1
    cr = collared_rule(rule)
    assert cr.mode == "face" and cr.rounds == 1
    assert check_flattening(cr).ok
