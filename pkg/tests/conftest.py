from fractions import Fraction


import pytest

from hulltool import BUNDLED_RULES, bundled_rule
from hulltool.collars import collared_rule, trivial_collaring
from hulltool.complexes import CellComplex, SideData, build_complex
from hulltool.efs import build_efs, control_efs
from hulltool.measures import invariant_measure
from hulltool.rules import parse_rule

ALL_RULES = list(BUNDLED_RULES)
ONE_D_RULES = ["fibonacci", "thue_morse", "period_doubling", "solenoid"]
TWO_D_RULES = ["chair", "thue_morse_2d"]


class PipelineStage:
    """Per-rule pipeline with each stage built on first use."""

    def __init__(self, name):
        self.name = name
        self._cache = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def rule(self):
        return self._get("rule", lambda: bundled_rule(self.name))

    @property
    def crule(self):
        return self._get("crule", lambda: collared_rule(self.rule))

    @property
    def base_complex(self):
        return self._get("base_complex", lambda: build_complex(self.rule))

    @property
    def efs(self):
        return self._get("efs", lambda: build_efs(self.crule))

    @property
    def collared_complex(self):
        return self.efs.complex

    @property
    def measure(self):
        return self._get("measure", lambda: invariant_measure(self.efs))


@pytest.fixture(scope="session")
def pipeline():
    """Lazily built and cached pipeline stages per bundled rule."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = PipelineStage(name)
        return cache[name]

    return get


def make_torus_complex() -> CellComplex:
    """Classical torus cell structure: one square, two edges, one vertex."""
    complex_ = CellComplex(
        dimension=2,
        cells={0: ["v"], 1: ["ex", "ey"], 2: ["f"]},
        boundaries={1: [[0, 0]], 2: [[0], [0]]},
        volumes=[Fraction(1)],
        top_labels=["f"],
        germ_class={},
        side_data=SideData(
            plus={"ex": (("f", (1, None)),), "ey": (("f", (None, 1)),)},
            minus={"ex": (("f", (0, None)),), "ey": (("f", (None, 0)),)},
        ),
    )
    complex_.validate()
    return complex_


TWO_CIRCLES_DOC = """
{"dimension": 1,
 "tiles": [{"label": "a", "dims": ["1"]}, {"label": "b", "dims": ["1"]}],
 "images": {"a": "aa", "b": "bb"}}
"""


def make_reducible_control():
    """Two disjoint doubling circles: pushforward diag(2, 2)."""
    rule = parse_rule(TWO_CIRCLES_DOC)
    complex_ = CellComplex(
        dimension=1,
        cells={0: ["u", "w"], 1: ["a", "b"]},
        boundaries={1: [[0, 0], [0, 0]]},
        volumes=[Fraction(1), Fraction(1)],
        top_labels=["a", "b"],
        germ_class={},
        side_data=SideData(
            plus={"u": (("a", (1,)),), "w": (("b", (1,)),)},
            minus={"u": (("a", (0,)),), "w": (("b", (0,)),)},
        ),
    )
    complex_.validate()
    return control_efs(trivial_collaring(rule), complex_, [[2, 0], [0, 2]])
