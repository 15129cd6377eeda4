"""Finite approximations of substitution tiling spaces.

Builds branched flat complexes from substitution rules, their border-forcing
collared refinements, integer (co)homology, exact Perron-Frobenius invariant
measures in Q(lambda), and the gap-labelling module of cylinder weights.
"""

from importlib import resources

from .collars import check_flattening, collared_rule, enumerate_collared, trivial_collaring
from .complexes import build_b0, build_complex, kirchhoff_residual
from .efs import build_efs, make_hull_point, translate_point
from .gaplabels import build_frequency_module, contains, gap_label_generators
from .homology import (
    cohomology_group,
    cycle_space_basis,
    hermite_row_basis,
    homology_group,
    smith_normal_form,
)
from .measures import invariant_measure, perron_data, transverse_weights, unique_ergodicity
from .oracle import empirical_frequencies, verify_against
from .rules import (
    Patch,
    Prototile,
    SubstitutionRule,
    abelianization,
    expand,
    is_primitive,
    legal_adjacencies,
    load_rule,
    parse_rule,
)

__version__ = "0.1.0"

BUNDLED_RULES = (
    "fibonacci",
    "thue_morse",
    "period_doubling",
    "solenoid",
    "chair",
    "thue_morse_2d",
)


def bundled_rule_text(name: str) -> str:
    """Source text of a bundled example rule."""
    if name not in BUNDLED_RULES:
        raise KeyError("unknown bundled rule %r; have %s" % (name, ", ".join(BUNDLED_RULES)))
    return resources.files("hulltool").joinpath("rules_data/%s.json" % name).read_text("utf-8")


def bundled_rule(name: str) -> SubstitutionRule:
    return parse_rule(bundled_rule_text(name))
