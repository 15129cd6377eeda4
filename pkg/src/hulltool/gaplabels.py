"""The gap-labelling group: the Z-module of cylinder weights.

Depth-k truncation: the clopen cylinder weights of all levels up to k
generate a lattice inside Q(lambda), handled exactly by clearing
denominators over the power basis and reducing to Hermite form.  Membership
tests are triangular solves against that basis, so a positive answer comes
with an integer coefficient certificate and a negative answer is exact ("not
at this depth").
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebraic import AlgebraicNumber, NumberField
from .efs import DirectLimitElement, pairing
from .errors import DimensionMismatch
from .homology import hermite_row_basis, in_row_span
from .measures import InvariantMeasure


@dataclass(frozen=True)
class GapLabelGenerator:
    level: int
    cell: str
    value: AlgebraicNumber


def gap_label_generators(measure: InvariantMeasure, k_max: int) -> list[GapLabelGenerator]:
    """Every clopen cylinder weight up to depth k_max, in (depth, cell) order.

    Cylinders are indexed by level-k base supertiles; the collared cells'
    weights lie in the depth-(k+1) truncation (border forcing resolves a
    collared cell inside the next-deeper supertile), so this tower generates
    the same module in the limit.
    """
    if k_max < 0:
        raise DimensionMismatch("k_max must be >= 0")
    out = []
    labels = measure.efs.crule.base.labels
    for level in range(k_max + 1):
        weights = measure.base_level_weights(level)
        for cell, value in zip(labels, weights):
            out.append(GapLabelGenerator(level, cell, value))
    return out


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def module_basis(values, field: NumberField) -> tuple[int, list[list[int]]]:
    """Hermite basis of the Z-span of field elements.

    Elements are written over the power basis of the field, denominators are
    cleared by one common factor, and the integer coefficient lattice is
    reduced to Hermite form.  Returns (denominator, basis rows); the lattice
    is (1/denominator) times the row span.
    """
    rows = []
    den = 1
    for v in values:
        coeffs = v.coeffs if isinstance(v, AlgebraicNumber) else (Fraction(v),) + (Fraction(0),) * (field.degree - 1)
        for c in coeffs:
            den = _lcm(den, c.denominator)
        rows.append(coeffs)
    int_rows = [[int(c * den) for c in row] for row in rows]
    return den, hermite_row_basis(int_rows)


@dataclass
class FrequencyModule:
    """Truncated gap-label module with per-level Hermite bases."""

    field: NumberField
    depth: int
    generators: list[GapLabelGenerator]
    denominator: int
    basis: list[list[int]]
    level_bases: list[tuple[int, list[list[int]]]]  # (denominator, basis) per depth
    stabilized: bool

    def elements(self) -> list[AlgebraicNumber]:
        return [g.value for g in self.generators]


def build_frequency_module(measure: InvariantMeasure, k_max: int) -> FrequencyModule:
    field = measure.field
    gens = gap_label_generators(measure, k_max)
    level_bases = []
    for k in range(k_max + 1):
        values = [g.value for g in gens if g.level <= k]
        level_bases.append(module_basis(values, field))
    den, basis = level_bases[-1]

    # rescaling the depth-(k+1) generators by the volume scale reproduces the
    # depth-k generators (stationarity); verified exactly
    stabilized = True
    scale = measure.scale
    for k in range(k_max):
        lower = [g.value for g in gens if g.level == k]
        upper = [g.value * scale for g in gens if g.level == k + 1]
        if len(lower) != len(upper) or any((a - b).sign() != 0 for a, b in zip(lower, upper)):
            stabilized = False
            break
    return FrequencyModule(field, k_max, gens, den, basis, level_bases, stabilized)


def _as_coeff_vector(x, field: NumberField):
    if isinstance(x, AlgebraicNumber):
        return list(x.coeffs)
    return [Fraction(x)] + [Fraction(0)] * (field.degree - 1)


def contains(module: FrequencyModule, x, k_max: int | None = None) -> bool:
    """Exact membership of x in the Z-span of generators up to depth k_max.

    False only means "not at this depth": deeper truncations may contain x.
    """
    if k_max is None or k_max >= module.depth:
        den, basis = module.denominator, module.basis
    else:
        if k_max < 0:
            raise DimensionMismatch("k_max must be >= 0")
        den, basis = module.level_bases[k_max]
    coeffs = _as_coeff_vector(x, module.field)
    scaled = [c * den for c in coeffs]
    if any(c.denominator != 1 for c in scaled):
        return False
    return in_row_span(basis, [int(c) for c in scaled]) is not None


def membership_certificate(module: FrequencyModule, x):
    """Integer coefficients over the Hermite basis, or None."""
    coeffs = _as_coeff_vector(x, module.field)
    scaled = [c * module.denominator for c in coeffs]
    if any(c.denominator != 1 for c in scaled):
        return None
    return in_row_span(module.basis, [int(c) for c in scaled])


def pair_cocycle(measure: InvariantMeasure, element: DirectLimitElement) -> AlgebraicNumber:
    """<mu_s | c_s> for an integer cochain class; lands in the gap-label
    module generated at the class's depth."""
    return pairing(measure.level_weights(element.level), element.vector)


@dataclass
class GapLabelReport:
    """Reproducible summary of the truncated gap-label module."""

    minimal_polynomial: tuple[int, ...]
    depth: int
    generator_count: int
    denominator: int
    basis: list[list[int]]
    stabilized: bool
    generator_decimals: list[str]

    @staticmethod
    def from_module(module: FrequencyModule, places: int = 10) -> "GapLabelReport":
        return GapLabelReport(
            minimal_polynomial=module.field.minpoly,
            depth=module.depth,
            generator_count=len(module.generators),
            denominator=module.denominator,
            basis=[row[:] for row in module.basis],
            stabilized=module.stabilized,
            generator_decimals=[g.value.decimal(places) for g in module.generators],
        )
