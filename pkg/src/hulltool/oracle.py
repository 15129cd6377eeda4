"""Brute-force frequency counts from large inflated patches.

This is the independent verification route: it never touches the exact
eigen-machinery, only expands patches and counts, so agreement between the
two pipelines is meaningful.  Counting aggregates over every prototile used
as a seed; for symmetric rules the aggregate is exact at every depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .collars import corona_offsets, CollaredTile
from .errors import DimensionMismatch
from .rules import DEFAULT_CELL_BUDGET, SubstitutionRule, expand


@dataclass
class FrequencyTable:
    """Occurrence counts and exact empirical frequencies per label."""

    total: int
    counts: dict[str, int]
    frequencies: dict[str, Fraction]
    depth: int
    collared: bool

    def validate(self) -> None:
        if sum(self.counts.values()) != self.total:
            raise ArithmeticError("counts do not sum to the total")
        if sum(self.frequencies.values(), Fraction(0)) != 1:
            raise ArithmeticError("frequencies do not sum to one")


def empirical_frequencies(rule: SubstitutionRule, k: int, collared: bool = False,
                          mode: str = "face", budget: int = DEFAULT_CELL_BUDGET) -> FrequencyTable:
    """Counts over the depth-k inflations of every prototile, aggregated.

    In collared mode cells are counted by (label, corona) class with the
    patch boundary excluded, since boundary cells have incomplete coronas.
    """
    counts: dict[str, int] = {}
    offsets = corona_offsets(rule.dimension, mode) if collared else ()
    for seed in rule.labels:
        patch = expand(rule, rule.single(seed), k, budget)
        if not collared:
            for cell in patch.cells:
                counts[cell] = counts.get(cell, 0) + 1
            continue
        for pos in patch.positions():
            corona = []
            interior = True
            for off in offsets:
                npos = tuple(p + o for p, o in zip(pos, off))
                if any(not 0 <= x < s for x, s in zip(npos, patch.shape)):
                    interior = False
                    break
                corona.append((off, patch.get(npos)))
            if interior:
                code = CollaredTile(patch.get(pos), tuple(corona)).encode()
                counts[code] = counts.get(code, 0) + 1
    total = sum(counts.values())
    freqs = {label: Fraction(n, total) for label, n in counts.items()}
    table = FrequencyTable(total, counts, freqs, k, collared)
    table.validate()
    return table


@dataclass
class DeviationReport:
    passed: bool
    tolerance: Fraction
    deviations: dict[str, str]  # per-label |exact - empirical| as decimals

    def worst(self) -> str:
        return max(self.deviations.values()) if self.deviations else "0"


def verify_against(exact: dict, table: FrequencyTable, tol, volumes: dict | None = None,
                   places: int = 8) -> DeviationReport:
    """Per-label deviation of exact transverse weights from empirical ones.

    The empirical transverse weight of a label is its count divided by the
    total volume of the counted patch (plain frequency for unit volumes),
    which estimates the same quantity as the exact weights.  Signs are
    decided exactly; decimals are for the report only.
    """
    if set(exact) != set(table.counts):
        raise DimensionMismatch(
            "alphabet mismatch: exact has %d labels, empirical %d (e.g. %r)"
            % (len(exact), len(table.counts),
               sorted(set(exact) ^ set(table.counts))[:3]))
    tol = Fraction(tol)
    if volumes is None:
        volumes = {label: Fraction(1) for label in exact}
    total_volume = sum((volumes[label] * n for label, n in table.counts.items()), Fraction(0))

    deviations = {}
    passed = True
    for label in sorted(exact):
        empirical = Fraction(table.counts[label]) / total_volume
        diff = exact[label] - empirical
        sign = diff.sign() if hasattr(diff, "sign") else (diff > 0) - (diff < 0)
        absdiff = diff if sign >= 0 else -diff
        ok = (absdiff - tol).sign() < 0 if hasattr(absdiff, "sign") else absdiff < tol
        passed = passed and ok
        deviations[label] = absdiff.decimal(places) if hasattr(absdiff, "decimal") \
            else _fraction_decimal(absdiff, places)
    return DeviationReport(passed, tol, deviations)


def _fraction_decimal(value: Fraction, places: int) -> str:
    scaled = value * 10**places
    q, r = divmod(abs(scaled.numerator), scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    text = str(q).rjust(places + 1, "0")
    sign = "-" if value < 0 else ""
    return "%s%s.%s" % (sign, text[:-places], text[-places:])
