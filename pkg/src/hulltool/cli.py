"""Command-line front end.

Every subcommand reads a rule file, runs one slice of the pipeline, and
emits deterministic JSON (or a text summary with --format text).  Exit codes
are scriptable: 0 success, 2 input problem, 3 mathematical precondition
failure (non-primitive rule, flattening failure), 4 budget overrun.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .algebraic import AlgebraicNumber
from .collars import check_flattening, collared_rule, trivial_collaring
from .complexes import build_complex
from .efs import build_efs, make_hull_point, translate_point
from .errors import (
    AmbiguityError,
    BudgetExceeded,
    FlatteningFailure,
    HulltoolError,
    NonPrimitiveRule,
    RuleFormatError,
    StabilizationFailure,
    WellDefinednessFailure,
)
from .gaplabels import GapLabelReport, build_frequency_module, contains
from .homology import cohomology_group, homology_group
from .measures import invariant_measure, transverse_weights, unique_ergodicity
from .oracle import empirical_frequencies, verify_against
from .rules import DEFAULT_CELL_BUDGET, abelianization, legal_adjacencies, load_rule, rule_primitivity

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_BUDGET = 4


@dataclass
class RunConfig:
    rule_path: str
    command: str
    depth: int = 3
    inflate: int | None = None
    precision: int = 10
    budget: int = DEFAULT_CELL_BUDGET
    contains_expr: str | None = None
    out: str | None = None
    fmt: str = "json"
    collared: bool = True
    seed: str | None = None
    svg: str | None = None
    point: str | None = None
    vector: str | None = None

    def __post_init__(self):
        if self.depth < 0 or (self.inflate is not None and self.inflate < 0):
            raise RuleFormatError("depths must be >= 0")
        if self.precision < 1:
            raise RuleFormatError("precision must be >= 1")


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else "%d/%d" % (x.numerator, x.denominator)


def _alg(value, places: int) -> dict:
    if isinstance(value, AlgebraicNumber):
        return {"coeffs": [_frac(c) for c in value.coeffs], "decimal": value.decimal(places)}
    return {"coeffs": [_frac(value)], "decimal": _decimal_of_fraction(Fraction(value), places)}


def _decimal_of_fraction(value: Fraction, places: int) -> str:
    scaled = value * 10**places
    q, r = divmod(abs(scaled.numerator), scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    text = str(q).rjust(places + 1, "0")
    return "%s%s.%s" % ("-" if value < 0 else "", text[:-places], text[-places:])


def emit(config: RunConfig, payload: dict) -> None:
    if config.fmt == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        text = _render_text(payload) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_text(payload, indent=0) -> str:
    lines = []
    pad = "  " * indent
    if isinstance(payload, dict):
        for key in sorted(payload):
            value = payload[key]
            if isinstance(value, (dict, list)):
                lines.append("%s%s:" % (pad, key))
                lines.append(_render_text(value, indent + 1))
            else:
                lines.append("%s%s: %s" % (pad, key, value))
    elif isinstance(payload, list):
        for value in payload:
            if isinstance(value, (dict, list)):
                lines.append(_render_text(value, indent))
            else:
                lines.append("%s- %s" % (pad, value))
    else:
        lines.append("%s%s" % (pad, payload))
    return "\n".join(line for line in lines if line)


# ---------------------------------------------------------------------------
# shared pipeline pieces

def _rule_summary(rule, path) -> dict:
    return {
        "name": os.path.splitext(os.path.basename(path))[0],
        "dimension": rule.dimension,
        "labels": list(rule.labels),
        "expansion": list(rule.expansion) if rule.expansion else None,
        "volumes": [_frac(rule.tile(t).volume) for t in rule.labels],
    }


def _complex_payload(complex_) -> dict:
    triplets = {}
    for i in range(1, complex_.dimension + 1):
        mat = complex_.boundaries[i]
        triplets["d%d" % i] = [
            [r, c, mat[r][c]]
            for r in range(len(mat)) for c in range(len(mat[r])) if mat[r][c]
        ]
    sides = {}
    if complex_.side_data:
        for cid in complex_.cells[complex_.dimension - 1]:
            sides[cid] = {
                "plus": ["%s" % label for label, _ in complex_.side_data.plus.get(cid, ())],
                "minus": ["%s" % label for label, _ in complex_.side_data.minus.get(cid, ())],
            }
    return {
        "cells": {str(i): list(complex_.cells[i]) for i in range(complex_.dimension + 1)},
        "counts": complex_.counts(),
        "euler_characteristic": complex_.euler_characteristic(),
        "boundary_triplets": triplets,
        "sides": sides,
    }


def _groups_payload(complex_) -> dict:
    homology = []
    cohomology = []
    for i in range(complex_.dimension + 1):
        h = homology_group(complex_, i)
        c = cohomology_group(complex_, i)
        homology.append({"degree": i, "rank": h.rank, "torsion": list(h.torsion)})
        cohomology.append({"degree": i, "rank": c.rank, "torsion": list(c.torsion)})
    return {"homology": homology, "cohomology": cohomology}


def _ergodicity_payload(cert, places) -> dict:
    return {
        "status": cert.status,
        "oscillations": [_frac(o) for o in cert.oscillations],
        "hilbert_diameters": ["%.12f" % d for d in cert.diameters],
        "strictly_decreasing": cert.strictly_decreasing,
        "degenerate_cone": cert.degenerate,
        "ray_count": cert.ray_count,
        "ray_bound": cert.ray_bound,
        "note": cert.note,
    }


def _parse_lambda_expr(text: str, field):
    """Polynomial in l with rational coefficients, evaluated in the field."""
    import sympy

    try:
        expr = sympy.sympify(text.replace("^", "**"), rational=True)
        symbol = sympy.Symbol("l")
        free = expr.free_symbols
        if free - {symbol}:
            raise RuleFormatError("--contains expressions may only use the symbol l")
        if not free:
            rat = sympy.Rational(expr)
            return field.rational(Fraction(rat.p, rat.q))
        poly = sympy.Poly(expr, symbol)
        coeffs = [Fraction(sympy.Rational(c).p, sympy.Rational(c).q)
                  for c in reversed(poly.all_coeffs())]
    except RuleFormatError:
        raise
    except (sympy.SympifyError, TypeError, ValueError) as exc:
        raise RuleFormatError("cannot parse --contains expression %r: %s" % (text, exc)) from None
    return field.element(coeffs)


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    primitive, exponent = rule_primitivity(rule)
    # aperiodicity heuristic: an irrational expansion factor forces
    # irrational tile frequencies, which rule out any translation period;
    # a rational factor is inconclusive at this level
    aperiodic = None
    note = "unknown: expansion factor is rational"
    if primitive:
        from .algebraic import perron_root_field

        field = perron_root_field(abelianization(rule))
        if field.degree >= 2:
            aperiodic = True
            note = "expansion factor is irrational, so tile frequencies are too"
    else:
        note = "unknown: rule is not primitive"
    return {
        "rule": _rule_summary(rule, config.rule_path),
        "valid": True,
        "primitive": primitive,
        "primitivity_exponent": exponent,
        "abelianization": abelianization(rule),
        "aperiodic": aperiodic,
        "aperiodicity_note": note,
    }


def cmd_complex(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    payload = {"rule": _rule_summary(rule, config.rule_path)}
    payload["base_complex"] = _complex_payload(build_complex(rule))
    if config.collared:
        cr = collared_rule(rule, budget=config.budget)
        payload["collared_complex"] = _complex_payload(build_complex(cr.rule))
        payload["collar"] = _collar_payload(cr)
    return payload


def _collar_payload(cr) -> dict:
    report = check_flattening(cr)
    return {
        "mode": cr.mode,
        "rounds": cr.rounds,
        "size": len(cr.rule.labels),
        "alphabet": list(cr.rule.labels),
        "forget": dict(sorted(cr.forget.items())),
        "images": {label: list(cr.rule.images[label].cells) for label in cr.rule.labels},
        "flattening": report.ok,
        "flattening_witness": report.witness if not report.ok else None,
    }


def cmd_collar(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    cr = collared_rule(rule, budget=config.budget)
    uncollared = check_flattening(trivial_collaring(rule))
    return {
        "rule": _rule_summary(rule, config.rule_path),
        "collar": _collar_payload(cr),
        "uncollared_flattening": {
            "ok": uncollared.ok,
            "witness": uncollared.witness,
        },
    }


def cmd_homology(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    payload = {"rule": _rule_summary(rule, config.rule_path)}
    payload["base"] = _groups_payload(build_complex(rule))
    if config.collared:
        cr = collared_rule(rule, budget=config.budget)
        payload["collared"] = _groups_payload(build_complex(cr.rule))
    return payload


def cmd_measure(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    cr = collared_rule(rule, budget=config.budget)
    efs = build_efs(cr)
    measure = invariant_measure(efs)
    cert = unique_ergodicity(efs)
    places = config.precision
    level0 = transverse_weights(measure, 0)
    return {
        "rule": _rule_summary(rule, config.rule_path),
        "spectral": {
            "minimal_polynomial": list(measure.field.minpoly),
            "isolating_interval": [_frac(b) for b in measure.field.interval],
            "scale": _alg(measure.scale, places),
        },
        "measure": {
            "cells": list(efs.complex.top_labels),
            "weights_level0": [_alg(w, places) for w in level0.values],
            "strictly_positive": level0.strictly_positive,
            "base_weights_level0": [_alg(w, places) for w in measure.base_level_weights(0)],
            "mass_level0": _alg(measure.hull_mass(0), places),
        },
        "ergodicity": _ergodicity_payload(cert, places),
    }


def cmd_gap_labels(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    cr = collared_rule(rule, budget=config.budget)
    efs = build_efs(cr)
    measure = invariant_measure(efs)
    module = build_frequency_module(measure, config.depth)
    report = GapLabelReport.from_module(module, config.precision)
    payload = {
        "rule": _rule_summary(rule, config.rule_path),
        "gap_labels": {
            "depth": report.depth,
            "minimal_polynomial": list(report.minimal_polynomial),
            "generator_count": report.generator_count,
            "denominator": report.denominator,
            "basis": report.basis,
            "stabilized": report.stabilized,
            "generators": [
                {"level": g.level, "cell": g.cell, **_alg(g.value, config.precision)}
                for g in module.generators
            ],
        },
    }
    if config.contains_expr is not None:
        value = _parse_lambda_expr(config.contains_expr, measure.field)
        payload["contains"] = {
            "expression": config.contains_expr,
            "value": _alg(value, config.precision),
            "member": contains(module, value),
        }
    return payload


def cmd_oracle(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    depth = config.inflate if config.inflate is not None else (14 if rule.dimension == 1 else 6)
    table = empirical_frequencies(rule, depth, budget=config.budget)
    payload = {
        "rule": _rule_summary(rule, config.rule_path),
        "oracle": {
            "inflate_depth": depth,
            "total_cells": table.total,
            "counts": dict(sorted(table.counts.items())),
            "frequencies": {k: _frac(v) for k, v in sorted(table.frequencies.items())},
        },
    }
    cr = collared_rule(rule, budget=config.budget)
    measure = invariant_measure(build_efs(cr))
    exact = dict(zip(rule.labels, measure.base_level_weights(0)))
    volumes = {t: rule.tile(t).volume for t in rule.labels}
    deviation = verify_against(exact, table, Fraction(1, 1000), volumes)
    payload["comparison"] = {
        "tolerance": "1/1000",
        "passed": deviation.passed,
        "deviations": dict(sorted(deviation.deviations.items())),
    }
    return payload


def cmd_translate(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    cr = collared_rule(rule, budget=config.budget)
    efs = build_efs(cr)
    if not config.point or not config.vector:
        raise RuleFormatError("translate needs --point and --vector JSON arguments")
    try:
        point_doc = json.loads(config.point)
        vector_doc = json.loads(config.vector)
    except json.JSONDecodeError as exc:
        raise RuleFormatError("bad JSON argument: %s" % exc) from None
    point = make_hull_point(
        efs, int(point_doc["depth"]), point_doc["cell"],
        [Fraction(x) for x in point_doc["coord"]])
    try:
        moved = translate_point(efs, point, [Fraction(x) for x in vector_doc])
    except AmbiguityError as exc:
        return {
            "status": "ambiguous",
            "detail": str(exc),
            "point": _point_payload(point),
        }
    return {"status": "ok", "point": _point_payload(moved)}


def _point_payload(point) -> dict:
    return {
        "depth": point.depth,
        "levels": [
            {"level": k, "cell": point.cells[k], "coord": [_frac(x) for x in point.coords[k]]}
            for k in range(point.depth + 1)
        ],
    }


def cmd_patch(config: RunConfig) -> dict:
    from .rules import expand

    rule = load_rule(config.rule_path)
    seed = config.seed or rule.labels[0]
    depth = config.inflate if config.inflate is not None else (5 if rule.dimension == 1 else 3)
    patch = expand(rule, rule.single(seed), depth, config.budget)
    payload = {
        "rule": _rule_summary(rule, config.rule_path),
        "patch": {
            "seed": seed,
            "depth": depth,
            "shape": list(patch.shape),
            "cells": list(patch.cells) if patch.size <= 4096 else None,
            "size": patch.size,
        },
    }
    if config.svg:
        _write_patch_svg(rule, patch, config.svg)
        payload["svg"] = config.svg
    return payload


_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
            "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd")


def _write_patch_svg(rule, patch, path) -> None:
    colors = {label: _PALETTE[i % len(_PALETTE)] for i, label in enumerate(rule.labels)}
    unit = 16
    if rule.dimension == 1:
        width, height = patch.shape[0] * unit, unit
        rects = [
            '<rect x="%d" y="0" width="%d" height="%d" fill="%s" stroke="black"/>'
            % (i * unit, unit, unit, colors[c])
            for i, c in enumerate(patch.cells)
        ]
    elif rule.dimension == 2:
        width, height = patch.shape[0] * unit, patch.shape[1] * unit
        rects = [
            '<rect x="%d" y="%d" width="%d" height="%d" fill="%s" stroke="black"/>'
            % (x * unit, (patch.shape[1] - 1 - y) * unit, unit, unit, colors[patch.get((x, y))])
            for x in range(patch.shape[0]) for y in range(patch.shape[1])
        ]
    else:
        raise RuleFormatError("svg output supports d <= 2")
    body = '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">%s</svg>\n' \
        % (width, height, "".join(rects))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)


def cmd_report(config: RunConfig) -> dict:
    rule = load_rule(config.rule_path)
    places = config.precision
    primitive, exponent = rule_primitivity(rule)
    adjacency = legal_adjacencies(rule, config.budget)
    base_complex = build_complex(rule, adjacency)
    cr = collared_rule(rule, budget=config.budget)
    collared_complex = build_complex(cr.rule)
    efs = build_efs(cr)
    measure = invariant_measure(efs)
    cert = unique_ergodicity(efs)
    module = build_frequency_module(measure, config.depth)
    uncollared = check_flattening(trivial_collaring(rule))

    depth = config.inflate if config.inflate is not None else (14 if rule.dimension == 1 else 6)
    table = empirical_frequencies(rule, depth, budget=config.budget)
    exact = dict(zip(rule.labels, measure.base_level_weights(0)))
    volumes = {t: rule.tile(t).volume for t in rule.labels}
    deviation = verify_against(exact, table, Fraction(1, 1000), volumes)

    return {
        "tool": {"name": "hulltool", "version": __version__},
        "rule": _rule_summary(rule, config.rule_path),
        "primitivity": {
            "primitive": primitive,
            "exponent": exponent,
            "abelianization": abelianization(rule),
        },
        "adjacencies": {
            "axis%d" % axis: sorted([a, b] for a, b in pairs)
            for axis, pairs in enumerate(adjacency)
        },
        "collar": _collar_payload(cr),
        "uncollared_flattening": {"ok": uncollared.ok, "witness": uncollared.witness},
        "complexes": {
            "base": _complex_payload(base_complex),
            "collared": _complex_payload(collared_complex),
        },
        "groups": {
            "base": _groups_payload(base_complex),
            "collared": _groups_payload(collared_complex),
        },
        "spectral": {
            "minimal_polynomial": list(measure.field.minpoly),
            "isolating_interval": [_frac(b) for b in measure.field.interval],
            "scale": _alg(measure.scale, places),
        },
        "measure": {
            "cells": list(efs.complex.top_labels),
            "weights_level0": [_alg(w, places) for w in measure.level_weights(0)],
            "base_weights_level0": [_alg(w, places) for w in measure.base_level_weights(0)],
            "mass_level0": _alg(measure.hull_mass(0), places),
        },
        "ergodicity": _ergodicity_payload(cert, places),
        "gap_labels": {
            "depth": module.depth,
            "denominator": module.denominator,
            "basis": module.basis,
            "stabilized": module.stabilized,
            "generators": [
                {"level": g.level, "cell": g.cell, **_alg(g.value, places)}
                for g in module.generators
            ],
        },
        "oracle": {
            "inflate_depth": depth,
            "total_cells": table.total,
            "tolerance": "1/1000",
            "passed": deviation.passed,
            "deviations": dict(sorted(deviation.deviations.items())),
        },
    }


COMMANDS = {
    "validate": cmd_validate,
    "complex": cmd_complex,
    "collar": cmd_collar,
    "homology": cmd_homology,
    "measure": cmd_measure,
    "gap-labels": cmd_gap_labels,
    "oracle": cmd_oracle,
    "translate": cmd_translate,
    "patch": cmd_patch,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hulltool",
        description="Finite approximations of substitution tiling spaces: "
                    "branched complexes, homology, invariant measures, gap labels.")
    parser.add_argument("--version", action="version", version="hulltool %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("rule", help="path to a rule JSON file")
        p.add_argument("--depth", type=int, default=3, help="gap-label truncation depth")
        p.add_argument("--inflate", type=int, default=None, help="inflation depth for patches/oracle")
        p.add_argument("--precision", type=int, default=10, help="decimal places in rendered numbers")
        p.add_argument("--budget", type=int, default=DEFAULT_CELL_BUDGET, help="cell budget cap")
        p.add_argument("--contains", dest="contains_expr", default=None,
                       help="gap-label membership query, a polynomial in l")
        p.add_argument("--out", default=None, help="write output to a file instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("json", "text"), default="json")
        p.add_argument("--base-only", dest="collared", action="store_false",
                       help="skip the collared refinement where optional")
        p.add_argument("--seed", default=None, help="seed label for patch expansion")
        p.add_argument("--svg", default=None, help="write an SVG rendering (patch command)")
        p.add_argument("--point", default=None, help="hull point JSON (translate command)")
        p.add_argument("--vector", default=None, help="translation vector JSON (translate command)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            rule_path=args.rule,
            command=args.command,
            depth=args.depth,
            inflate=args.inflate,
            precision=args.precision,
            budget=args.budget,
            contains_expr=args.contains_expr,
            out=args.out,
            fmt=args.fmt,
            collared=args.collared,
            seed=args.seed,
            svg=args.svg,
            point=args.point,
            vector=args.vector,
        )
        payload = COMMANDS[args.command](config)
    except FileNotFoundError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except RuleFormatError as exc:
        print("input error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_INPUT
    except (NonPrimitiveRule, FlatteningFailure, WellDefinednessFailure, StabilizationFailure) as exc:
        print("precondition failure: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_PRECONDITION
    except BudgetExceeded as exc:
        print("budget exceeded: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except HulltoolError as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 1
    emit(config, payload)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
