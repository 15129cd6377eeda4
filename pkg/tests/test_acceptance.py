"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances and depths are pinned here, nothing is deferred.
"""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from importlib import resources

import pytest

from conftest import ALL_RULES, make_reducible_control
from hulltool.cli import main as cli_main
from hulltool.collars import check_flattening, trivial_collaring
from hulltool.complexes import classify_weight_vector, kirchhoff_residual
from hulltool.efs import level_extent, make_hull_point, pairing, translate_point
from hulltool.errors import AmbiguityError
from hulltool.gaplabels import build_frequency_module, contains, module_basis
from hulltool.homology import cycle_space_basis, in_row_span, mat_mul, mat_transpose, mat_vec
from hulltool.measures import unique_ergodicity
from hulltool.oracle import empirical_frequencies, verify_against
from hulltool import bundled_rule

EFS_LEVELS = range(4)          # stationary tower truncated at depth 3
MEASURE_LEVELS = range(9)      # criterion 3: n = 0..8
RANDOM_INSTANCES = 200         # criterion 4
TRANSLATE_TRIPLES = 500        # criterion 9
ORACLE_TOL = Fraction(1, 1000)


@contextmanager
def criterion(number, title, budget_seconds=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print("ACCEPTANCE %02d %s: FAIL" % (number, title))
        raise
    elapsed = time.perf_counter() - start
    print("ACCEPTANCE %02d %s: PASS (%.2fs)" % (number, title, elapsed))
    if budget_seconds is not None:
        assert elapsed < budget_seconds, "criterion %d exceeded %ss" % (number, budget_seconds)


def test_criterion_01_chain_complex_soundness(pipeline):
    with criterion(1, "chain-complex soundness on all bundled rules, levels 0..3", 5.0):
        for name in ALL_RULES:
            stage = pipeline(name)
            for X in (stage.base_complex, stage.collared_complex):
                for _level in EFS_LEVELS:
                    # the stationary tower repeats one complex at every level
                    for i in range(2, X.dimension + 1):
                        prod = mat_mul(X.boundary_matrix(i - 1), X.boundary_matrix(i))
                        assert not any(any(row) for row in prod), (name, i)


def test_criterion_02_weights_equal_nonnegative_cycles(pipeline):
    with criterion(2, "switching-rule solutions = nonnegative top cycles"):
        for name in ALL_RULES:
            for X in (pipeline(name).base_complex, pipeline(name).collared_complex):
                d = X.dimension
                bd = X.boundary_matrix(d)
                n = len(X.cells[d])
                # the residual functional is literally the top boundary map,
                # so the residual-zero set is exactly ker d_d
                for j in range(n):
                    unit = [1 if i == j else 0 for i in range(n)]
                    assert kirchhoff_residual(X, unit) == [row[j] for row in bd]
                # every kernel basis vector has zero residual
                for vec in cycle_space_basis(X):
                    assert all(r == 0 for r in kirchhoff_residual(X, vec))
                # and a strictly positive residual-zero vector is a weight system
                mu = pipeline(name).measure.level_weights(0)
                if X is pipeline(name).collared_complex:
                    flags = classify_weight_vector(X, mu)
                    assert flags["is_cycle"] and flags["strictly_positive"]


def test_criterion_03_measure_consistency(pipeline):
    with criterion(3, "pushforward recursion, positivity, unit mass (n = 0..8)", 10.0):
        for name in ALL_RULES:
            stage = pipeline(name)
            m, efs = stage.measure, stage.efs
            field = efs.field
            for n in MEASURE_LEVELS:
                mu_n = m.level_weights(n)
                mu_next = m.level_weights(n + 1)
                pushed = [
                    sum((field.rational(row[j]) * mu_next[j] for j in range(efs.size)),
                        field.zero())
                    for row in efs.pushforward
                ]
                assert all((a - b).is_zero() for a, b in zip(pushed, mu_n)), (name, n)
                assert all(w.sign() > 0 for w in mu_n), (name, n)
                assert (m.hull_mass(n) - 1).is_zero(), (name, n)


def test_criterion_04_pairing_adjointness(pipeline):
    with criterion(4, "pairing adjointness and coboundary invariance (200 per rule)"):
        for name in ALL_RULES:
            efs = pipeline(name).efs
            rng = random.Random(hash(name) & 0xFFFF)
            kernel = efs.kernel_basis()
            bd = efs.complex.boundary_matrix(efs.dimension)
            facets = len(efs.complex.cells[efs.dimension - 1])
            for _ in range(RANDOM_INSTANCES):
                w = [0] * efs.size
                for vec in kernel:
                    c = rng.randrange(-5, 6)
                    w = [a + c * b for a, b in zip(w, vec)]
                cochain = [rng.randrange(-9, 10) for _ in range(efs.size)]
                assert pairing(mat_vec(efs.pushforward, w), cochain) == \
                    pairing(w, mat_vec(efs.pullback, cochain))
                b = [rng.randrange(-9, 10) for _ in range(facets)]
                delta_b = mat_vec(mat_transpose(bd), b)
                assert pairing(w, [x + y for x, y in zip(cochain, delta_b)]) == \
                    pairing(w, cochain)


def test_criterion_05_unique_ergodicity(pipeline):
    with criterion(5, "Hilbert-contraction certificates"):
        for name in ["fibonacci", "thue_morse", "period_doubling", "solenoid", "chair"]:
            cert = unique_ergodicity(pipeline(name).efs)
            assert cert.status == "TRUE", name
            if cert.degenerate:
                # a one-ray cone has diameter identically zero
                assert all(o == 1 for o in cert.oscillations), name
            else:
                assert all(cert.oscillations[i] > cert.oscillations[i + 1]
                           for i in range(1, 6)), name
        control = unique_ergodicity(make_reducible_control())
        assert control.status == "UNKNOWN"
        assert control.ray_count == 2


def test_criterion_06_gap_label_goldens(pipeline):
    with criterion(6, "gap-label modules against frozen goldens", 10.0):
        # solenoid, depth 3: (1/8) Z
        sol = build_frequency_module(pipeline("solenoid").measure, 3)
        assert (sol.denominator, sol.basis) == (8, [[1]])
        assert contains(sol, Fraction(5, 8)) and not contains(sol, Fraction(1, 3))

        # period doubling, depth k: (1 / (3 * 2^k)) Z
        for k in range(4):
            mod = build_frequency_module(pipeline("period_doubling").measure, k)
            assert (mod.denominator, mod.basis) == (3 * 2**k, [[1]])
            assert contains(mod, Fraction(1, 3 * 2**k))
            assert not contains(mod, Fraction(1, 3 * 2 ** (k + 1)))

        # fibonacci, depth 2: Z-span of {1, 1/lambda, 1/lambda^2}
        m = pipeline("fibonacci").measure
        module = build_frequency_module(m, 2)
        lam, one = m.field.gen(), m.field.one()
        golden = [one, one / lam, one / lam**2]
        assert all(contains(module, x) for x in golden)
        den, basis = module_basis(golden, m.field)
        for g in module.generators:
            scaled = [c * den for c in g.value.coeffs]
            assert all(c.denominator == 1 for c in scaled), "generator outside the golden span"
            assert in_row_span(basis, [int(c) for c in scaled]) is not None


def test_criterion_07_oracle_agreement(pipeline):
    with criterion(7, "exact weights vs empirical frequencies (depth 20 / 8)", 30.0):
        for name in ALL_RULES:
            stage = pipeline(name)
            depth = 20 if stage.rule.dimension == 1 else 8
            table = empirical_frequencies(stage.rule, depth)
            exact = dict(zip(stage.rule.labels, stage.measure.base_level_weights(0)))
            volumes = {t: stage.rule.tile(t).volume for t in stage.rule.labels}
            report = verify_against(exact, table, ORACLE_TOL, volumes)
            assert report.passed, (name, report.deviations)


def test_criterion_08_border_forcing(pipeline):
    with criterion(8, "flattening of collared rules, witness for the uncollared one"):
        assert check_flattening(pipeline("fibonacci").crule).ok
        assert check_flattening(pipeline("thue_morse").crule).ok
        report = check_flattening(trivial_collaring(bundled_rule("fibonacci")))
        assert not report.ok
        witness = report.witness
        assert witness["germ_a"] != witness["germ_b"]
        assert witness["image_a"] != witness["image_b"]


def test_criterion_09_translation_action_law(pipeline):
    with criterion(9, "translation action law on 500 randomized triples"):
        efs = pipeline("fibonacci").efs
        rng = random.Random(20260810)
        cells = efs.complex.top_labels
        agreements = errors = 0
        for index in range(TRANSLATE_TRIPLES):
            cell = cells[rng.randrange(len(cells))]
            extent = level_extent(efs, 4, cell)[0]
            u = Fraction(rng.randrange(-32, 33), 64)
            v = Fraction(rng.randrange(-32, 33), 64)
            if index % 10 == 9:
                # boundary stress: same-sign oversized moves must fail in
                # either evaluation order
                u = extent + Fraction(rng.randrange(1, 64), 7)
                v = Fraction(rng.randrange(0, 64), 7)
                x = Fraction(rng.randrange(1, 64), 64) * extent
            else:
                margin = Fraction(1)
                x = margin + Fraction(rng.randrange(0, 64), 64) * (extent - 2 * margin)
            point = make_hull_point(efs, 4, cell, [x])
            try:
                one_step = translate_point(efs, point, [u + v])
                one_err = None
            except AmbiguityError:
                one_step, one_err = None, True
            try:
                two_step = translate_point(efs, translate_point(efs, point, [u]), [v])
                two_err = None
            except AmbiguityError:
                two_step, two_err = None, True
            if one_err or two_err:
                assert one_err and two_err, "inconsistent ambiguity at triple %d" % index
                errors += 1
            else:
                assert one_step == two_step, "action law failed at triple %d" % index
                agreements += 1
        assert agreements + errors == TRANSLATE_TRIPLES
        assert agreements > 0 and errors > 0  # both branches exercised


def test_criterion_10_report_determinism(tmp_path):
    with criterion(10, "byte-identical consecutive reports for every rule"):
        for name in ALL_RULES:
            path = str(resources.files("hulltool").joinpath("rules_data/%s.json" % name))
            first = tmp_path / ("%s_1.json" % name)
            second = tmp_path / ("%s_2.json" % name)
            assert cli_main(["report", path, "--out", str(first)]) == 0
            assert cli_main(["report", path, "--out", str(second)]) == 0
            assert first.read_bytes() == second.read_bytes(), name
            json.loads(first.read_text())  # well-formed JSON
