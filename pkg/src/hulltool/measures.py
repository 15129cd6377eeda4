"""Invariant measures as towers of positive weight systems.

The unique invariant probability measure of a primitive stationary sequence
is carried by the Perron eigenvector: level-n transverse weights are the
right eigenvector rescaled by scale^-n and normalized so the volume-weighted
level-0 mass is 1.  All data lives in Q(lambda); positivity, the Kirchhoff
residuals and the pushforward recursion are checked exactly.

Unique ergodicity is certified through the Hilbert projective metric: the
oscillation ratio osc(x, y) = max_i(x_i/y_i) / min_i(x_i/y_i) of two test
rays under iterated pushforward must decrease strictly.  Comparisons happen
on exact rationals; logarithms appear only in rendered output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebraic import AlgebraicNumber, NumberField, perron_root_field
from .complexes import kirchhoff_residual
from .efs import EFS
from .errors import DimensionMismatch, NonPrimitiveRule
from .homology import mat_pow, mat_transpose, mat_vec
from .rules import is_primitive


@dataclass
class PerronData:
    field: NumberField
    eigenvalue: AlgebraicNumber
    right: list[AlgebraicNumber]
    left: list[AlgebraicNumber]

    @property
    def minimal_polynomial(self) -> tuple[int, ...]:
        return self.field.minpoly


def _field_matrix(A, field, lam):
    n = len(A)
    return [[field.rational(A[i][j]) - (lam if i == j else field.zero())
             for j in range(n)] for i in range(n)]


def _field_kernel(M, field):
    """Basis of ker M for a square matrix over the field (exact RREF)."""
    m = len(M)
    n = len(M[0]) if m else 0
    R = [row[:] for row in M]
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, m) if not R[i][c].is_zero()), None)
        if pivot_row is None:
            continue
        R[r], R[pivot_row] = R[pivot_row], R[r]
        inv = R[r][c].inverse()
        R[r] = [e * inv for e in R[r]]
        for i in range(m):
            if i != r and not R[i][c].is_zero():
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [field.zero()] * n
        v[free] = field.one()
        for row, pc in enumerate(pivots):
            v[pc] = -R[row][free]
        basis.append(v)
    return basis


def _rational_kernel(M):
    """Same elimination on plain Fractions (fast path for rational scales)."""
    m = len(M)
    n = len(M[0]) if m else 0
    R = [[Fraction(x) for x in row] for row in M]
    pivots = []
    r = 0
    for c in range(n):
        pivot_row = next((i for i in range(r, m) if R[i][c]), None)
        if pivot_row is None:
            continue
        R[r], R[pivot_row] = R[pivot_row], R[r]
        inv = R[r][c]
        R[r] = [e / inv for e in R[r]]
        for i in range(m):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -R[row][free]
        basis.append(v)
    return basis


def perron_data(A) -> PerronData:
    """Exact Perron eigendata of a primitive nonnegative integer matrix.

    The eigenvalue is the distinguished root of its minimal polynomial (the
    factor of the characteristic polynomial containing the spectral radius);
    eigenvectors are solved over Q(lambda) and normalized entrywise positive.
    The left eigenvector doubles as the natural tile-length vector in one
    dimension.
    """
    primitive, _ = is_primitive(A)
    if not primitive:
        raise NonPrimitiveRule("Perron data needs a primitive matrix")
    field = perron_root_field(A)
    lam = field.gen()

    def solve(mat):
        if field.degree == 1:
            lam_q = lam.as_rational()
            rows = [[Fraction(mat[i][j]) - (lam_q if i == j else 0)
                     for j in range(len(mat))] for i in range(len(mat))]
            basis = [[field.rational(x) for x in vec] for vec in _rational_kernel(rows)]
        else:
            basis = _field_kernel(_field_matrix(mat, field, lam), field)
        if len(basis) != 1:
            raise ArithmeticError("Perron eigenvalue is not simple; kernel rank %d" % len(basis))
        vec = basis[0]
        lead = next(e for e in vec if not e.is_zero())
        if lead.sign() < 0:
            vec = [-e for e in vec]
        if any(e.sign() <= 0 for e in vec):
            raise ArithmeticError("eigenvector is not entrywise positive")
        return vec

    right = solve(A)
    left = solve(mat_transpose(A))
    # exact eigen identities
    for i, row in enumerate(A):
        lhs = sum((right[j] * row[j] for j in range(len(A))), field.zero())
        if lhs != lam * right[i]:
            raise ArithmeticError("right eigenvector identity failed")
    return PerronData(field, lam, right, left)


@dataclass
class WeightSystem:
    """Nonnegative top-cell weights satisfying the switching rules."""

    level: int
    values: list
    nonnegative: bool
    strictly_positive: bool


@dataclass
class InvariantMeasure:
    """The mass-1 invariant measure of a primitive stationary sequence."""

    efs: EFS
    field: NumberField
    scale: AlgebraicNumber
    weights0: list[AlgebraicNumber]   # level-0 transverse weights

    def level_weights(self, n: int) -> list[AlgebraicNumber]:
        if n < 0:
            raise DimensionMismatch("level must be >= 0")
        factor = self.scale ** (-n)
        return [w * factor for w in self.weights0]

    def base_level_weights(self, n: int) -> list[AlgebraicNumber]:
        """Cylinder weights of level-n base supertiles, one per base tile.

        Collared cells aggregate through the forgetful map; since border
        forcing determines a collared cell from the next-deeper supertile,
        the base-tile tower is cofinal in the collared one.
        """
        forget = self.efs.crule.forget
        base_labels = self.efs.crule.base.labels
        agg = {t: self.field.zero() for t in base_labels}
        for cell, w in zip(self.efs.complex.top_labels, self.level_weights(n)):
            agg[forget[cell]] = agg[forget[cell]] + w
        return [agg[t] for t in base_labels]

    def hull_mass(self, n: int) -> AlgebraicNumber:
        """Volume-weighted total mass at level n (should be exactly 1)."""
        vols = self.efs.level_volumes(n)
        total = self.field.zero()
        for w, v in zip(self.level_weights(n), vols):
            total = total + w * v
        return total


@dataclass
class ExtremalRays:
    """Fallback report when the pushforward is not primitive."""

    rays: list[list[Fraction]] | None
    count: int | None
    bound: int


def invariant_measure(efs: EFS):
    """The unique invariant probability measure, or the cone's extremal rays.

    For a primitive pushforward this returns an InvariantMeasure with the
    level-0 weights strictly positive, residual-free and of volume-weighted
    mass one.  Non-primitive input degrades to an ExtremalRays report capped
    by the rank of the top homology.
    """
    primitive, _ = is_primitive(efs.pushforward)
    if not primitive:
        return extremal_rays(efs)
    pd = perron_data(efs.pushforward)
    field = pd.field
    mass = field.zero()
    for w, vol in zip(pd.right, efs.complex.volumes):
        mass = mass + w * vol
    weights0 = [w / mass for w in pd.right]
    measure = InvariantMeasure(efs, field, pd.eigenvalue, weights0)

    residual = kirchhoff_residual(efs.complex, weights0)
    if any(getattr(r, "sign", lambda: (r > 0) - (r < 0))() != 0 for r in residual):
        raise ArithmeticError("invariant weights violate the switching rules")
    if (measure.hull_mass(0) - field.one()).sign() != 0:
        raise ArithmeticError("level-0 mass is not one")
    return measure


def transverse_weights(measure: InvariantMeasure, n: int) -> WeightSystem:
    """Cylinder weights at level n as an exact weight system."""
    values = measure.level_weights(n)
    residual = kirchhoff_residual(measure.efs.complex, values)
    if any(r.sign() != 0 for r in residual):
        raise ArithmeticError("level weights violate the switching rules")
    signs = [v.sign() for v in values]
    return WeightSystem(n, values, all(s >= 0 for s in signs), all(s > 0 for s in signs))


# ---------------------------------------------------------------------------
# reducible matrices: strongly connected pieces and extremal rays

def _strongly_connected_components(A):
    n = len(A)
    adj = [[j for j in range(n) if A[i][j]] for i in range(n)]
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = [0]

    def strongconnect(v):
        # iterative Tarjan to keep recursion shallow
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for i in range(pi, len(adj[node])):
                w = adj[node][i]
                if index[w] is None:
                    work[-1] = (node, i + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                components.append(sorted(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    for v in range(n):
        if index[v] is None:
            strongconnect(v)
    return components


def extremal_rays(efs: EFS) -> ExtremalRays:
    """Extremal invariant rays of a reducible pushforward, when decidable.

    Only matrices that split as a direct sum over their strongly connected
    components get explicit rays (one Perron ray per primitive block with
    maximal growth); anything subtler reports just the homology rank bound.
    """
    A = efs.pushforward
    n = len(A)
    bound = len(efs.kernel_basis())
    comps = _strongly_connected_components(A)
    cross = any(A[i][j] for i in range(n) for j in range(n)
                if _comp_of(comps, i) != _comp_of(comps, j))
    if cross:
        return ExtremalRays(None, None, bound)
    rays = []
    for comp in comps:
        block = [[A[i][j] for j in comp] for i in comp]
        primitive, _ = is_primitive(block)
        if not primitive:
            return ExtremalRays(None, None, bound)
        pd = perron_data(block)
        if any(not e.is_rational() for e in pd.right):
            return ExtremalRays(None, None, bound)
        ray = [Fraction(0)] * n
        for pos, e in zip(comp, pd.right):
            ray[pos] = e.as_rational()
        rays.append(ray)
    count = min(len(rays), bound) if bound else len(rays)
    return ExtremalRays(rays, count, bound)


def _comp_of(comps, i):
    for k, comp in enumerate(comps):
        if i in comp:
            return k
    raise AssertionError


# ---------------------------------------------------------------------------
# Hilbert metric machinery

def hilbert_oscillation(x, y) -> Fraction:
    """osc(x, y) >= 1; the projective distance is its logarithm."""
    if len(x) != len(y) or not x:
        raise DimensionMismatch("vectors of equal positive length required")
    if any(a <= 0 for a in x) or any(b <= 0 for b in y):
        raise ValueError("strictly positive vectors required")
    ratios = [Fraction(a) / Fraction(b) for a, b in zip(x, y)]
    return max(ratios) / min(ratios)


def hilbert_cross_ratio(x, y) -> Fraction:
    """Cross-ratio form ((m+l)(m+r))/(l r) along the largest open segment
    through the two rays inside the positive cone.

    Inputs are normalized to unit coordinate sum, which makes both segment
    ends finite for distinct rays; proportional rays give 1 (distance 0).
    Agrees exactly with the oscillation ratio.
    """
    x = [Fraction(a) for a in x]
    y = [Fraction(b) for b in y]
    if any(a <= 0 for a in x) or any(b <= 0 for b in y):
        raise ValueError("strictly positive vectors required")
    sx, sy = sum(x), sum(y)
    x = [a / sx for a in x]
    y = [b / sy for b in y]
    if x == y:
        return Fraction(1)
    lower = None  # segment start, s_min < 0
    upper = None  # segment end, s_max > 1
    for a, b in zip(x, y):
        delta = b - a
        if delta > 0:
            s = -a / delta
            lower = s if lower is None else max(lower, s)
        elif delta < 0:
            s = a / (a - b)
            upper = s if upper is None else min(upper, s)
    # normalized distinct rays always bound the segment on both sides
    m = Fraction(1)
    l = -lower
    r = upper - 1
    return (m + l) * (m + r) / (l * r)


@dataclass
class ErgodicityCertificate:
    status: str                       # "TRUE" or "UNKNOWN"
    oscillations: list[Fraction]      # osc at steps 0..6 (exact)
    diameters: list[float]            # ln(osc), for display
    strictly_decreasing: bool
    degenerate: bool                  # one-dimensional cone
    ray_count: int | None = None
    ray_bound: int | None = None
    note: str = ""


def unique_ergodicity(efs: EFS, steps: int = 6) -> ErgodicityCertificate:
    """Certificate via Hilbert-metric contraction of two extremal test rays.

    The test rays are images of two extremal cone rays under the
    primitivity power (so they are strictly positive); their exact
    oscillation ratios under 1..steps further pushforwards must be strictly
    decreasing.  Non-primitive input returns UNKNOWN with the ergodic-ray
    bound from the rank of the top homology.
    """
    A = efs.pushforward
    n = len(A)
    primitive, exponent = is_primitive(A)
    if not primitive:
        report = extremal_rays(efs)
        return ErgodicityCertificate(
            status="UNKNOWN",
            oscillations=[], diameters=[],
            strictly_decreasing=False, degenerate=False,
            ray_count=report.count, ray_bound=report.bound,
            note="pushforward is not primitive; at most %d ergodic rays" % report.bound,
        )
    if n == 1:
        # a single ray has diameter zero at every step; uniqueness is
        # immediate but the sequence cannot decrease strictly
        return ErgodicityCertificate(
            status="TRUE",
            oscillations=[Fraction(1)] * (steps + 1),
            diameters=[0.0] * (steps + 1),
            strictly_decreasing=False, degenerate=True,
            note="one-dimensional cone: the diameter is identically zero",
        )
    P = mat_pow(A, exponent)
    base = [ [P[i][0] for i in range(n)], None ]
    # pick the second ray farthest from the first, deterministically
    best_j, best = None, None
    for j in range(1, n):
        cand = [P[i][j] for i in range(n)]
        osc = hilbert_oscillation(base[0], cand)
        if best is None or osc > best:
            best, best_j = osc, j
    base[1] = [P[i][best_j] for i in range(n)]

    oscillations = []
    x, y = base
    for _ in range(steps + 1):
        oscillations.append(hilbert_oscillation(x, y))
        x = mat_vec(A, x)
        y = mat_vec(A, y)
    decreasing = all(oscillations[i] > oscillations[i + 1] for i in range(1, steps))
    return ErgodicityCertificate(
        status="TRUE" if decreasing else "UNKNOWN",
        oscillations=oscillations,
        diameters=[math.log(float(o)) for o in oscillations],
        strictly_decreasing=decreasing,
        degenerate=False,
        note="" if decreasing else "oscillation sequence is not strictly decreasing",
    )
