"""Stationary expanding sequences: one collared complex, one self-map.

Levels are indexed so level 0 is the collared complex itself; level n+1 maps
onto level n by substitution, so the pushforward on top chains is the
abelianization matrix of the collared rule and the pullback on cochains is
its transpose.  Volumes grow by pushforward: the level-(n+1) volume of a
cell is the volume of its inflated block at level n, which keeps all mass
bookkeeping exact for arbitrary rational tile sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebraic import NumberField, perron_root_field
from .collars import CollaredRule, check_flattening
from .complexes import CellComplex, build_complex
from .errors import AmbiguityError, DimensionMismatch, FlatteningFailure, NonPrimitiveRule
from .homology import cycle_space_basis, mat_transpose, mat_vec
from .rules import abelianization, is_primitive


@dataclass
class EFS:
    """A stationary expanding flattening sequence."""

    crule: CollaredRule
    complex: CellComplex
    pushforward: list[list[int]]   # entry (i, j): preimages in cell j of a point in cell i
    pullback: list[list[int]]      # transpose, acting on top cochains
    field: NumberField             # Q(scale), scale = Perron root of the pushforward
    scale: object                  # volume expansion per level, as a field element
    primitivity_exponent: int
    _length_cache: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return self.complex.dimension

    @property
    def size(self) -> int:
        return len(self.complex.cells[self.dimension])

    def cell_index(self, cell_id: str) -> int:
        return self.complex.top_labels.index(cell_id)

    def level_volumes(self, n: int) -> list[Fraction]:
        """Exact volumes of the level-n cells (level-0 units)."""
        vols = list(self.complex.volumes)
        for _ in range(n):
            vols = mat_vec(mat_transpose(self.pushforward), vols)
        return vols

    def kernel_basis(self) -> list[list[int]]:
        return cycle_space_basis(self.complex)


def build_efs(crule: CollaredRule) -> EFS:
    """Assemble the stationary sequence from a border-forcing collared rule."""
    report = check_flattening(crule)
    if not report.ok:
        raise FlatteningFailure("collared rule does not flatten: " + report.describe(),
                                witness=report.witness)
    matrix = abelianization(crule.rule)
    primitive, exponent = is_primitive(matrix)
    if not primitive:
        raise NonPrimitiveRule("collared pushforward matrix is not primitive")
    field = perron_root_field(matrix)
    complex_ = build_complex(crule.rule)
    efs = EFS(
        crule=crule,
        complex=complex_,
        pushforward=matrix,
        pullback=mat_transpose(matrix),
        field=field,
        scale=field.gen(),
        primitivity_exponent=exponent,
    )
    _verify_cycle_stability(efs)
    return efs


def _verify_cycle_stability(efs: EFS) -> None:
    """Pushforward must map top cycles to top cycles, exactly."""
    bd = efs.complex.boundaries[efs.dimension]
    for vec in efs.kernel_basis():
        image = mat_vec(efs.pushforward, vec)
        if any(mat_vec(bd, image)):
            raise FlatteningFailure("pushforward does not preserve the cycle space")


def control_efs(crule: CollaredRule, complex_: CellComplex, matrix) -> EFS:
    """EFS shell around explicit complex and matrix data.

    Skips the flattening and primitivity gates, for diagnostics and
    reducible control cases; the field defaults to Q when the Perron root
    is unavailable.
    """
    from .algebraic import integer_field

    primitive, exponent = is_primitive(matrix)
    if primitive:
        field = perron_root_field(matrix)
    else:
        field = integer_field(1)
    return EFS(
        crule=crule,
        complex=complex_,
        pushforward=[row[:] for row in matrix],
        pullback=mat_transpose(matrix),
        field=field,
        scale=field.gen(),
        primitivity_exponent=exponent or 0,
    )


def pairing(weights, cochain):
    """<w | c> = sum_i c_i w_i; bilinear, works for any coefficient mix."""
    if len(weights) != len(cochain):
        raise DimensionMismatch("pairing of length %d with length %d" % (len(weights), len(cochain)))
    total = None
    for w, c in zip(weights, cochain):
        term = w * c
        total = term if total is None else total + term
    return total if total is not None else 0


@dataclass(frozen=True)
class DirectLimitElement:
    """Cohomology class representative: (level, integer vector) modulo
    (n, v) ~ (n+1, pullback . v)."""

    level: int
    vector: tuple[int, ...]


def direct_limit_element(efs: EFS, level: int, vector) -> DirectLimitElement:
    if level < 0:
        raise DimensionMismatch("level must be >= 0")
    vector = tuple(int(x) for x in vector)
    if len(vector) != efs.size:
        raise DimensionMismatch("vector length %d, expected %d" % (len(vector), efs.size))
    return DirectLimitElement(level, vector)


def direct_limit_equals(efs: EFS, a: DirectLimitElement, b: DirectLimitElement) -> bool:
    """Equality in the direct limit.

    Push both to the deeper level, then absorb the eventual kernel of the
    pullback: the kernel chain of an n x n integer matrix stabilizes after
    at most n iterations, so applying the pullback n more times decides
    equality exactly.
    """
    m = max(a.level, b.level)
    va, vb = list(a.vector), list(b.vector)
    for _ in range(m - a.level):
        va = mat_vec(efs.pullback, va)
    for _ in range(m - b.level):
        vb = mat_vec(efs.pullback, vb)
    diff = [x - y for x, y in zip(va, vb)]
    for _ in range(efs.size):
        if not any(diff):
            return True
        diff = mat_vec(efs.pullback, diff)
    return not any(diff)


def pair_with_measure(efs: EFS, element: DirectLimitElement, measure):
    """<mu_n | v>, independent of the chosen representative."""
    return pairing(measure.level_weights(element.level), element.vector)


# ---------------------------------------------------------------------------
# truncated hull points and the translation action

@dataclass(frozen=True)
class HullPoint:
    """Truncated inverse-limit point: a cell and an in-cell position per level.

    Coordinates are measured in level-0 units and satisfy the half-open
    convention 0 <= x_j < extent_j, so every point has one representation
    and projections between levels are deterministic.
    """

    depth: int
    cells: tuple[str, ...]                      # index k = level k
    coords: tuple[tuple[Fraction, ...], ...]


def level_extent(efs: EFS, level: int, cell_id: str) -> tuple[Fraction, ...]:
    """Side lengths of a level-``level`` cell in level-0 units."""
    rule = efs.crule.rule
    d = efs.dimension
    if d >= 2:
        k = rule.expansion
        return tuple(Fraction(kj) ** level for kj in k)
    length = _length_1d(efs, level, cell_id)
    return (length,)


def _length_1d(efs: EFS, level: int, cell_id: str):
    key = (level, cell_id)
    cache = efs._length_cache
    if key in cache:
        return cache[key]
    rule = efs.crule.rule
    if level == 0:
        out = rule.tile(cell_id).dims[0]
    else:
        out = sum(_length_1d(efs, level - 1, c) for c in rule.images[cell_id].cells)
    cache[key] = out
    return out


def _project(efs: EFS, level: int, cell_id: str, coord):
    """One-step projection to level-1 cells; deterministic on boundaries."""
    rule = efs.crule.rule
    img = rule.images[cell_id]
    if efs.dimension >= 2:
        sub = tuple(Fraction(kj) ** (level - 1) for kj in rule.expansion)
        block = tuple(int(x // e) for x, e in zip(coord, sub))
        newc = tuple(x - b * e for x, b, e in zip(coord, block, sub))
        return img.get(block), newc
    x = coord[0]
    acc = Fraction(0)
    for cell in img.cells:
        ln = _length_1d(efs, level - 1, cell)
        if x < acc + ln:
            return cell, (x - acc,)
        acc += ln
    raise AmbiguityError("coordinate %s outside the inflated block of %s" % (x, cell_id))


def make_hull_point(efs: EFS, depth: int, cell_id: str, coord) -> HullPoint:
    """Build a consistent truncated point from its deepest-level datum."""
    if depth < 0:
        raise DimensionMismatch("depth must be >= 0")
    if cell_id not in efs.complex.top_labels:
        raise DimensionMismatch("unknown cell %r" % cell_id)
    coord = tuple(Fraction(x) for x in coord)
    if len(coord) != efs.dimension:
        raise DimensionMismatch("coordinate has %d entries, expected %d" % (len(coord), efs.dimension))
    extent = level_extent(efs, depth, cell_id)
    if any(not 0 <= x < e for x, e in zip(coord, extent)):
        raise AmbiguityError("coordinate %r outside the level-%d cell %s" % (coord, depth, cell_id))
    cells = [cell_id]
    coords = [coord]
    for level in range(depth, 0, -1):
        cell_id, coord = _project(efs, level, cell_id, coord)
        cells.append(cell_id)
        coords.append(tuple(coord))
    cells.reverse()
    coords.reverse()
    return HullPoint(depth, tuple(cells), tuple(coords))


def verify_hull_point(efs: EFS, point: HullPoint) -> bool:
    """Projection consistency of all recorded levels."""
    rebuilt = make_hull_point(efs, point.depth, point.cells[point.depth], point.coords[point.depth])
    return rebuilt == point


def translate_point(efs: EFS, point: HullPoint, vector) -> HullPoint:
    """Translate a truncated point by a rational vector.

    The level-n cell determines the full tiling structure inside itself (the
    collared substitution unrolls it), so the move resolves exactly when the
    straight segment stays inside that cell; otherwise the crossing would
    need a deeper level and AmbiguityError asks the caller to deepen.
    """
    vector = tuple(Fraction(x) for x in vector)
    if len(vector) != efs.dimension:
        raise DimensionMismatch("vector has %d entries, expected %d" % (len(vector), efs.dimension))
    deep_cell = point.cells[point.depth]
    extent = level_extent(efs, point.depth, deep_cell)
    target = tuple(x + v for x, v in zip(point.coords[point.depth], vector))
    if any(not 0 <= x < e for x, e in zip(target, extent)):
        raise AmbiguityError(
            "translation leaves the level-%d cell %s; deepen the point" % (point.depth, deep_cell))
    return make_hull_point(efs, point.depth, deep_cell, target)
