"""Branched flat cell complexes built from face-to-face tile gluings.

Each prototile contributes one top cell (a labeled d-rectangle) together with
its full face lattice.  Every legal adjacency glues the two facing facets by
translation, which identifies their subfaces pairwise; lower strata are then
the transitive closure of those identifications.  Boundary signs follow the
standard orientation of the oriented cube: the facet fixing axis ``k`` at
value ``s`` enters the boundary with sign ``(-1)^k * (+1 if s else -1)``,
and the same rule applies within each face's ordered free axes.

Cell identifiers are strings derived from the lexicographically smallest
germ of each identification class, so rebuilt complexes are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionMismatch, HulltoolError
from .homology import mat_mul
from .rules import SubstitutionRule, legal_adjacencies

# A face pattern fixes a subset of axes to 0/1 and leaves the rest free.
# Germs are (tile label, pattern) pairs; pattern entries are None, 0 or 1.
Pattern = tuple
Germ = tuple


def pattern_dim(pattern: Pattern) -> int:
    return sum(1 for v in pattern if v is None)


def germ_key(germ: Germ) -> str:
    label, pattern = germ
    fixed = "".join("%s%d" % ("+" if v else "-", axis) for axis, v in enumerate(pattern) if v is not None)
    return "%s:%s" % (label, fixed)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smaller representative
            if germ_key(rb) < germ_key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class SideData:
    """Per (d-1)-cell, the germs on the plus and minus side.

    A germ here is (top cell id, facet pattern); the side is the sign of its
    incidence in the top boundary matrix, so the Kirchhoff residual below is
    literally a row of that matrix applied to the weight vector.
    """

    plus: dict[str, tuple[Germ, ...]]
    minus: dict[str, tuple[Germ, ...]]


@dataclass
class CellComplex:
    """Finite branched complex with ordered cells and exact boundary data."""

    dimension: int
    cells: dict[int, list[str]]
    boundaries: dict[int, list[list[int]]]  # i -> matrix of d_i, rows = (i-1)-cells
    volumes: list[Fraction]
    top_labels: list[str]
    germ_class: dict[Germ, str] = field(default_factory=dict)
    side_data: SideData | None = None

    def cell_index(self, dim: int, cell_id: str) -> int:
        return self.cells[dim].index(cell_id)

    def boundary_matrix(self, i: int) -> list[list[int]]:
        if not 1 <= i <= self.dimension:
            raise DimensionMismatch("boundary degree %d out of range 1..%d" % (i, self.dimension))
        return [row[:] for row in self.boundaries[i]]

    def counts(self) -> list[int]:
        return [len(self.cells[i]) for i in range(self.dimension + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** i * len(self.cells[i]) for i in range(self.dimension + 1))

    def validate(self) -> None:
        """Check the chain-complex identities and the two-sidedness of facets."""
        for i in range(2, self.dimension + 1):
            prod = mat_mul(self.boundaries[i - 1], self.boundaries[i])
            if any(any(row) for row in prod):
                raise HulltoolError("boundary composition d_%d . d_%d is nonzero" % (i - 1, i))
        if self.side_data is not None:
            for cid in self.cells[self.dimension - 1]:
                if not self.side_data.plus.get(cid) or not self.side_data.minus.get(cid):
                    raise HulltoolError("facet %s is not two-sided" % cid)

    def facet_axis(self, facet_id: str) -> int:
        """Axis normal to a (d-1)-cell (all germs in a class share it)."""
        side = self.side_data.plus.get(facet_id) or self.side_data.minus.get(facet_id)
        pattern = side[0][1]
        return next(axis for axis, v in enumerate(pattern) if v is not None)


def _subpatterns(dimension: int):
    """All face patterns of the d-cube, the top cell excluded."""
    for values in itertools.product((None, 0, 1), repeat=dimension):
        if any(v is not None for v in values):
            yield values


def _free_axes(pattern: Pattern) -> list[int]:
    return [axis for axis, v in enumerate(pattern) if v is None]


def _face_boundary(pattern: Pattern):
    """Signed codimension-1 subfaces of a face, rank signs over its free axes."""
    out = []
    for rank, axis in enumerate(_free_axes(pattern)):
        for value in (0, 1):
            child = pattern[:axis] + (value,) + pattern[axis + 1:]
            sign = (-1) ** rank * (1 if value else -1)
            out.append((child, sign))
    return out


def build_complex(rule: SubstitutionRule, adjacencies=None) -> CellComplex:
    """Quotient complex of the rule's prototiles by its legal face contacts."""
    if adjacencies is None:
        adjacencies = legal_adjacencies(rule)
    d = rule.dimension
    labels = rule.labels

    uf = _UnionFind()
    for label in labels:
        for pattern in _subpatterns(d):
            uf.add((label, pattern))

    # glue facets (and, by translation, their whole face lattices); the
    # template pattern leaves the contact axis free and ranges over every
    # face of the shared facet, the facet itself included
    for axis in range(d):
        for lower, upper in adjacencies[axis]:
            for pattern in itertools.product((None, 0, 1), repeat=d):
                if pattern[axis] is not None:
                    continue
                left = pattern[:axis] + (1,) + pattern[axis + 1:]
                right = pattern[:axis] + (0,) + pattern[axis + 1:]
                uf.union((lower, left), (upper, right))

    # name classes by their smallest germ; order cells deterministically
    class_id: dict[Germ, str] = {}
    members: dict[str, list[Germ]] = {}
    for label in labels:
        for pattern in _subpatterns(d):
            rep = uf.find((label, pattern))
            cid = germ_key(rep)
            class_id[(label, pattern)] = cid
            members.setdefault(cid, []).append((label, pattern))

    cells: dict[int, list[str]] = {i: [] for i in range(d + 1)}
    cells[d] = list(labels)
    seen = set()
    for label in labels:
        for pattern in _subpatterns(d):
            cid = class_id[(label, pattern)]
            if cid not in seen:
                seen.add(cid)
                cells[pattern_dim(pattern)].append(cid)
    for i in range(d):
        cells[i].sort()

    index = {i: {cid: k for k, cid in enumerate(cells[i])} for i in range(d + 1)}

    boundaries: dict[int, list[list[int]]] = {}
    # top boundary: facets of each prototile cell
    top = [[0] * len(labels) for _ in cells[d - 1]]
    plus: dict[str, list[Germ]] = {cid: [] for cid in cells[d - 1]}
    minus: dict[str, list[Germ]] = {cid: [] for cid in cells[d - 1]}
    for j, label in enumerate(labels):
        full = (None,) * d
        for child, sign in _face_boundary(full):
            cid = class_id[(label, child)]
            top[index[d - 1][cid]][j] += sign
            (plus if sign > 0 else minus)[cid].append((label, child))
    boundaries[d] = top

    # lower boundaries from one representative per class; identifications are
    # translations, so any representative gives the same chain
    for i in range(d - 1, 0, -1):
        mat = [[0] * len(cells[i]) for _ in cells[i - 1]]
        for j, cid in enumerate(cells[i]):
            rep = min(members[cid], key=germ_key)
            label, pattern = rep
            for child, sign in _face_boundary(pattern):
                ccid = class_id[(label, child)]
                mat[index[i - 1][ccid]][j] += sign
        boundaries[i] = mat

    complex_ = CellComplex(
        dimension=d,
        cells=cells,
        boundaries=boundaries,
        volumes=[rule.tile(lb).volume for lb in labels],
        top_labels=list(labels),
        germ_class=class_id,
        side_data=SideData(
            plus={cid: tuple(sorted(g, key=germ_key)) for cid, g in plus.items()},
            minus={cid: tuple(sorted(g, key=germ_key)) for cid, g in minus.items()},
        ),
    )
    complex_.validate()
    return complex_


def build_b0(rule: SubstitutionRule) -> CellComplex:
    """The first branched approximant of a primitive rule."""
    return build_complex(rule)


def kirchhoff_residual(complex_: CellComplex, weights, sides: SideData | None = None):
    """Per facet, (sum of plus-side weights) - (sum of minus-side weights).

    The weight vector may hold ints, Fractions or field elements.  It is a
    weight system iff the residual vanishes and the weights are nonnegative.
    """
    d = complex_.dimension
    if len(weights) != len(complex_.cells[d]):
        raise DimensionMismatch("expected %d weights, got %d" % (len(complex_.cells[d]), len(weights)))
    sides = sides or complex_.side_data
    pos = {label: i for i, label in enumerate(complex_.top_labels)}
    residual = []
    for cid in complex_.cells[d - 1]:
        total = None
        for label, _ in sides.plus.get(cid, ()):
            w = weights[pos[label]]
            total = w if total is None else total + w
        for label, _ in sides.minus.get(cid, ()):
            w = weights[pos[label]]
            total = -w if total is None else total - w
        residual.append(total if total is not None else 0)
    return residual


def classify_weight_vector(complex_: CellComplex, weights) -> dict:
    """is_cycle / nonnegative / strictly_positive flags for a weight vector."""
    residual = kirchhoff_residual(complex_, weights)
    signs = [_sign(w) for w in weights]
    return {
        "is_cycle": all(_sign(r) == 0 for r in residual),
        "nonnegative": all(s >= 0 for s in signs),
        "strictly_positive": all(s > 0 for s in signs),
    }


def _sign(value):
    if hasattr(value, "sign"):
        return value.sign()
    return (value > 0) - (value < 0)
