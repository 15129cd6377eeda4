"""Substitution rules on labeled rectangular tiles.

A rule is given by a finite alphabet of prototiles and, per label, an
inflation image: a word for one-dimensional rules, a constant-shape block of
labels for d >= 2 (where all prototiles are unit d-cubes on the integer
grid).  Rule files are JSON documents::

    {"dimension": 1,
     "tiles": [{"label": "a", "dims": ["1"]}, {"label": "b", "dims": ["1"]}],
     "images": {"a": "ab", "b": "a"}}

    {"dimension": 2,
     "tiles": [{"label": "ne", "dims": ["1", "1"]}, ...],
     "expansion": [2, 2],
     "images": {"ne": [["ne", "nw"], ["se", "ne"]], ...}}

Side lengths are exact rationals serialized as "p/q" strings.  Nested image
arrays list the last axis outermost, so a 2-D image reads ``img[y][x]`` with
``y = 0`` the bottom row.  One-dimensional images may be plain strings when
every label is a single character, or lists of labels otherwise.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    NonPositiveDimension,
    NonPrimitiveRule,
    RaggedImage,
    RuleFormatError,
    StabilizationFailure,
    UndeclaredLabel,
)

DEFAULT_CELL_BUDGET = 10**7

# Iteration cap for adjacency/corona censuses on pathological inputs.
STABILIZATION_CAP = 64


@dataclass(frozen=True)
class Prototile:
    label: str
    dims: tuple[Fraction, ...]

    @property
    def dimension(self) -> int:
        return len(self.dims)

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for s in self.dims:
            v *= s
        return v


@dataclass(frozen=True)
class Patch:
    """A rectangular block of labels with an anchor position.

    ``cells`` is stored flat with axis 0 fastest: the cell at position
    ``(x_0, ..., x_{d-1})`` sits at index ``x_0 + x_1*s_0 + x_2*s_0*s_1 + ...``.
    """

    dimension: int
    shape: tuple[int, ...]
    cells: tuple[str, ...]
    anchor: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.anchor is None:
            object.__setattr__(self, "anchor", (0,) * self.dimension)
        n = 1
        for s in self.shape:
            n *= s
        if len(self.shape) != self.dimension or len(self.cells) != n:
            raise RaggedImage("patch shape %r does not match %d cells" % (self.shape, len(self.cells)))

    @property
    def size(self) -> int:
        return len(self.cells)

    def index(self, pos: tuple[int, ...]) -> int:
        idx, stride = 0, 1
        for x, s in zip(pos, self.shape):
            if not 0 <= x < s:
                raise IndexError(pos)
            idx += x * stride
            stride *= s
        return idx

    def get(self, pos: tuple[int, ...]) -> str:
        return self.cells[self.index(pos)]

    def positions(self):
        return itertools.product(*(range(s) for s in self.shape))

    def word(self) -> str:
        if self.dimension != 1:
            raise RuleFormatError("word() is only defined for 1-D patches")
        return "".join(self.cells)


@dataclass(frozen=True)
class SubstitutionRule:
    dimension: int
    prototiles: tuple[Prototile, ...]
    images: dict[str, Patch]
    expansion: tuple[int, ...] | None  # None for d = 1 (scale is the Perron root)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.prototiles)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UndeclaredLabel(label) from None

    def tile(self, label: str) -> Prototile:
        return self.prototiles[self.index(label)]

    def image(self, label: str) -> Patch:
        if label not in self.images:
            raise UndeclaredLabel(label)
        return self.images[label]

    def single(self, label: str) -> Patch:
        """One-cell seed patch."""
        self.index(label)
        return Patch(self.dimension, (1,) * self.dimension, (label,))


def _parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise RuleFormatError("rationals must be strings like '3/2', got %r" % (text,))
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise RuleFormatError("bad rational %r: %s" % (text, exc)) from None


def _parse_image_cells(value, dimension, labels) -> Patch:
    """Turn a JSON image (word string or nested array) into a Patch."""
    if dimension == 1:
        if isinstance(value, str):
            seq = list(value)
        elif isinstance(value, list) and all(isinstance(c, str) for c in value):
            seq = list(value)
        else:
            raise RuleFormatError("1-D image must be a word string or list of labels")
        for c in seq:
            if c not in labels:
                raise UndeclaredLabel(c)
        return Patch(1, (len(seq),), tuple(seq))

    # Nested list with the last axis outermost; peel shapes from outside in.
    shape_rev = []
    probe = value
    for _ in range(dimension):
        if not isinstance(probe, list) or not probe:
            raise RaggedImage("image nesting depth does not match dimension")
        shape_rev.append(len(probe))
        probe = probe[0]
    if isinstance(probe, list):
        raise RaggedImage("image nesting depth exceeds dimension")
    shape = tuple(reversed(shape_rev))

    cells = [None] * _prod(shape)
    seen = 0

    def walk(node, rev_prefix):
        nonlocal seen
        depth = len(rev_prefix)
        if depth == dimension:
            if not isinstance(node, str):
                raise RaggedImage("image entries must be labels")
            if node not in labels:
                raise UndeclaredLabel(node)
            pos = tuple(reversed(rev_prefix))
            idx, stride = 0, 1
            for x, s in zip(pos, shape):
                idx += x * stride
                stride *= s
            cells[idx] = node
            seen += 1
            return
        axis = dimension - 1 - depth
        if not isinstance(node, list) or len(node) != shape[axis]:
            raise RaggedImage("ragged image array")
        for i, sub in enumerate(node):
            walk(sub, rev_prefix + [i])

    walk(value, [])
    if seen != len(cells) or any(c is None for c in cells):
        raise RaggedImage("image array is not a full block")
    return Patch(dimension, shape, tuple(cells))


def _prod(seq) -> int:
    n = 1
    for s in seq:
        n *= s
    return n


def parse_rule(document: str) -> SubstitutionRule:
    """Parse and validate a rule file (JSON text)."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise RuleFormatError("invalid JSON: %s" % exc) from None
    if not isinstance(data, dict):
        raise RuleFormatError("rule document must be a JSON object")

    try:
        dimension = int(data["dimension"])
        tiles = data["tiles"]
        images = data["images"]
    except (KeyError, TypeError, ValueError) as exc:
        raise RuleFormatError("missing or malformed top-level field: %s" % exc) from None
    if dimension < 1:
        raise RuleFormatError("dimension must be >= 1")
    if not isinstance(tiles, list) or not tiles:
        raise RuleFormatError("tiles must be a non-empty list")

    prototiles = []
    for entry in tiles:
        if not isinstance(entry, dict) or "label" not in entry or "dims" not in entry:
            raise RuleFormatError("each tile needs 'label' and 'dims'")
        label = entry["label"]
        if not isinstance(label, str) or not label:
            raise RuleFormatError("labels must be non-empty strings")
        dims = tuple(_parse_fraction(s) for s in entry["dims"])
        if len(dims) != dimension:
            raise RuleFormatError("tile %r has %d dims, expected %d" % (label, len(dims), dimension))
        if any(s <= 0 for s in dims):
            raise NonPositiveDimension(label)
        prototiles.append(Prototile(label, dims))
    labels = [p.label for p in prototiles]
    if len(set(labels)) != len(labels):
        raise RuleFormatError("duplicate tile labels")

    expansion = None
    if dimension >= 2:
        if "expansion" not in data:
            raise RuleFormatError("d >= 2 rules need an integer expansion vector")
        expansion = tuple(int(k) for k in data["expansion"])
        if len(expansion) != dimension or any(k < 1 for k in expansion):
            raise RuleFormatError("expansion must be %d integers >= 1" % dimension)
        for p in prototiles:
            if any(s != 1 for s in p.dims):
                raise RuleFormatError("d >= 2 prototiles must be unit cubes, got %r" % (p.label,))

    if not isinstance(images, dict) or set(images) != set(labels):
        raise RuleFormatError("images must cover exactly the declared labels")
    parsed_images = {}
    label_set = set(labels)
    for label in labels:
        patch = _parse_image_cells(images[label], dimension, label_set)
        if dimension >= 2 and patch.shape != expansion:
            raise RaggedImage("image of %r has shape %r, expected %r" % (label, patch.shape, expansion))
        if dimension == 1 and patch.size == 0:
            raise RuleFormatError("empty image for %r" % label)
        parsed_images[label] = patch

    return SubstitutionRule(dimension, tuple(prototiles), parsed_images, expansion)


def load_rule(path) -> SubstitutionRule:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rule(fh.read())


def abelianization(rule: SubstitutionRule) -> list[list[int]]:
    """Matrix A with A[i][j] = occurrences of tile i in the image of tile j."""
    p = len(rule.prototiles)
    A = [[0] * p for _ in range(p)]
    for j, label in enumerate(rule.labels):
        for cell in rule.images[label].cells:
            A[rule.index(cell)][j] += 1
    return A


def is_primitive(A: list[list[int]]) -> tuple[bool, int | None]:
    """Whether some power A^k (k <= 2 p^2) is entrywise positive.

    Returns (flag, smallest such k or None).  Works on the positivity
    pattern only, with rows encoded as bitmasks.
    """
    p = len(A)
    if p == 0 or any(len(row) != p for row in A):
        raise ValueError("square matrix required")
    if any(entry < 0 for row in A for entry in row):
        raise ValueError("nonnegative matrix required")
    base = [sum(1 << j for j, e in enumerate(row) if e > 0) for row in A]
    full = (1 << p) - 1
    cur = list(base)
    bound = 2 * p * p
    for k in range(1, bound + 1):
        if all(m == full for m in cur):
            return True, k
        nxt = [0] * p
        for i in range(p):
            acc, row = 0, cur[i]
            j = 0
            while row:
                if row & 1:
                    acc |= base[j]
                row >>= 1
                j += 1
            nxt[i] = acc
        cur = nxt
    return False, None


def rule_primitivity(rule: SubstitutionRule) -> tuple[bool, int | None]:
    return is_primitive(abelianization(rule))


def expand(rule: SubstitutionRule, seed: Patch, k: int, budget: int = DEFAULT_CELL_BUDGET) -> Patch:
    """Apply the substitution k times to a seed patch.

    Layout is deterministic: concatenation for d = 1, block placement on the
    expansion grid for d >= 2.  Raises BudgetExceeded before materializing a
    patch larger than ``budget`` cells.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if seed.dimension != rule.dimension:
        raise DimensionMismatch(
            "patch dimension %d does not match rule dimension %d" % (seed.dimension, rule.dimension)
        )
    for c in seed.cells:
        rule.index(c)
    patch = seed
    for _ in range(k):
        patch = _expand_once(rule, patch, budget)
    return patch


def _expand_once(rule: SubstitutionRule, patch: Patch, budget: int) -> Patch:
    if rule.dimension == 1:
        n = sum(rule.images[c].size for c in patch.cells)
        if n > budget:
            raise BudgetExceeded("expansion would produce %d cells (budget %d)" % (n, budget))
        out = []
        for c in patch.cells:
            out.extend(rule.images[c].cells)
        return Patch(1, (len(out),), tuple(out), patch.anchor)

    kvec = rule.expansion
    shape = tuple(s * k for s, k in zip(patch.shape, kvec))
    n = _prod(shape)
    if n > budget:
        raise BudgetExceeded("expansion would produce %d cells (budget %d)" % (n, budget))
    cells = [None] * n
    strides = []
    acc = 1
    for s in shape:
        strides.append(acc)
        acc *= s
    for pos in patch.positions():
        img = rule.images[patch.get(pos)]
        base = tuple(x * k for x, k in zip(pos, kvec))
        for q in img.positions():
            idx = 0
            for bx, qx, st in zip(base, q, strides):
                idx += (bx + qx) * st
            cells[idx] = img.get(q)
    return Patch(rule.dimension, shape, tuple(cells), tuple(a * k for a, k in zip(patch.anchor, kvec)))


def _axis_pairs(patch: Patch) -> list[set[tuple[str, str]]]:
    """Ordered face-contact pairs (lower, upper) per axis inside a patch."""
    d = patch.dimension
    pairs = [set() for _ in range(d)]
    for pos in patch.positions():
        here = patch.get(pos)
        for j in range(d):
            if pos[j] + 1 < patch.shape[j]:
                nxt = patch.get(pos[:j] + (pos[j] + 1,) + pos[j + 1:])
                pairs[j].add((here, nxt))
    return pairs


def legal_adjacencies(rule: SubstitutionRule, budget: int = DEFAULT_CELL_BUDGET) -> list[set[tuple[str, str]]]:
    """Stabilized set of ordered face-to-face label pairs per axis.

    Pairs are collected from inflations of every prototile; iteration stops
    when one further inflation adds nothing.  Requires a primitive rule
    (otherwise the census need not stabilize on the legal set).
    """
    primitive, _ = rule_primitivity(rule)
    if not primitive:
        raise NonPrimitiveRule(
            "legal_adjacencies needs a primitive rule; abelianization has no positive power"
        )
    patches = [rule.single(t) for t in rule.labels]
    prev = None
    for _ in range(STABILIZATION_CAP):
        patches = [_expand_once(rule, p, budget) for p in patches]
        current = [set() for _ in range(rule.dimension)]
        for p in patches:
            for j, pairs in enumerate(_axis_pairs(p)):
                current[j] |= pairs
        if prev is not None and current == prev:
            return current
        prev = current
    raise StabilizationFailure("adjacency census did not stabilize in %d rounds" % STABILIZATION_CAP)


def letter_counts(rule: SubstitutionRule, patch: Patch) -> list[int]:
    """Occurrences of each prototile label in a patch, in alphabet order."""
    counts = [0] * len(rule.prototiles)
    for c in patch.cells:
        counts[rule.index(c)] += 1
    return counts
