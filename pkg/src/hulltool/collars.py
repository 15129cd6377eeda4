"""Collared refinements and the single-sheet (flattening) check.

A collared tile is a tile together with the labels of its neighbors; the
induced substitution on collared tiles reads the collars of image cells off
the inflated surrounding, which the collar itself determines.  Collaring
starts from face neighbors and escalates automatically: corner coronas for
d >= 2, then a second collaring round, at most three rounds in total.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    FlatteningFailure,
    NonPrimitiveRule,
    StabilizationFailure,
    WellDefinednessFailure,
)
from .rules import (
    DEFAULT_CELL_BUDGET,
    STABILIZATION_CAP,
    Patch,
    Prototile,
    SubstitutionRule,
    _expand_once,
    rule_primitivity,
)


def corona_offsets(dimension: int, mode: str) -> tuple[tuple[int, ...], ...]:
    """Neighbor offsets recorded in a collar, in canonical order."""
    if mode == "face":
        offsets = []
        for axis in range(dimension):
            for step in (-1, 1):
                off = [0] * dimension
                off[axis] = step
                offsets.append(tuple(off))
        return tuple(sorted(offsets))
    if mode == "corner":
        return tuple(sorted(
            off for off in itertools.product((-1, 0, 1), repeat=dimension) if any(off)
        ))
    raise ValueError("unknown corona mode %r" % mode)


@dataclass(frozen=True)
class CollaredTile:
    core: str
    corona: tuple[tuple[tuple[int, ...], str], ...]  # ((offset), label), offset-sorted

    def encode(self) -> str:
        parts = []
        for off, label in self.corona:
            key = "".join(("+%d" % x if x > 0 else "%d" % x) for x in off)
            parts.append("%s=%s" % (key, label))
        return "%s|%s" % (self.core, ",".join(parts))


@dataclass(frozen=True)
class CollaredRule:
    """Substitution on collared tiles plus the forgetful map to the base."""

    rule: SubstitutionRule
    base: SubstitutionRule
    forget: dict[str, str]
    tiles: dict[str, CollaredTile]
    mode: str
    rounds: int

    @property
    def is_trivial(self) -> bool:
        return self.rounds == 0

    def forget_patch(self, patch: Patch) -> Patch:
        return Patch(patch.dimension, patch.shape,
                     tuple(self.forget[c] for c in patch.cells), patch.anchor)


def trivial_collaring(rule: SubstitutionRule) -> CollaredRule:
    """The base rule viewed as a collared rule with empty collars."""
    return CollaredRule(
        rule=rule,
        base=rule,
        forget={label: label for label in rule.labels},
        tiles={label: CollaredTile(label, ()) for label in rule.labels},
        mode="none",
        rounds=0,
    )


def _census(patch: Patch, offsets) -> set[CollaredTile]:
    """Collared tiles read off the interior of a patch."""
    found = set()
    for pos in patch.positions():
        corona = []
        ok = True
        for off in offsets:
            npos = tuple(p + o for p, o in zip(pos, off))
            if any(not 0 <= x < s for x, s in zip(npos, patch.shape)):
                ok = False
                break
            corona.append((off, patch.get(npos)))
        if ok:
            found.add(CollaredTile(patch.get(pos), tuple(corona)))
    return found


def enumerate_collared(rule: SubstitutionRule, mode: str = "face",
                       budget: int = DEFAULT_CELL_BUDGET) -> list[CollaredTile]:
    """Stabilized set of (tile, corona) classes occurring in inflations.

    Closure is detected by idempotence: the census of one further inflation
    adds nothing.  Sorted by encoded name for reproducibility.
    """
    primitive, _ = rule_primitivity(rule)
    if not primitive:
        raise NonPrimitiveRule("collaring needs a primitive rule")
    offsets = corona_offsets(rule.dimension, mode)
    patches = [rule.single(t) for t in rule.labels]
    prev = None
    for _ in range(STABILIZATION_CAP):
        patches = [_expand_once(rule, p, budget) for p in patches]
        current = set()
        for p in patches:
            current |= _census(p, offsets)
        if prev is not None and current == prev:
            return sorted(current, key=lambda t: t.encode())
        prev = current
    raise StabilizationFailure("corona census did not stabilize in %d rounds" % STABILIZATION_CAP)


def _collared_image(rule: SubstitutionRule, tile: CollaredTile, offsets) -> list[tuple[tuple[int, ...], CollaredTile]]:
    """Collared cells of the inflated tile, coronas read from the inflated
    surrounding.  Face neighbors of an image cell always lie in the image of
    the core or of a recorded neighbor, so the collar determines them."""
    d = rule.dimension
    img = rule.images[tile.core]
    shape = img.shape
    grid: dict[tuple[int, ...], str] = {}

    def place(block_origin, patch):
        for pos in patch.positions():
            grid[tuple(b + p for b, p in zip(block_origin, pos))] = patch.get(pos)

    place((0,) * d, img)
    neighbor = dict(tile.corona)
    for off in offsets:
        label = neighbor[off]
        nimg = rule.images[label]
        # a -1 neighbor block ends where the core block begins, so its
        # origin depends on its own shape (image lengths vary for d = 1)
        origin = tuple(
            shape[axis] if o == 1 else (-nimg.shape[axis] if o == -1 else 0)
            for axis, o in enumerate(off)
        )
        place(origin, nimg)

    out = []
    for pos in img.positions():
        corona = []
        for off in offsets:
            npos = tuple(p + o for p, o in zip(pos, off))
            if npos not in grid:
                raise WellDefinednessFailure(
                    "collar of %s does not determine the %r neighbor of image cell %r"
                    % (tile.encode(), off, pos))
            corona.append((off, grid[npos]))
        out.append((pos, CollaredTile(grid[pos], tuple(corona))))
    return out


def _collar_once(rule: SubstitutionRule, mode: str, budget: int) -> CollaredRule:
    """One collaring round: alphabet from the census, images from collars."""
    offsets = corona_offsets(rule.dimension, mode)
    tiles = enumerate_collared(rule, mode, budget)
    codes = {t: t.encode() for t in tiles}
    known = set(codes.values())

    prototiles = []
    images = {}
    forget = {}
    tile_map = {}
    for t in tiles:
        code = codes[t]
        base_tile = rule.tile(t.core)
        prototiles.append(Prototile(code, base_tile.dims))
        forget[code] = t.core
        tile_map[code] = t
        cells_by_pos = {}
        for pos, ct in _collared_image(rule, t, offsets):
            cc = ct.encode()
            if cc not in known:
                raise WellDefinednessFailure(
                    "image of %s contains %s, which never occurs in inflations; "
                    "the corona does not force the border" % (code, cc))
            cells_by_pos[pos] = cc
        img = rule.images[t.core]
        images[code] = Patch(
            rule.dimension, img.shape,
            tuple(cells_by_pos[pos] for pos in sorted(img.positions(), key=lambda p: img.index(p))),
        )

    collared = SubstitutionRule(rule.dimension, tuple(prototiles), images, rule.expansion)
    cr = CollaredRule(collared, rule, forget, tile_map, mode, 1)
    _verify_functoriality(cr)
    _verify_occurrences(cr, budget)
    return cr


def _verify_functoriality(cr: CollaredRule) -> None:
    """Forgetting collars must commute with substitution, exactly."""
    for code in cr.rule.labels:
        collapsed = cr.forget_patch(cr.rule.images[code])
        direct = cr.base.images[cr.forget[code]]
        if collapsed.cells != direct.cells or collapsed.shape != direct.shape:
            raise WellDefinednessFailure("forgetful map does not intertwine substitution at %s" % code)


def _verify_occurrences(cr: CollaredRule, budget: int) -> None:
    """Observed collared images in a deep inflation must match the
    constructed ones; this is the two-surroundings consistency check."""
    offsets = corona_offsets(cr.base.dimension, cr.mode)
    for seed in cr.base.labels:
        patch = cr.base.single(seed)
        for _ in range(3):
            patch = _expand_once(cr.base, patch, budget)
        bigger = _expand_once(cr.base, patch, budget)
        kvec = cr.base.expansion or None
        for pos in patch.positions():
            corona = []
            ok = True
            for off in offsets:
                npos = tuple(p + o for p, o in zip(pos, off))
                if any(not 0 <= x < s for x, s in zip(npos, patch.shape)):
                    ok = False
                    break
                corona.append((off, patch.get(npos)))
            if not ok:
                continue
            observed_tile = CollaredTile(patch.get(pos), tuple(corona))
            code = observed_tile.encode()
            if code not in cr.tiles:
                raise WellDefinednessFailure("census missed occurring collared tile %s" % code)
            img = cr.rule.images[code]
            base = _block_origin(cr.base, patch, pos, kvec)
            for q in img.positions():
                gpos = tuple(b + x for b, x in zip(base, q))
                exp_corona = []
                interior = True
                for off in offsets:
                    npos = tuple(p + o for p, o in zip(gpos, off))
                    if any(not 0 <= x < s for x, s in zip(npos, bigger.shape)):
                        interior = False
                        break
                    exp_corona.append((off, bigger.get(npos)))
                if not interior:
                    continue
                observed = CollaredTile(bigger.get(gpos), tuple(exp_corona)).encode()
                if observed != img.get(q):
                    raise WellDefinednessFailure(
                        "collared image of %s is ambiguous at %r: %s vs %s"
                        % (code, q, observed, img.get(q)))


def _block_origin(rule: SubstitutionRule, patch: Patch, pos, kvec):
    if rule.dimension >= 2:
        return tuple(x * k for x, k in zip(pos, kvec))
    # 1-D blocks have variable length; accumulate along the word
    offset = 0
    for i in range(pos[0]):
        offset += rule.images[patch.cells[i]].size
    return (offset,)


def collared_rule(rule: SubstitutionRule, budget: int = DEFAULT_CELL_BUDGET,
                  ensure_flattening: bool = True) -> CollaredRule:
    """Collar a primitive rule until the induced substitution is border
    forcing.  Escalation ladder: face coronas, corner coronas (d >= 2), one
    more collaring round; at most three rounds before giving up."""
    if rule.dimension == 1:
        plans = [("face", 1), ("face", 2), ("face", 3)]
    else:
        plans = [("face", 1), ("corner", 1), ("corner", 2)]
    last_failure = None
    for mode, rounds in plans:
        try:
            cr = _collar_rounds(rule, mode, rounds, budget)
        except WellDefinednessFailure as exc:
            last_failure = exc
            continue
        if not ensure_flattening:
            return cr
        report = check_flattening(cr)
        if report.ok:
            return cr
        last_failure = FlatteningFailure(
            "collaring (%s, %d rounds) does not flatten: %s" % (mode, rounds, report.describe()),
            witness=report.witness)
    raise FlatteningFailure(
        "no collaring within 3 rounds yields a border-forcing substitution: %s" % last_failure,
        witness=getattr(last_failure, "witness", None))


def _collar_rounds(rule: SubstitutionRule, mode: str, rounds: int, budget: int) -> CollaredRule:
    current = rule
    forget = {label: label for label in rule.labels}
    tiles = None
    for _ in range(rounds):
        step = _collar_once(current, mode, budget)
        forget = {code: forget[step.forget[code]] for code in step.rule.labels}
        tiles = step.tiles
        current = step.rule
    return CollaredRule(current, rule, forget, tiles or {}, mode, rounds)


@dataclass(frozen=True)
class FlatteningReport:
    ok: bool
    witness: dict | None

    def describe(self) -> str:
        if self.ok:
            return "every cell star maps into a single sheet"
        w = self.witness
        return ("star of %s (side %s) maps to distinct sheets: %s -> %s vs %s -> %s"
                % (w["cell"], w["side"], w["germ_a"], w["image_a"], w["germ_b"], w["image_b"]))


def check_flattening(cr: CollaredRule, complex_=None) -> FlatteningReport:
    """Single-sheet condition for the substitution self-map of the complex.

    For every lower-dimensional cell class, germs approaching it from the
    same orthant must have identical image germs at every transverse
    position; two germs with different images are a two-extension witness
    against border forcing.
    """
    from .complexes import build_complex

    rule = cr.rule
    if complex_ is None:
        complex_ = build_complex(rule)
    d = rule.dimension

    by_class: dict[str, list] = {}
    for germ, cid in complex_.germ_class.items():
        by_class.setdefault(cid, []).append(germ)

    for cid in sorted(by_class):
        germs = by_class[cid]
        buckets: dict[tuple, list] = {}
        for label, pattern in germs:
            buckets.setdefault(pattern, []).append(label)
        for pattern, labels in sorted(buckets.items(), key=lambda kv: str(kv[0])):
            if len(labels) < 2:
                continue
            free = [axis for axis, v in enumerate(pattern) if v is None]
            shapes = {label: rule.images[label].shape for label in labels}
            base_shape = shapes[labels[0]]
            for tpos in itertools.product(*(range(base_shape[a]) for a in free)):
                images = {}
                for label in labels:
                    img = rule.images[label]
                    block = []
                    ti = 0
                    for axis, v in enumerate(pattern):
                        if v is None:
                            block.append(tpos[ti])
                            ti += 1
                        else:
                            block.append(img.shape[axis] - 1 if v == 1 else 0)
                    images[label] = img.get(tuple(block))
                distinct = sorted(set(images.values()))
                if len(distinct) > 1:
                    picks = sorted(images.items(), key=lambda kv: kv[1])
                    a, b = picks[0], picks[-1]
                    return FlatteningReport(False, {
                        "cell": cid,
                        "side": str(pattern),
                        "transverse": tpos,
                        "germ_a": a[0], "image_a": a[1],
                        "germ_b": b[0], "image_b": b[1],
                    })
    return FlatteningReport(True, None)
