"""Concrete/abstract phantom encodings of a hierarchy.

Abstract encodings are stored as templates whose variables are renamed
to fresh ones on every use, so two argument positions never share a
variable by accident.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

from .errors import PhantypesError
from .hierarchy import (Embedding, Hierarchy, chain_decomposition, downset_embedding,
                        max_antichain, width)
from .phantom import (T_CTOR, UNIT, Con, FreshSupply, PhantomType, Product, Unit, Var,
                      ctors, freshen, fv, match_one_sided, nest, tuple_items, tuple_of,
                      unify_general)

AUX = "z"
PER_SORT = "perSort"


class EncodingError(PhantypesError):
    pass


class NotATree(EncodingError):
    def __init__(self, sort, parents):
        self.sort = sort
        super().__init__(f"sort {sort} has {len(parents)} immediate supertypes ({', '.join(parents)}); tree scheme needs one")


class IndexOutOfRange(EncodingError):
    pass


class WidthLabelingFailed(EncodingError):
    def __init__(self, a, b, reason=""):
        self.witness = (a, b)
        super().__init__(f"width labeling wrong at ({a}, {b}){': ' + reason if reason else ''}")


class SchemeNotExtensible(EncodingError):
    pass


class SchemeConfigError(EncodingError):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "width"
    ctor_policy: str = T_CTOR  # "perSort", or the single constructor name to use
    embedding: Embedding | None = None
    labeling: "WidthLabeling | None" = None
    index: Mapping[str, frozenset[int]] | None = None

    @property
    def aux(self) -> str:
        return AUX if self.ctor_policy == PER_SORT else self.ctor_policy


@dataclass(frozen=True)
class EncodingPair:
    scheme: str
    conc_map: Mapping[str, PhantomType]
    abst_map: Mapping[str, PhantomType]  # templates; see abst()
    aux: str | None = None
    # tuple schemes: number of positions and, per sort, the positions it occupies
    positions: int = 0
    support: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def conc(self, sort: str) -> PhantomType:
        return self.conc_map[sort]

    def abst(self, sort: str, supply: FreshSupply | None = None) -> PhantomType:
        return freshen(self.abst_map[sort], supply or FreshSupply())

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(self.conc_map)

    @property
    def ground(self) -> bool:
        return all(not fv(t) for t in self.conc_map.values())

    def constructors(self, h: Hierarchy) -> tuple[str, ...]:
        """Constructor names in declaration order: sort-named ones in
        topological order, any others by name, the auxiliary last."""
        used = set()
        for t in self.conc_map.values():
            used |= ctors(t)
        ordered = [s for s in h.topological_order() if s in used and s != self.aux]
        rest = sorted(used - set(ordered) - {self.aux})
        tail = [self.aux] if self.aux in used else []
        return tuple(ordered + rest + tail)


def _template(t: PhantomType) -> PhantomType:
    """Replace every unit leaf by a distinct template variable."""
    counter = iter(range(1, 1 << 30))

    def walk(t):
        if isinstance(t, Unit):
            return Var(f"_{next(counter)}")
        if isinstance(t, Con):
            return Con(t.ctor, walk(t.arg))
        if isinstance(t, Product):
            left = walk(t.left)
            return Product(left, walk(t.right))
        return t

    return walk(t)


def _replace_units(t: PhantomType, with_: PhantomType) -> PhantomType:
    if isinstance(t, Unit):
        return with_
    if isinstance(t, Con):
        return Con(t.ctor, _replace_units(t.arg, with_))
    if isinstance(t, Product):
        return Product(_replace_units(t.left, with_), _replace_units(t.right, with_))
    return t


def _check_ctor_name(name: str) -> None:
    if not name or not (name[0].isalpha() or name[0] == "_") or name == "unit":
        raise SchemeConfigError(f"invalid constructor name {name!r}")


# -- tree -------------------------------------------------------------------

def encode_tree(h: Hierarchy, cfg: SchemeConfig = SchemeConfig("tree", PER_SORT)) -> EncodingPair:
    if cfg.ctor_policy != PER_SORT:
        raise SchemeConfigError("the tree scheme needs one constructor per sort (ctor policy perSort)")
    for s in h.sorts:
        _check_ctor_name(s)
        ps = h.parents(s)
        if s != h.top and len(ps) != 1:
            raise NotATree(s, ps)

    def path(s, t):
        while True:
            t = Con(s, t)
            if s == h.top:
                return t
            s = h.parents(s)[0]

    conc = {s: path(s, UNIT) for s in h.sorts}
    return EncodingPair("tree", conc, {s: _template(t) for s, t in conc.items()})


# -- finite powerset and embeddings -----------------------------------------

def _powerset_component(inside: bool, aux: str) -> PhantomType:
    return UNIT if inside else Con(aux, UNIT)


def encode_powerset(n: int, subset, cfg: SchemeConfig = SchemeConfig("powerset", PER_SORT),
                    supply: FreshSupply | None = None) -> tuple[PhantomType, PhantomType]:
    """Encode ``subset`` of {1..n} as an n-tuple; returns (conc, abst)."""
    if n < 1:
        raise IndexOutOfRange("ground set must have at least one element")
    subset = set(subset)
    bad = [i for i in subset if not isinstance(i, int) or not 1 <= i <= n]
    if bad:
        raise IndexOutOfRange(f"index {bad[0]} outside 1..{n}")
    conc = tuple_of([_powerset_component(i in subset, cfg.aux) for i in range(1, n + 1)])
    return conc, freshen(_template(conc), supply or FreshSupply())


def encode_embedded(h: Hierarchy, emb: Embedding, cfg: SchemeConfig | None = None) -> EncodingPair:
    cfg = cfg or SchemeConfig("embedded", PER_SORT)
    _check_ctor_name(cfg.aux)
    n = len(emb.ground_set)
    support = {s: frozenset(emb.position(x) for x in emb.map[s]) for s in h.sorts}
    conc = {s: tuple_of([_powerset_component(i in support[s], cfg.aux) for i in range(n)])
            for s in h.sorts}
    return EncodingPair("embedded", conc, {s: _template(t) for s, t in conc.items()},
                        aux=cfg.aux, positions=n, support=support)


def encode_downset(h: Hierarchy, cfg: SchemeConfig | None = None) -> EncodingPair:
    pair = encode_embedded(h, downset_embedding(h), cfg)
    return replace(pair, scheme="powerset")


# -- width ------------------------------------------------------------------

@dataclass(frozen=True)
class WidthLabeling:
    w: int
    l: Mapping[str, tuple[int, ...]]

    def verify(self, h: Hierarchy) -> None:
        for s in h.sorts:
            if s not in self.l:
                raise WidthLabelingFailed(s, s, "sort has no label")
            if len(self.l[s]) != self.w or any(v < 0 for v in self.l[s]):
                raise WidthLabelingFailed(s, s, "label is not a vector of w naturals")
        for a in h.sorts:
            for b in h.sorts:
                dominates = all(x >= y for x, y in zip(self.l[a], self.l[b]))
                if dominates != h.leq(a, b):
                    raise WidthLabelingFailed(a, b)


def midpoint_labeling(h: Hierarchy, antichain=None) -> WidthLabeling:
    """The midpoint construction over a maximum antichain.

    Raises WidthLabelingFailed when the result does not realize the order,
    which does happen for some posets (see width_labeling).
    """
    anti = tuple(antichain) if antichain is not None else max_antichain(h)
    w = len(anti)
    half, zero = Fraction(1, 2), Fraction(0)
    lab: dict[str, tuple[Fraction, ...]] = {h.top: (zero,) * w}
    for i, s in enumerate(anti):
        if s != h.top:
            lab[s] = tuple(zero if j == i else half for j in range(w))
    bottom = (Fraction(1),) * w
    for x in h.topological_order():
        if x in lab:
            continue
        below = [lab[y] for y in lab if y != x and h.leq(y, x)] or [bottom]
        above = [lab[y] for y in lab if y != x and h.leq(x, y)]
        lab[x] = tuple((min(v[i] for v in below) + max(v[i] for v in above)) / 2 for i in range(w))
    out = WidthLabeling(w, _rescale(lab, w))
    out.verify(h)
    return out


def _rescale(lab, w):
    ranks = []
    for i in range(w):
        values = sorted({v[i] for v in lab.values()})
        ranks.append({v: k for k, v in enumerate(values)})
    return {s: tuple(ranks[i][v[i]] for i in range(w)) for s, v in lab.items()}


def realizer_labeling(h: Hierarchy) -> WidthLabeling:
    """One linear extension per chain of a minimum chain cover.

    Each extension puts its chain as low as possible; the intersection of
    the extensions is the order, so ranks from the top realize it.
    """
    bottom_up = list(reversed(h.topological_order()))
    exts = []
    for chain in chain_decomposition(h):
        placed: list[str] = []
        seen = set()
        for c in chain + [h.top]:
            for y in bottom_up:
                if y not in seen and h.leq(y, c):
                    placed.append(y)
                    seen.add(y)
        exts.append(placed)
    n = len(h.sorts)
    lab = {s: tuple(Fraction(n - 1 - ext.index(s)) for ext in exts) for s in h.sorts}
    out = WidthLabeling(len(exts), _rescale(lab, len(exts)))
    out.verify(h)
    return out


def width_labeling(h: Hierarchy) -> WidthLabeling:
    """A labeling with width(h) coordinates such that x <= y iff l(x) >= l(y).

    The midpoint construction is tried first; when its post-check fails
    the chain-cover construction is used instead. Both are verified.
    """
    try:
        return midpoint_labeling(h)
    except WidthLabelingFailed:
        lab = realizer_labeling(h)
    if lab.w != width(h):
        raise WidthLabelingFailed(h.top, h.top, f"{lab.w} coordinates for width {width(h)}")
    return lab


def encode_width(h: Hierarchy, lab: WidthLabeling, cfg: SchemeConfig | None = None) -> EncodingPair:
    cfg = cfg or SchemeConfig("width", PER_SORT)
    _check_ctor_name(cfg.aux)
    conc = {s: tuple_of([nest(cfg.aux, UNIT, k) for k in lab.l[s]]) for s in h.sorts}
    return EncodingPair("width", conc, {s: _template(t) for s, t in conc.items()},
                        aux=cfg.aux, positions=lab.w)


# -- infinite powerset ------------------------------------------------------

_TAIL = "a"


def _infinite_pair(subset, aux) -> tuple[PhantomType, PhantomType]:
    n = max(subset, default=0)
    conc, abst = Var(_TAIL), UNIT
    for i in range(n, 0, -1):
        inside = i in subset
        conc = Product(_powerset_component(inside, aux), conc)
        abst = Product(Var(f"_{i}") if inside else Con(aux, Var(f"_{i}")), abst)
    return conc, abst


def encode_infinite_powerset(index: Mapping[str, frozenset[int]], sort: str,
                             cfg: SchemeConfig | None = None,
                             supply: FreshSupply | None = None) -> tuple[PhantomType, PhantomType]:
    """Right-nested encoding of a finite subset of the positive integers:
    the concrete side ends in a fresh tail variable, the abstract side in unit."""
    cfg = cfg or SchemeConfig("infinite", PER_SORT)
    subset = index[sort]
    if any(not isinstance(i, int) or i < 1 for i in subset):
        raise IndexOutOfRange(f"indices must be positive integers, got {sorted(subset)}")
    supply = supply or FreshSupply()
    conc, abst = _infinite_pair(subset, cfg.aux)
    return freshen(conc, supply), freshen(abst, supply)


def encode_infinite(h: Hierarchy, index: Mapping[str, frozenset[int]], cfg: SchemeConfig | None = None) -> EncodingPair:
    cfg = cfg or SchemeConfig("infinite", PER_SORT)
    conc, abst = {}, {}
    for s in h.sorts:
        if s not in index:
            raise SchemeConfigError(f"no index subset for sort {s}")
        if any(not isinstance(i, int) or i < 1 for i in index[s]):
            raise IndexOutOfRange(f"indices must be positive integers, got {sorted(index[s])}")
        conc[s], abst[s] = _infinite_pair(frozenset(index[s]), cfg.aux)
    return EncodingPair("infinite", conc, abst, aux=cfg.aux)


def encode(h: Hierarchy, cfg: SchemeConfig) -> EncodingPair:
    scheme = cfg.scheme
    if scheme == "tree":
        return encode_tree(h, cfg)
    if scheme == "powerset":
        return encode_downset(h, cfg)
    if scheme in ("embed", "embedded"):
        if cfg.embedding is None:
            raise SchemeConfigError("embedded scheme needs an embedding")
        return encode_embedded(h, cfg.embedding, cfg)
    if scheme == "width":
        lab = cfg.labeling or width_labeling(h)
        lab.verify(h)
        return encode_width(h, lab, cfg)
    if scheme == "infinite":
        if cfg.index is None:
            raise SchemeConfigError("infinite scheme needs an index assignment")
        return encode_infinite(h, cfg.index, cfg)
    raise SchemeConfigError(f"unknown scheme {scheme!r}")


# -- extension --------------------------------------------------------------

def _check_new_sort(h: Hierarchy, new: str, parent: str) -> None:
    h.check(parent)
    if new in h:
        raise SchemeNotExtensible(f"sort {new} already exists")


def extend_tree(pair: EncodingPair, h: Hierarchy, new: str, parent: str) -> tuple[EncodingPair, Hierarchy]:
    if pair.scheme != "tree":
        raise SchemeNotExtensible(f"extend_tree needs a tree encoding, got {pair.scheme}")
    _check_new_sort(h, new, parent)
    _check_ctor_name(new)
    if new in pair.constructors(h):
        raise SchemeNotExtensible(f"constructor {new} already in use")
    conc_new = _replace_units(pair.conc(parent), Con(new, UNIT))
    conc = {**pair.conc_map, new: conc_new}
    abst = {**pair.abst_map, new: _template(conc_new)}
    return replace(pair, conc_map=conc, abst_map=abst), h.with_sort(new, [parent])


def _graft_positions(pair, parent, component) -> PhantomType:
    """Tuple for a sort placed under ``parent``: ``component`` replaces the
    unit leaves in the parent's positions, everything else is ``unit aux``."""
    if not pair.support[parent]:
        raise SchemeNotExtensible(f"sort {parent} occupies no position, so nothing below it can be told apart")
    items = tuple_items(pair.conc(parent))
    out = []
    for i in range(pair.positions):
        if i in pair.support[parent]:
            out.append(_replace_units(items[i], component))
        else:
            out.append(Con(pair.aux, UNIT))
    return tuple_of(out)


def _retemplate(t: PhantomType) -> PhantomType:
    """Rename template variables apart, left to right, so that copies of
    one sub-encoding in several positions do not share variables."""
    counter = iter(range(1, 1 << 30))

    def walk(t):
        if isinstance(t, Var):
            return Var(f"_{next(counter)}")
        if isinstance(t, Con):
            return Con(t.ctor, walk(t.arg))
        if isinstance(t, Product):
            left = walk(t.left)
            return Product(left, walk(t.right))
        return t

    return walk(t)


def _check_tuple_scheme(pair):
    if pair.scheme not in ("powerset", "embedded"):
        raise SchemeNotExtensible(f"extension by position needs a powerset or embedded encoding, got {pair.scheme}")


def extend_powerset_sort(pair: EncodingPair, h: Hierarchy, new: str, parent: str,
                         ctor: str | None = None) -> tuple[EncodingPair, Hierarchy]:
    _check_tuple_scheme(pair)
    _check_new_sort(h, new, parent)
    ctor = ctor or new
    _check_ctor_name(ctor)
    if ctor == pair.aux or ctor in pair.constructors(h):
        raise SchemeNotExtensible(f"constructor {ctor} would collide with an existing one")
    conc_new = _graft_positions(pair, parent, Con(ctor, UNIT))
    return (replace(pair,
                    conc_map={**pair.conc_map, new: conc_new},
                    abst_map={**pair.abst_map, new: _template(conc_new)},
                    support={**pair.support, new: pair.support[parent]}),
            h.with_sort(new, [parent]))


def extend_subhierarchy(pair: EncodingPair, h: Hierarchy, parent: str, subh: Hierarchy,
                        sub_pair: EncodingPair) -> tuple[EncodingPair, Hierarchy]:
    _check_tuple_scheme(pair)
    h.check(parent)
    clash = set(subh.sorts) & set(h.sorts)
    if clash:
        raise SchemeNotExtensible(f"sort {sorted(clash)[0]} already exists")
    for s in subh.sorts:
        root = sub_pair.conc(s)
        if isinstance(root, (Unit, Var)) or (isinstance(root, Con) and root.ctor == pair.aux):
            raise SchemeNotExtensible(
                f"sub-encoding of {s} is indistinguishable from a plain position of the host encoding")
    conc, abst, support = dict(pair.conc_map), dict(pair.abst_map), dict(pair.support)
    for s in subh.sorts:
        conc[s] = _graft_positions(pair, parent, sub_pair.conc(s))
        abst[s] = _retemplate(_template(_graft_positions(pair, parent, sub_pair.abst_map[s])))
        support[s] = pair.support[parent]
    return replace(pair, conc_map=conc, abst_map=abst, support=support), h.graft(parent, subh)


# -- respectfulness ---------------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    sub: str
    sup: str
    direction: str  # "over-approximation" or "under-approximation"

    def __str__(self):
        if self.direction == "over-approximation":
            return f"conc({self.sub}) matches abst({self.sup}) but {self.sub} is not <= {self.sup}"
        return f"{self.sub} <= {self.sup} but conc({self.sub}) does not match abst({self.sup})"


def encodings_match(pair: EncodingPair, sub: str, sup: str, supply: FreshSupply | None = None) -> bool:
    supply = supply or FreshSupply()
    target = pair.conc(sub)
    pattern = pair.abst(sup, supply)
    if fv(target):
        return unify_general(freshen(target, supply, "r"), pattern) is not None
    return match_one_sided(pattern, target) is not None


def counterexamples(pair: EncodingPair, h: Hierarchy) -> list[Counterexample]:
    supply = FreshSupply()
    out = []
    for a in h.sorts:
        for b in h.sorts:
            matched = encodings_match(pair, a, b, supply)
            if matched != h.leq(a, b):
                out.append(Counterexample(a, b, "over-approximation" if matched else "under-approximation"))
    return out


def check_respectful(pair: EncodingPair, h: Hierarchy) -> Counterexample | None:
    """None when conc(a) matches abst(b) exactly for a <= b.

    Over-approximations break type safety, so the first one is reported in
    preference to an earlier under-approximation.
    """
    found = counterexamples(pair, h)
    over = [c for c in found if c.direction == "over-approximation"]
    return (over or found or [None])[0]
