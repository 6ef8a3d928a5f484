"""Finite subtyping hierarchies: order queries, width and embeddings."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import networkx as nx
from networkx.algorithms import bipartite

from .errors import PhantypesError

MAX_SORTS = 64


class HierarchyError(PhantypesError):
    pass


class UnknownSort(HierarchyError):
    def __init__(self, name):
        self.sort = name
        super().__init__(f"unknown sort {name!r}")


class DuplicateSort(HierarchyError):
    def __init__(self, name):
        self.sort = name
        super().__init__(f"sort {name!r} declared twice")


class CycleDetected(HierarchyError):
    def __init__(self, a, b):
        self.witness = (a, b)
        super().__init__(f"cycle: {a} and {b} are each below the other")


class NoTop(HierarchyError):
    def __init__(self, maximal):
        self.maximal = tuple(maximal)
        super().__init__(f"no unique top sort; maximal sorts are {', '.join(self.maximal)}")


class MissingJoin(HierarchyError):
    def __init__(self, a, b):
        self.witness = (a, b)
        super().__init__(f"sorts {a} and {b} have no least upper bound")


class InconsistentOrder(HierarchyError):
    def __init__(self, a, b):
        self.witness = (a, b)
        super().__init__(f"stored order disagrees with the edge closure at ({a}, {b})")


class TooManySorts(HierarchyError):
    def __init__(self, n):
        super().__init__(f"{n} sorts exceeds the limit of {MAX_SORTS}")


class NotAnEmbedding(HierarchyError):
    def __init__(self, a, b, direction):
        self.witness = (a, b)
        self.direction = direction
        super().__init__(f"not an order embedding at ({a}, {b}): {direction}")


def _closure(sorts, edges):
    up = {s: set() for s in sorts}
    for sub, sup in edges:
        up[sub].add(sup)
    order = set()
    for s in sorts:
        seen, todo = {s}, [s]
        while todo:
            for nxt in up[todo.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        order.update((s, t) for t in seen)
    return frozenset(order)


@dataclass(frozen=True)
class Hierarchy:
    """A finite poset of sorts.

    ``edges`` holds (sub, immediate super) pairs as declared; ``order`` is
    the reflexive-transitive closure, computed by :meth:`build`.
    """

    sorts: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    order: frozenset[tuple[str, str]] = field(repr=False)

    @classmethod
    def build(cls, sorts: Iterable[str], edges: Iterable[tuple[str, str]] = ()) -> "Hierarchy":
        sorts = tuple(sorts)
        edges = frozenset(edges)
        known = set(sorts)
        for sub, sup in edges:
            for s in (sub, sup):
                if s not in known:
                    raise UnknownSort(s)
        return cls(sorts, edges, _closure(sorts, edges))

    @classmethod
    def from_parents(cls, parents: Mapping[str, Iterable[str]]) -> "Hierarchy":
        """``{"atom": [], "int": ["atom"], ...}`` in declaration order."""
        return cls.build(parents, [(s, p) for s, ps in parents.items() for p in ps])

    def __contains__(self, name) -> bool:
        return name in self._index

    @cached_property
    def _index(self):
        return {s: i for i, s in enumerate(self.sorts)}

    def check(self, name: str) -> str:
        if name not in self._index:
            raise UnknownSort(name)
        return name

    def leq(self, a: str, b: str) -> bool:
        self.check(a)
        self.check(b)
        return (a, b) in self.order

    def parents(self, s: str) -> tuple[str, ...]:
        self.check(s)
        return tuple(sorted(p for sub, p in self.edges if sub == s))

    def upset(self, s: str) -> frozenset[str]:
        return frozenset(b for a, b in self.order if a == s)

    def downset(self, s: str) -> frozenset[str]:
        return frozenset(a for a, b in self.order if b == s)

    @cached_property
    def top(self) -> str:
        tops = [s for s in self.sorts if all((t, s) in self.order for t in self.sorts)]
        if len(tops) != 1:
            maximal = [s for s in self.sorts
                       if not any((s, t) in self.order and s != t for t in self.sorts)]
            raise NoTop(maximal)
        return tops[0]

    def is_tree(self) -> bool:
        return all(len(self.parents(s)) == (0 if s == self.top else 1) for s in self.sorts)

    def topological_order(self) -> tuple[str, ...]:
        """Supertypes before subtypes; ties broken by sort name."""
        pending = {s: len(self.parents(s)) for s in self.sorts}
        children: dict[str, list[str]] = {s: [] for s in self.sorts}
        for sub, sup in self.edges:
            children[sup].append(sub)
        ready = [s for s, n in pending.items() if n == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            s = heapq.heappop(ready)
            out.append(s)
            for c in children[s]:
                pending[c] -= 1
                if pending[c] == 0:
                    heapq.heappush(ready, c)
        if len(out) != len(self.sorts):
            a = next(s for s in self.sorts if s not in out)
            b = next(t for t in self.sorts if t != a and (a, t) in self.order and (t, a) in self.order)
            raise CycleDetected(a, b)
        return tuple(out)

    def comparable(self, a: str, b: str) -> bool:
        return (a, b) in self.order or (b, a) in self.order

    def join(self, a: str, b: str) -> str | None:
        common = self.upset(a) & self.upset(b)
        least = [u for u in common if all((u, v) in self.order for v in common)]
        return least[0] if least else None

    def with_sort(self, name: str, parents: Iterable[str]) -> "Hierarchy":
        if name in self:
            raise DuplicateSort(name)
        parents = tuple(parents)
        for p in parents:
            self.check(p)
        return Hierarchy.build(self.sorts + (name,), self.edges | {(name, p) for p in parents})

    def graft(self, parent: str, sub: "Hierarchy") -> "Hierarchy":
        """Place all of ``sub`` below ``parent``, its top attached by one edge."""
        self.check(parent)
        clash = set(self.sorts) & set(sub.sorts)
        if clash:
            raise DuplicateSort(sorted(clash)[0])
        return Hierarchy.build(self.sorts + sub.sorts,
                               self.edges | sub.edges | {(sub.top, parent)})


def validate(h: Hierarchy, *, require_joins: bool = True) -> None:
    """Raise the first violated hierarchy law, or return None.

    With ``require_joins=False`` only the poset-with-top laws are checked;
    every encoding scheme works at that generality.
    """
    if len(h.sorts) > MAX_SORTS:
        raise TooManySorts(len(h.sorts))
    seen = set()
    for s in h.sorts:
        if not s:
            raise HierarchyError("empty sort name")
        if s in seen:
            raise DuplicateSort(s)
        seen.add(s)
    for sub, sup in h.edges:
        h.check(sub)
        h.check(sup)
    fresh = _closure(h.sorts, h.edges)
    if fresh != h.order:
        a, b = min(fresh ^ h.order)
        raise InconsistentOrder(a, b)
    for a in h.sorts:
        for b in h.sorts:
            if a != b and (a, b) in h.order and (b, a) in h.order:
                raise CycleDetected(a, b)
    h.top  # raises NoTop
    if require_joins:
        for i, a in enumerate(h.sorts):
            for b in h.sorts[i + 1:]:
                if h.join(a, b) is None:
                    raise MissingJoin(a, b)


def _width_of(elements, below) -> int:
    """Dilworth: width = |P| - maximum matching in the strict-order graph."""
    elements = list(elements)
    if not elements:
        return 0
    g = nx.Graph()
    left = [("l", e) for e in elements]
    g.add_nodes_from(left)
    g.add_nodes_from(("r", e) for e in elements)
    for a in elements:
        for b in elements:
            if a != b and below(a, b):
                g.add_edge(("l", a), ("r", b))
    matching = bipartite.hopcroft_karp_matching(g, top_nodes=left)
    return len(elements) - len(matching) // 2


def _strict(h):
    return lambda a, b: (a, b) in h.order


def width(h: Hierarchy) -> int:
    return _width_of(h.sorts, _strict(h))


def max_antichain(h: Hierarchy) -> tuple[str, ...]:
    """The lexicographically least maximum antichain, names sorted."""
    w = width(h)
    chosen: list[str] = []
    for s in sorted(h.sorts):
        if any(h.comparable(s, c) for c in chosen):
            continue
        trial = chosen + [s]
        rest = [x for x in h.sorts if x not in trial and not any(h.comparable(x, c) for c in trial)]
        if len(trial) + _width_of(rest, _strict(h)) == w:
            chosen = trial
            if len(chosen) == w:
                break
    return tuple(chosen)


def chain_decomposition(h: Hierarchy) -> list[list[str]]:
    """A minimum cover of the sorts by chains, each listed bottom-up."""
    g = nx.Graph()
    left = [("l", s) for s in h.sorts]
    g.add_nodes_from(left)
    g.add_nodes_from(("r", s) for s in h.sorts)
    for a in h.sorts:
        for b in h.sorts:
            if a != b and (a, b) in h.order:
                g.add_edge(("l", a), ("r", b))
    matching = bipartite.hopcroft_karp_matching(g, top_nodes=left)
    succ = {a: matching[("l", a)][1] for a in h.sorts if ("l", a) in matching}
    has_pred = set(succ.values())
    chains = []
    for s in h.sorts:
        if s in has_pred:
            continue
        chain = [s]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        chains.append(chain)
    return chains


@dataclass(frozen=True)
class Embedding:
    """An order embedding of a hierarchy into the subsets of ``ground_set``."""

    ground_set: tuple
    map: Mapping[str, frozenset]

    def position(self, label) -> int:
        return self.ground_set.index(label)


def _check_embedding(h: Hierarchy, mapping) -> None:
    for a in h.sorts:
        for b in h.sorts:
            included = mapping[a] <= mapping[b]
            if h.leq(a, b) and not included:
                raise NotAnEmbedding(a, b, "order not preserved: a <= b but map(a) is not a subset of map(b)")
            if included and not h.leq(a, b):
                raise NotAnEmbedding(a, b, "order not reflected: map(a) is a subset of map(b) but a is not <= b")


def downset_embedding(h: Hierarchy) -> Embedding:
    mapping = {s: h.downset(s) for s in h.sorts}
    return Embedding(tuple(h.sorts), mapping)


def manual_embedding(h: Hierarchy, mapping: Mapping[str, Iterable], ground_set: Iterable | None = None) -> Embedding:
    for s in mapping:
        h.check(s)
    missing = [s for s in h.sorts if s not in mapping]
    if missing:
        raise HierarchyError(f"embedding does not map sort {missing[0]!r}")
    frozen = {s: frozenset(mapping[s]) for s in h.sorts}
    labels = set().union(*frozen.values())
    if ground_set is None:
        ground = tuple(sorted(labels, key=lambda x: (str(type(x)), x)))
    else:
        ground = tuple(ground_set)
        stray = labels - set(ground)
        if stray:
            raise HierarchyError(f"label {sorted(map(str, stray))[0]} not in the ground set")
    _check_embedding(h, frozen)
    return Embedding(ground, frozen)
