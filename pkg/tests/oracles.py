"""Brute-force reference implementations, written independently of the
package so that tests compare two computations rather than one."""
from __future__ import annotations

import itertools
import random

from phantypes.hierarchy import Hierarchy
from phantypes.phantom import Arrow, Con, Product, Unit, Var


def reflexive_transitive(sorts, edges) -> set[tuple[str, str]]:
    """All (a, b) with a <= b, by depth-first search from every sort."""
    up = {s: [] for s in sorts}
    for a, b in edges:
        up[a].append(b)
    out = set()
    for s in sorts:
        stack, seen = [s], {s}
        while stack:
            x = stack.pop()
            out.add((s, x))
            for y in up[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return out


def leq_table(h: Hierarchy) -> set[tuple[str, str]]:
    return reflexive_transitive(h.sorts, h.edges)


def brute_width(sorts, leq) -> int:
    sorts = list(sorts)
    for k in range(len(sorts), 0, -1):
        for combo in itertools.combinations(sorts, k):
            if all((a, b) not in leq and (b, a) not in leq for a, b in itertools.combinations(combo, 2)):
                return k
    return 0


def _tree(t):
    if isinstance(t, Var):
        return ("var", t.name)
    if isinstance(t, Unit):
        return ("unit",)
    if isinstance(t, Con):
        return ("con", t.ctor, _tree(t.arg))
    if isinstance(t, Product):
        return ("pair", _tree(t.left), _tree(t.right))
    if isinstance(t, Arrow):
        return ("arrow", _tree(t.dom), _tree(t.cod))
    raise TypeError(t)


def naive_match(pattern, target) -> dict | None:
    """Bindings making ``pattern`` equal to the ground ``target``, or None."""
    binding: dict = {}

    def go(p, t):
        if p[0] == "var":
            if p[1] in binding:
                return binding[p[1]] == t
            binding[p[1]] = t
            return True
        if p[0] != t[0]:
            return False
        if p[0] == "unit":
            return True
        if p[0] == "con":
            return p[1] == t[1] and go(p[2], t[2])
        return go(p[1], t[1]) and go(p[2], t[2])

    return binding if go(_tree(pattern), _tree(target)) else None


def respectful_mismatches(pair, h: Hierarchy) -> list[tuple[str, str]]:
    leq = leq_table(h)
    bad = []
    for sub in h.sorts:
        for sup in h.sorts:
            matched = naive_match(pair.abst(sup), pair.conc(sub)) is not None
            if matched != ((sub, sup) in leq):
                bad.append((sub, sup))
    return bad


def labeling_realizes(lab, h: Hierarchy) -> bool:
    leq = leq_table(h)
    for a in h.sorts:
        for b in h.sorts:
            dominated = all(x >= y for x, y in zip(lab.l[a], lab.l[b]))
            if dominated != ((a, b) in leq):
                return False
    return True


def random_poset(rng: random.Random, n: int) -> Hierarchy:
    """A random hierarchy on ``n`` sorts whose top is s0.

    Each later sort picks a nonempty set of earlier sorts as parents; the
    order is the reflexive-transitive closure, reduced by Hierarchy.build.
    """
    names = [f"s{i}" for i in range(n)]
    parents = {names[0]: []}
    for i in range(1, n):
        k = rng.randint(1, min(3, i))
        parents[names[i]] = rng.sample(names[:i], k)
    return Hierarchy.from_parents(parents)


def all_subset_pairs(n: int):
    ground = range(1, n + 1)
    subsets = [frozenset(c) for k in range(n + 1) for c in itertools.combinations(ground, k)]
    return [(a, b) for a in subsets for b in subsets]


def declarative_subtypes(sorts, leq, delta, universe) -> set:
    """Least relation over ``universe`` closed under the declarative rules:
    reflexivity, the sort order, variable bounds, result-covariant arrows
    and transitivity. Types are tuples: ("base", s), ("var", a), ("arrow", d, c)."""
    rel = {(t, t) for t in universe}
    rel |= {(("base", a), ("base", b)) for a, b in leq}
    rel |= {(("var", a), bound) for a, bound in delta.items()}
    rel = {p for p in rel if p[0] in universe and p[1] in universe}
    arrows = [t for t in universe if t[0] == "arrow"]
    changed = True
    while changed:
        changed = False
        new = set()
        for s in arrows:
            for t in arrows:
                if s[1] == t[1] and (s[2], t[2]) in rel:
                    new.add((s, t))
        by_left: dict = {}
        for a, b in rel:
            by_left.setdefault(a, set()).add(b)
        for a, b in rel:
            for c in by_left.get(b, ()):
                new.add((a, c))
        if not new <= rel:
            rel |= new
            changed = True
    return rel
