"""Phantom type terms: the language every encoding lives in.

Two surface styles are supported by the printer and the parser:

* ``ml``: postfix constructor application, ``((unit D) C) A``, ``'a1 * 'a2 z``
* ``formal``: prefix ``T`` and ``1`` for unit, ``T (T 1 * 1 * 1)``

Both parse back to the same terms; n-ary ``*`` is right-nested.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .lexer import TokenStream

T_CTOR = "T"


@dataclass(frozen=True)
class Var:
    name: str

    def subst(self, mapping):
        return mapping.get(self.name, self)


@dataclass(frozen=True)
class Arrow:
    dom: "PhantomType"
    cod: "PhantomType"

    def subst(self, mapping):
        return Arrow(self.dom.subst(mapping), self.cod.subst(mapping))


@dataclass(frozen=True)
class Con:
    ctor: str
    arg: "PhantomType"

    def subst(self, mapping):
        return Con(self.ctor, self.arg.subst(mapping))


@dataclass(frozen=True)
class Unit:
    def subst(self, mapping):
        return self


@dataclass(frozen=True)
class Product:
    left: "PhantomType"
    right: "PhantomType"

    def subst(self, mapping):
        return Product(self.left.subst(mapping), self.right.subst(mapping))


PhantomType = Union[Var, Arrow, Con, Unit, Product]
UNIT = Unit()


class Binding(NamedTuple):
    var: str
    ty: PhantomType


def tuple_of(items: Sequence[PhantomType]) -> PhantomType:
    """Right-nested product of one or more components."""
    if not items:
        raise ValueError("empty tuple")
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Product(item, out)
    return out


def tuple_items(t: PhantomType) -> list[PhantomType]:
    items = []
    while isinstance(t, Product):
        items.append(t.left)
        t = t.right
    items.append(t)
    return items


def nest(ctor: str, t: PhantomType, depth: int) -> PhantomType:
    for _ in range(depth):
        t = Con(ctor, t)
    return t


def fv(t: PhantomType) -> tuple[str, ...]:
    seen: dict[str, None] = {}

    def walk(t):
        if isinstance(t, Var):
            seen.setdefault(t.name)
        elif isinstance(t, Con):
            walk(t.arg)
        elif isinstance(t, (Arrow, Product)):
            a, b = (t.dom, t.cod) if isinstance(t, Arrow) else (t.left, t.right)
            walk(a)
            walk(b)

    walk(t)
    return tuple(seen)


def ctors(t: PhantomType) -> set[str]:
    if isinstance(t, Con):
        return {t.ctor} | ctors(t.arg)
    if isinstance(t, Arrow):
        return ctors(t.dom) | ctors(t.cod)
    if isinstance(t, Product):
        return ctors(t.left) | ctors(t.right)
    return set()


def _as_mapping(bindings) -> Mapping[str, PhantomType]:
    if isinstance(bindings, Mapping):
        return bindings
    mapping = {}
    for var, ty in bindings:
        if var in mapping:
            raise ValueError(f"variable {var} bound twice")
        mapping[var] = ty
    return mapping


def substitute(t: PhantomType, bindings: Iterable[Binding] | Mapping[str, PhantomType]) -> PhantomType:
    """Simultaneous substitution; there are no binders, so no capture."""
    mapping = _as_mapping(bindings)
    return t.subst(mapping) if mapping else t


def match_one_sided(pattern: PhantomType, target: PhantomType) -> tuple[Binding, ...] | None:
    """Bind pattern variables so the pattern becomes ``target``.

    Variables of ``target`` are rigid. Bindings come back in the
    depth-first left-to-right order of the pattern's variables, or None.
    """
    found: dict[str, PhantomType] = {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            prev = found.get(p.name)
            if prev is None:
                found[p.name] = t
            elif prev != t:
                return None
        elif isinstance(p, Unit):
            if not isinstance(t, Unit):
                return None
        elif isinstance(p, Con):
            if not isinstance(t, Con) or t.ctor != p.ctor:
                return None
            stack.append((p.arg, t.arg))
        elif isinstance(p, Product):
            if not isinstance(t, Product):
                return None
            stack.append((p.right, t.right))
            stack.append((p.left, t.left))
        elif isinstance(p, Arrow):
            if not isinstance(t, Arrow):
                return None
            stack.append((p.cod, t.cod))
            stack.append((p.dom, t.dom))
    return tuple(Binding(v, found[v]) for v in fv(pattern))


def occurs(name: str, t: PhantomType) -> bool:
    return name in fv(t)


def unify_general(t1: PhantomType, t2: PhantomType) -> dict[str, PhantomType] | None:
    """Most general unifier of two open types, or None.

    Eager composition: every new binding is pushed through the ones
    already found, so the result is idempotent.
    """
    subst: dict[str, PhantomType] = {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a, b = substitute(a, subst), substitute(b, subst)
        if a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if occurs(a.name, b):
                return None
            step = {a.name: b}
            subst = {k: substitute(v, step) for k, v in subst.items()}
            subst[a.name] = b
        elif isinstance(a, Con) and isinstance(b, Con) and a.ctor == b.ctor:
            stack.append((a.arg, b.arg))
        elif isinstance(a, Product) and isinstance(b, Product):
            stack.append((a.right, b.right))
            stack.append((a.left, b.left))
        elif isinstance(a, Arrow) and isinstance(b, Arrow):
            stack.append((a.cod, b.cod))
            stack.append((a.dom, b.dom))
        else:
            return None
    return subst


class FreshSupply:
    """Issues names ``<hint><n>`` never handed out before by this supply."""

    def __init__(self, reserved: Iterable[str] = ()):
        self._issued: set[str] = set(reserved)
        self._counters: dict[str, int] = {}

    def fresh(self, hint: str = "a") -> str:
        n = self._counters.get(hint, 0)
        while True:
            n += 1
            name = f"{hint}{n}"
            if name not in self._issued:
                break
        self._counters[hint] = n
        self._issued.add(name)
        return name

    def reserve(self, names: Iterable[str]) -> None:
        self._issued.update(names)


def freshen(template: PhantomType, supply: FreshSupply, hint: str = "a") -> PhantomType:
    """Rename every variable of ``template`` to a fresh one, in fv order."""
    names = fv(template)
    if not names:
        return template
    return substitute(template, {v: Var(supply.fresh(hint)) for v in names})


# -- printing ---------------------------------------------------------------

def show(t: PhantomType, style: str = "ml") -> str:
    if style not in ("ml", "formal"):
        raise ValueError(f"unknown style {style}")
    return _show(t, style)


def _show(t, style):
    if isinstance(t, Arrow):
        dom = _show(t.dom, style)
        if isinstance(t.dom, Arrow):
            dom = f"({dom})"
        return f"{dom} -> {_show(t.cod, style)}"
    if isinstance(t, Product):
        left = _show(t.left, style)
        if isinstance(t.left, (Product, Arrow)):
            left = f"({left})"
        right = _show(t.right, style)
        if isinstance(t.right, Arrow):
            right = f"({right})"
        return f"{left} * {right}"
    return _show_app(t, style)


def _show_app(t, style):
    if isinstance(t, Unit):
        return "1" if style == "formal" else "unit"
    if isinstance(t, Var):
        return f"'{t.name}"
    if isinstance(t, Con):
        inner = _show(t.arg, style)
        if not isinstance(t.arg, (Unit, Var)):
            inner = f"({inner})"
        if style == "formal" and t.ctor == T_CTOR:
            return f"T {inner}"
        return f"{inner} {t.ctor}"
    raise TypeError(f"not a phantom type: {t!r}")


# -- parsing ----------------------------------------------------------------

def parse_type(text: str) -> PhantomType:
    stream = TokenStream(text)
    t = read_type(stream)
    if not stream.at_end():
        stream.fail("end of type")
    return t


def read_type(s: TokenStream, var_names: Mapping[str, str] | None = None) -> PhantomType:
    """Read one phantom type. ``var_names`` lets bare identifiers stand
    for type variables (used by the term parser under ``/\\a.``)."""
    left = _read_product(s, var_names)
    if s.accept("->"):
        return Arrow(left, read_type(s, var_names))
    return left


def _read_product(s, var_names):
    left = _read_postfix(s, var_names)
    if s.accept("*"):
        return Product(left, _read_product(s, var_names))
    return left


def _read_postfix(s, var_names):
    t = _read_atom(s, var_names)
    while s.peek().kind == "ident" and s.peek().text != "unit" and not (
        var_names and s.peek().text in var_names
    ):
        t = Con(s.next().text, t)
    return t


def _read_atom(s, var_names):
    tok = s.peek()
    if tok.kind == "ident" and tok.text == "unit":
        s.next()
        return UNIT
    if tok.kind == "number" and tok.text == "1":
        s.next()
        return UNIT
    if tok.kind == "tyvar":
        s.next()
        return Var(tok.text[1:])
    if tok.kind == "ident" and var_names and tok.text in var_names:
        s.next()
        return Var(var_names[tok.text])
    if tok.kind == "ident" and tok.text == T_CTOR:
        s.next()
        return Con(T_CTOR, _read_atom(s, var_names))
    if s.accept("("):
        t = read_type(s, var_names)
        s.expect(")")
        return t
    s.fail("a phantom type")
