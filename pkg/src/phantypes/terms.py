"""Term syntax and reduction shared by the source and target calculi.

The two calculi differ only in their type annotations, so terms here
treat annotations as opaque values with a ``subst(mapping)`` method.
Type abstractions carry ``bounds`` in the source calculus and ``None``
in the target calculus.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Union


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Prim:
    name: str
    ascription: Any = None


@dataclass(frozen=True)
class Lam:
    var: str
    annot: Any
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class TyApp:
    poly: "Term"
    args: tuple


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class TyLam:
    vars: tuple[str, ...]
    bounds: tuple | None
    body: "Term"


Term = Union[Const, Prim, Lam, App, VarRef, TyApp, Let, TyLam]


def is_value(e: Term) -> bool:
    return isinstance(e, (Const, Prim, Lam))


def subst_term(e: Term, x: str, v: Term) -> Term:
    """e{v/x}. ``v`` is closed at run time, so no capture can occur."""
    if isinstance(e, VarRef):
        return v if e.name == x else e
    if isinstance(e, Lam):
        return e if e.var == x else Lam(e.var, e.annot, subst_term(e.body, x, v))
    if isinstance(e, App):
        return App(subst_term(e.fn, x, v), subst_term(e.arg, x, v))
    if isinstance(e, TyApp):
        return TyApp(subst_term(e.poly, x, v), e.args)
    if isinstance(e, Let):
        body = e.body if e.var == x else subst_term(e.body, x, v)
        return Let(e.var, subst_term(e.bound, x, v), body)
    if isinstance(e, TyLam):
        return TyLam(e.vars, e.bounds, subst_term(e.body, x, v))
    return e


def _sub(t, mapping):
    return None if t is None else t.subst(mapping)


def subst_types(e: Term, mapping: Mapping[str, Any]) -> Term:
    """e{tau/alpha} over every annotation, ascription and type argument."""
    if not mapping:
        return e
    if isinstance(e, Prim):
        return Prim(e.name, _sub(e.ascription, mapping))
    if isinstance(e, Lam):
        return Lam(e.var, _sub(e.annot, mapping), subst_types(e.body, mapping))
    if isinstance(e, App):
        return App(subst_types(e.fn, mapping), subst_types(e.arg, mapping))
    if isinstance(e, TyApp):
        return TyApp(subst_types(e.poly, mapping), tuple(a.subst(mapping) for a in e.args))
    if isinstance(e, Let):
        return Let(e.var, subst_types(e.bound, mapping), subst_types(e.body, mapping))
    if isinstance(e, TyLam):
        inner = {k: v for k, v in mapping.items() if k not in e.vars}
        return TyLam(e.vars, e.bounds, subst_types(e.body, inner))
    return e


Delta = Mapping[tuple[str, str], str]


def step(e: Term, delta: Delta) -> Term | None:
    """One leftmost reduction, or None if ``e`` is a value or stuck.

    Contexts are ``E e``, ``v E`` and ``E [taus]``; a ``let`` reduces as
    soon as it is reached, which makes a ``let`` context unnecessary.
    """
    if isinstance(e, App):
        if not is_value(e.fn):
            fn = step(e.fn, delta)
            return None if fn is None else App(fn, e.arg)
        if not is_value(e.arg):
            arg = step(e.arg, delta)
            return None if arg is None else App(e.fn, arg)
        if isinstance(e.fn, Lam):
            return subst_term(e.fn.body, e.fn.var, e.arg)
        if isinstance(e.fn, Prim) and isinstance(e.arg, Const):
            out = delta.get((e.fn.name, e.arg.name))
            return None if out is None else Const(out)
        return None
    if isinstance(e, TyApp):
        if isinstance(e.poly, TyLam) and len(e.poly.vars) == len(e.args):
            return subst_types(e.poly.body, dict(zip(e.poly.vars, e.args)))
        return None
    if isinstance(e, Let):
        return subst_term(e.body, e.var, e.bound)
    return None


@dataclass(frozen=True)
class EvalResult:
    status: str  # "value", "stuck" or "fuel-exhausted"
    term: Term
    steps: int


DEFAULT_FUEL = 10_000


def evaluate(e: Term, delta: Delta, fuel: int = DEFAULT_FUEL,
             on_step: Callable[[Term], None] | None = None) -> EvalResult:
    for n in range(fuel + 1):
        if is_value(e):
            return EvalResult("value", e, n)
        if n == fuel:
            break
        nxt = step(e, delta)
        if nxt is None:
            return EvalResult("stuck", e, n)
        e = nxt
        if on_step is not None:
            on_step(e)
    return EvalResult("fuel-exhausted", e, fuel)


def erase(e: Term) -> Term:
    """Drop every type: abstractions and applications over types vanish."""
    if isinstance(e, Prim):
        return Prim(e.name)
    if isinstance(e, Lam):
        return Lam(e.var, None, erase(e.body))
    if isinstance(e, App):
        return App(erase(e.fn), erase(e.arg))
    if isinstance(e, TyApp):
        return erase(e.poly)
    if isinstance(e, Let):
        return Let(e.var, erase(e.bound), erase(e.body))
    if isinstance(e, TyLam):
        return erase(e.body)
    return e


def size(e: Term) -> int:
    if isinstance(e, (Lam, TyLam)):
        return 1 + size(e.body)
    if isinstance(e, App):
        return 1 + size(e.fn) + size(e.arg)
    if isinstance(e, TyApp):
        return 1 + size(e.poly)
    if isinstance(e, Let):
        return 1 + size(e.bound) + size(e.body)
    return 1


# -- printing ---------------------------------------------------------------

def show_term(e: Term, show_type: Callable[[Any], str], show_var: Callable[[str], str] = str) -> str:
    def go(e):
        if isinstance(e, Const):
            return e.name
        if isinstance(e, VarRef):
            return e.name
        if isinstance(e, Prim):
            if e.ascription is None:
                return e.name
            return f"(prim {e.name} : {show_type(e.ascription)})"
        if isinstance(e, Lam):
            if e.annot is None:
                return f"\\{e.var}. {go(e.body)}"
            return f"\\{e.var}:{show_type(e.annot)}. {go(e.body)}"
        if isinstance(e, Let):
            return f"let {e.var} = {go(e.bound)} in {go(e.body)}"
        if isinstance(e, TyLam):
            if e.bounds is None:
                params = ", ".join(show_var(v) for v in e.vars)
            else:
                params = ", ".join(f"{show_var(v)}<:{show_type(b)}" for v, b in zip(e.vars, e.bounds))
            return f"/\\{params}. {go(e.body)}"
        if isinstance(e, TyApp):
            return f"{atom(e.poly)}[{', '.join(show_type(a) for a in e.args)}]"
        if isinstance(e, App):
            fn = go(e.fn) if isinstance(e.fn, (App, TyApp, Const, VarRef, Prim)) else f"({go(e.fn)})"
            return f"{fn} {atom(e.arg)}"
        raise TypeError(f"not a term: {e!r}")

    def atom(e):
        text = go(e)
        return text if isinstance(e, (Const, VarRef, Prim, TyApp)) else f"({text})"

    return go(e)
