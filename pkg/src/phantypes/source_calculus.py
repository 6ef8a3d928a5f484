"""Bounded prenex polymorphism over a subtyping hierarchy of base sorts.

There is no subsumption: a value of a subtype is passed where a supertype
is expected only through explicit type application ``p[tau]``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Union

from .errors import PhantypesError
from .hierarchy import Hierarchy
from .terms import (DEFAULT_FUEL, App, Const, EvalResult, Lam, Let, Prim, Term, TyApp, TyLam,
                    VarRef, evaluate, show_term, step, subst_types)


@dataclass(frozen=True)
class SBase:
    name: str

    def subst(self, mapping):
        return self


@dataclass(frozen=True)
class SVar:
    name: str

    def subst(self, mapping):
        return mapping.get(self.name, self)


@dataclass(frozen=True)
class SArrow:
    dom: "SType"
    cod: "SType"

    def subst(self, mapping):
        return SArrow(self.dom.subst(mapping), self.cod.subst(mapping))


SType = Union[SBase, SVar, SArrow]


@dataclass(frozen=True)
class SScheme:
    bounds: tuple[tuple[str, SType], ...]
    body: SType

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.bounds)


def free_vars(t: SType) -> tuple[str, ...]:
    if isinstance(t, SVar):
        return (t.name,)
    if isinstance(t, SArrow):
        out = list(free_vars(t.dom))
        out += [v for v in free_vars(t.cod) if v not in out]
        return tuple(out)
    return ()


def show_stype(t) -> str:
    if isinstance(t, SScheme):
        bounds = ", ".join(f"{v}<:{show_stype(b)}" for v, b in t.bounds)
        return f"forall {bounds}. {show_stype(t.body)}"
    if isinstance(t, SBase):
        return t.name
    if isinstance(t, SVar):
        return t.name
    dom = show_stype(t.dom)
    if isinstance(t.dom, SArrow):
        dom = f"({dom})"
    return f"{dom} -> {show_stype(t.cod)}"


def show_source(e: Term) -> str:
    return show_term(e, show_stype)


# -- errors -----------------------------------------------------------------

class SourceTypeError(PhantypesError):
    pass


class TypeMismatch(SourceTypeError):
    pass


class UnboundVariable(SourceTypeError):
    pass


class IllFormedType(SourceTypeError):
    pass


class NotPolymorphic(SourceTypeError):
    pass


class PrimAmbiguous(SourceTypeError):
    def __init__(self, prim, candidates):
        self.candidates = tuple(candidates)
        shown = ", ".join(show_stype(c) for c in self.candidates)
        super().__init__(f"{prim} needs an ascription; candidate types: {shown}")


class PrimNotCovered(SourceTypeError):
    def __init__(self, prim, missing):
        self.missing = missing
        text = show_stype(missing) if not isinstance(missing, str) else missing
        super().__init__(f"{prim} has no type {text} among its declared types")


class BoundViolation(SourceTypeError):
    def __init__(self, arg, bound):
        self.arg, self.bound = arg, bound
        super().__init__(f"type argument {show_stype(arg)} is not a subtype of its bound {show_stype(bound)}")


# -- interpretations --------------------------------------------------------

@dataclass(frozen=True)
class Interpretation:
    """Constant sorts, primitive types, and the primitive semantics table."""

    hierarchy: Hierarchy
    constants: Mapping[str, str]
    ops: Mapping[str, tuple[tuple[str, str], ...]]
    delta: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        for s in self.constants.values():
            self.hierarchy.check(s)
        for arrows in self.ops.values():
            for dom, cod in arrows:
                self.hierarchy.check(dom)
                self.hierarchy.check(cod)
        for (f, c), out in self.delta.items():
            if f not in self.ops:
                raise UnboundVariable(f"delta entry for unknown primitive {f}")
            for name in (c, out):
                if name not in self.constants:
                    raise UnboundVariable(f"delta entry for {f} mentions unknown constant {name}")

    def op_types(self, f: str) -> tuple[SArrow, ...]:
        return tuple(SArrow(SBase(d), SBase(c)) for d, c in self.ops[f])


@dataclass(frozen=True)
class Violation:
    prim: str
    const: str
    expected: str
    actual: str | None

    def __str__(self):
        if self.actual is None:
            return f"{self.prim} {self.const} should give a {self.expected} but is undefined"
        return f"{self.prim} {self.const} should give a {self.expected}, gives a {self.actual}"


def check_pi_f_sound(interp: Interpretation) -> Violation | None:
    for f, arrows in interp.ops.items():
        cods: dict[str, str] = {}
        for dom, cod in arrows:
            if cods.setdefault(dom, cod) != cod:
                return Violation(f, f"<any {dom}>", cods[dom], cod)
        for c, sort in interp.constants.items():
            if sort not in cods:
                continue
            out = interp.delta.get((f, c))
            actual = None if out is None else interp.constants[out]
            if actual != cods[sort]:
                return Violation(f, c, cods[sort], actual)
    return None


# -- subtyping --------------------------------------------------------------

Ctx = Mapping[str, SType]


def well_formed(h: Hierarchy, delta: Ctx, t: SType) -> None:
    if isinstance(t, SBase):
        if t.name not in h:
            raise IllFormedType(f"unknown sort {t.name}")
    elif isinstance(t, SVar):
        if t.name not in delta:
            raise IllFormedType(f"type variable {t.name} is not in scope")
    elif isinstance(t, SArrow):
        well_formed(h, delta, t.dom)
        well_formed(h, delta, t.cod)
    else:
        raise IllFormedType(f"not a source type: {t!r}")


def _sub(h, delta, a, b):
    if a == b:
        return True
    if isinstance(a, SVar):
        return _sub(h, delta, delta[a.name], b)
    if isinstance(a, SBase) and isinstance(b, SBase):
        return h.leq(a.name, b.name)
    if isinstance(a, SArrow) and isinstance(b, SArrow):
        return a.dom == b.dom and _sub(h, delta, a.cod, b.cod)
    return False


def subtype(h: Hierarchy, delta: Ctx, t1: SType, t2: SType) -> bool:
    well_formed(h, delta, t1)
    well_formed(h, delta, t2)
    return _sub(h, delta, t1, t2)


# -- typing -----------------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    """A typing judgment for ``term`` with the premises that justify it."""

    term: Term
    type: SType | SScheme
    premises: tuple["Derivation", ...] = ()


def _mono(d: Derivation) -> SType:
    if isinstance(d.type, SScheme):
        raise TypeMismatch(f"{show_source(d.term)} is polymorphic; instantiate it with [...] first")
    return d.type


def _prim_instances(interp, delta, f, ascription):
    """Yield the instance of ``ascription`` for every admissible choice of
    base sorts below the bounds of its domain's variables."""
    h = interp.hierarchy
    names = free_vars(ascription.dom)
    choices = []
    for a in names:
        bound = delta[a]
        if not isinstance(bound, SBase):
            raise PrimNotCovered(f, f"an instance at the non-base bound {show_stype(bound)}")
        choices.append([s for s in h.sorts if h.leq(s, bound.name)])
    for combo in itertools.product(*choices):
        yield ascription.subst({a: SBase(s) for a, s in zip(names, combo)})


def check_prim(interp: Interpretation, delta: Ctx, f: str, ascription: SType) -> None:
    well_formed(interp.hierarchy, delta, ascription)
    if not isinstance(ascription, SArrow):
        raise TypeMismatch(f"ascription of {f} must be an arrow type")
    declared = set(interp.op_types(f))
    for inst in _prim_instances(interp, delta, f, ascription):
        if inst not in declared:
            raise PrimNotCovered(f, inst)


def infer_prim(interp: Interpretation, delta: Ctx, f: str, arg: SType) -> SArrow:
    """The unique arrow type for ``f`` applied to an argument of type ``arg``."""
    h = interp.hierarchy
    table: dict[str, set[str]] = {}
    for dom, cod in interp.ops[f]:
        table.setdefault(dom, set()).add(cod)
    unknown = SVar("?")
    if isinstance(arg, SBase):
        instances = [arg.name]
    elif isinstance(arg, SVar) and isinstance(delta[arg.name], SBase):
        instances = [s for s in h.sorts if h.leq(s, delta[arg.name].name)]
    else:
        raise PrimNotCovered(f, SArrow(arg, unknown))
    for s in instances:
        if s not in table:
            raise PrimNotCovered(f, SArrow(SBase(s), unknown))
    common = set.intersection(*(table[s] for s in instances))
    candidates: list[SType] = [SBase(c) for c in sorted(common)]
    if isinstance(arg, SVar) and all(s in table[s] for s in instances):
        candidates.append(arg)
    if not candidates:
        raise PrimNotCovered(f, SArrow(arg, unknown))
    if len(candidates) > 1:
        raise PrimAmbiguous(f, [SArrow(arg, c) for c in candidates])
    return SArrow(arg, candidates[0])


def _rename_tylam(e: TyLam, in_scope) -> TyLam:
    """Alpha-rename the abstraction's variables that clash with ``in_scope``."""
    taken = set(in_scope) | set(e.vars)
    renaming = {}
    for v in e.vars:
        if v in in_scope:
            k = 1
            while f"{v}_{k}" in taken:
                k += 1
            renaming[v] = f"{v}_{k}"
            taken.add(renaming[v])
    body = subst_types(e.body, {v: SVar(n) for v, n in renaming.items()})
    return TyLam(tuple(renaming.get(v, v) for v in e.vars), e.bounds, body)


class _Checker:
    def __init__(self, interp: Interpretation):
        self.interp = interp
        self.h = interp.hierarchy

    def derive(self, delta: Ctx, gamma: Mapping, e: Term) -> Derivation:
        if isinstance(e, Const):
            if e.name not in self.interp.constants:
                raise UnboundVariable(f"unknown constant {e.name}")
            return Derivation(e, SBase(self.interp.constants[e.name]))
        if isinstance(e, VarRef):
            if e.name not in gamma:
                raise UnboundVariable(f"unbound variable {e.name}")
            return Derivation(e, gamma[e.name])
        if isinstance(e, Prim):
            if e.name not in self.interp.ops:
                raise UnboundVariable(f"unknown primitive {e.name}")
            if e.ascription is not None:
                check_prim(self.interp, delta, e.name, e.ascription)
                return Derivation(e, e.ascription)
            types = self.interp.op_types(e.name)
            if len(types) == 1:
                return Derivation(e, types[0])
            raise PrimAmbiguous(e.name, types)
        if isinstance(e, Lam):
            well_formed(self.h, delta, e.annot)
            body = self.derive(delta, {**gamma, e.var: e.annot}, e.body)
            return Derivation(e, SArrow(e.annot, _mono(body)), (body,))
        if isinstance(e, App):
            arg = self.derive(delta, gamma, e.arg)
            arg_t = _mono(arg)
            if isinstance(e.fn, Prim) and e.fn.ascription is None and e.fn.name in self.interp.ops:
                fn = Derivation(e.fn, infer_prim(self.interp, delta, e.fn.name, arg_t))
            else:
                fn = self.derive(delta, gamma, e.fn)
            fn_t = _mono(fn)
            if not isinstance(fn_t, SArrow):
                raise TypeMismatch(f"{show_source(e.fn)} has type {show_stype(fn_t)}, not a function type")
            if fn_t.dom != arg_t:
                raise TypeMismatch(
                    f"{show_source(e.fn)} expects {show_stype(fn_t.dom)} but the argument has type {show_stype(arg_t)}")
            return Derivation(e, fn_t.cod, (fn, arg))
        if isinstance(e, TyApp):
            if not isinstance(e.poly, (VarRef, TyLam)):
                raise TypeMismatch("type application needs a variable or a type abstraction")
            poly = self.derive(delta, gamma, e.poly)
            scheme = poly.type
            if not isinstance(scheme, SScheme):
                raise NotPolymorphic(f"{show_source(e.poly)} has monomorphic type {show_stype(scheme)}")
            if len(e.args) != len(scheme.bounds):
                raise TypeMismatch(f"{len(e.args)} type arguments for {len(scheme.bounds)} quantified variables")
            for arg, (_, bound) in zip(e.args, scheme.bounds):
                well_formed(self.h, delta, arg)
                if not _sub(self.h, delta, arg, bound):
                    raise BoundViolation(arg, bound)
            body = scheme.body.subst(dict(zip(scheme.vars, e.args)))
            return Derivation(e, body, (poly,))
        if isinstance(e, Let):
            if not isinstance(e.bound, (VarRef, TyLam)):
                raise TypeMismatch("let binds a type abstraction or a variable bound to one")
            bound = self.derive(delta, gamma, e.bound)
            if not isinstance(bound.type, SScheme):
                raise NotPolymorphic(f"let-bound {e.var} must be polymorphic")
            body = self.derive(delta, {**gamma, e.var: bound.type}, e.body)
            return Derivation(e, _mono(body), (bound, body))
        if isinstance(e, TyLam):
            if e.bounds is None or len(e.bounds) != len(e.vars):
                raise IllFormedType("type abstraction without bounds")
            if len(set(e.vars)) != len(e.vars):
                raise IllFormedType("repeated type variable in one abstraction")
            for b in e.bounds:
                well_formed(self.h, {}, b)
            if any(v in delta for v in e.vars):
                e = _rename_tylam(e, delta)
            inner = {**delta, **dict(zip(e.vars, e.bounds))}
            body = self.derive(inner, gamma, e.body)
            return Derivation(e, SScheme(tuple(zip(e.vars, e.bounds)), _mono(body)), (body,))
        raise TypeMismatch(f"not a source term: {e!r}")


def derive(interp: Interpretation, term: Term, delta: Ctx | None = None, gamma: Mapping | None = None) -> Derivation:
    return _Checker(interp).derive(dict(delta or {}), dict(gamma or {}), term)


def typecheck(interp: Interpretation, term: Term, delta: Ctx | None = None,
              gamma: Mapping | None = None) -> SType | SScheme:
    return derive(interp, term, delta, gamma).type


def bounds(p: Term, gamma: Mapping | None = None) -> tuple[tuple[str, SType], ...]:
    if isinstance(p, TyLam) and p.bounds is not None:
        return tuple(zip(p.vars, p.bounds))
    if isinstance(p, VarRef) and isinstance((gamma or {}).get(p.name), SScheme):
        return gamma[p.name].bounds
    raise NotPolymorphic(f"{show_source(p)} is not a type abstraction")


# -- evaluation -------------------------------------------------------------

def step_source(interp: Interpretation, e: Term) -> Term | None:
    return step(e, interp.delta)


def eval_source(interp: Interpretation, e: Term, fuel: int = DEFAULT_FUEL) -> EvalResult:
    return evaluate(e, interp.delta, fuel)
