"""Prenex polymorphism without bounds; subtyping is simulated by the
phantom parameters of ``T``.

Types are phantom types restricted to variables, arrows, ``T``, unit and
products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import PhantypesError
from .phantom import (T_CTOR, Arrow, Con, PhantomType, Product, Unit, Var, fv,
                      match_one_sided, show, substitute)
from .terms import (DEFAULT_FUEL, App, Const, EvalResult, Lam, Let, Prim, Term, TyApp, TyLam,
                    VarRef, evaluate, show_term, step, subst_types)


@dataclass(frozen=True)
class TScheme:
    vars: tuple[str, ...]
    body: PhantomType


TType = PhantomType


def show_ttype(t) -> str:
    if isinstance(t, TScheme):
        names = ", ".join(f"'{v}" for v in t.vars)
        return f"forall {names}. {show(t.body, 'formal')}"
    return show(t, "formal")


def show_target(e: Term) -> str:
    return show_term(e, lambda t: show(t, "formal"))


def alpha_equal(a, b) -> bool:
    """Equality up to a consistent renaming of the quantifier block,
    keeping quantifier order."""
    if isinstance(a, TScheme) != isinstance(b, TScheme):
        return False
    if not isinstance(a, TScheme):
        return a == b
    if len(a.vars) != len(b.vars) or len(set(a.vars)) != len(a.vars) or len(set(b.vars)) != len(b.vars):
        return False
    canon = [Var(f"#{i}") for i in range(len(a.vars))]
    return (substitute(a.body, dict(zip(a.vars, canon)))
            == substitute(b.body, dict(zip(b.vars, canon))))


class TargetTypeError(PhantypesError):
    pass


class TypeMismatch(TargetTypeError):
    pass


class UnboundVariable(TargetTypeError):
    pass


class IllFormedType(TargetTypeError):
    pass


class PrimNotCovered(TargetTypeError):
    def __init__(self, prim, instance):
        self.instance = instance
        super().__init__(f"{prim} has no declared type {show_ttype(instance)}")


class PrimNeedsAscription(TargetTypeError):
    def __init__(self, prim, candidates=()):
        self.candidates = tuple(candidates)
        extra = ""
        if self.candidates:
            extra = "; candidates: " + ", ".join(show_ttype(c) for c in self.candidates)
        super().__init__(f"{prim} needs a type ascription here{extra}")


def well_formed_t(delta, t: PhantomType) -> None:
    if isinstance(t, Var):
        if t.name not in delta:
            raise IllFormedType(f"type variable '{t.name} is not in scope")
    elif isinstance(t, Con):
        if t.ctor != T_CTOR:
            raise IllFormedType(f"constructor {t.ctor} is not available; only {T_CTOR} is")
        well_formed_t(delta, t.arg)
    elif isinstance(t, (Arrow, Product)):
        a, b = (t.dom, t.cod) if isinstance(t, Arrow) else (t.left, t.right)
        well_formed_t(delta, a)
        well_formed_t(delta, b)
    elif not isinstance(t, Unit):
        raise IllFormedType(f"not a target type: {t!r}")


def _is_t_type(t) -> bool:
    return isinstance(t, Con) and t.ctor == T_CTOR and not fv(t)


@dataclass(frozen=True)
class TargetInterpretation:
    constants: Mapping[str, PhantomType]
    ops: Mapping[str, tuple[Arrow, ...]]
    delta: Mapping[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self):
        for c, t in self.constants.items():
            well_formed_t((), t)
            if not _is_t_type(t):
                raise IllFormedType(f"constant {c} must have a closed type of the form T ty")
        for f, arrows in self.ops.items():
            for a in arrows:
                well_formed_t((), a)
                if not (isinstance(a, Arrow) and _is_t_type(a.dom) and _is_t_type(a.cod)):
                    raise IllFormedType(f"type of {f} must be T ty -> T ty")

    @property
    def constant_types(self) -> tuple[PhantomType, ...]:
        return tuple(dict.fromkeys(self.constants.values()))


@dataclass(frozen=True)
class TViolation:
    prim: str
    const: str
    expected: str
    actual: str | None

    def __str__(self):
        if self.actual is None:
            return f"{self.prim} {self.const} should give {self.expected} but is undefined"
        return f"{self.prim} {self.const} should give {self.expected}, gives {self.actual}"


def check_pi_f_sound_t(interp: TargetInterpretation) -> TViolation | None:
    for f, arrows in interp.ops.items():
        cods: dict[PhantomType, PhantomType] = {}
        for a in arrows:
            if cods.setdefault(a.dom, a.cod) != a.cod:
                return TViolation(f, f"<any {show_ttype(a.dom)}>", show_ttype(cods[a.dom]), show_ttype(a.cod))
        for c, t in interp.constants.items():
            if t not in cods:
                continue
            out = interp.delta.get((f, c))
            actual = None if out is None else interp.constants[out]
            if actual != cods[t]:
                return TViolation(f, c, show_ttype(cods[t]), None if actual is None else show_ttype(actual))
    return None


def check_prim_t(interp: TargetInterpretation, delta, f: str, ascription: PhantomType) -> None:
    well_formed_t(delta, ascription)
    if not isinstance(ascription, Arrow):
        raise TypeMismatch(f"ascription of {f} must be an arrow type")
    declared = set(interp.ops[f])
    for const_t in interp.constant_types:
        theta = match_one_sided(ascription.dom, const_t)
        if theta is None:
            continue
        inst = substitute(ascription, theta)
        if inst not in declared:
            raise PrimNotCovered(f, inst)


def infer_prim_t(interp: TargetInterpretation, f: str, arg: PhantomType) -> Arrow:
    matches = []
    for const_t in interp.constant_types:
        theta = match_one_sided(arg, const_t)
        if theta is not None:
            matches.append((const_t, dict(theta)))
    if not matches:
        raise PrimNeedsAscription(f)
    table: dict[PhantomType, set[PhantomType]] = {}
    for a in interp.ops[f]:
        table.setdefault(a.dom, set()).add(a.cod)
    common = set.intersection(*(table.get(t, set()) for t, _ in matches))
    candidates = sorted(common, key=show)
    if fv(arg) and all(t in table.get(t, set()) for t, _ in matches):
        candidates.append(arg)
    if len(candidates) != 1:
        raise PrimNeedsAscription(f, [Arrow(arg, c) for c in candidates])
    return Arrow(arg, candidates[0])


def _mono(t, what):
    if isinstance(t, TScheme):
        raise TypeMismatch(f"{what} is polymorphic; instantiate it with [...] first")
    return t


def _rename(e: TyLam, in_scope) -> TyLam:
    taken = set(in_scope) | set(e.vars)
    renaming = {}
    for v in e.vars:
        if v in in_scope:
            k = 1
            while f"{v}_{k}" in taken:
                k += 1
            renaming[v] = f"{v}_{k}"
            taken.add(renaming[v])
    body = subst_types(e.body, {v: Var(n) for v, n in renaming.items()})
    return TyLam(tuple(renaming.get(v, v) for v in e.vars), None, body)


def typecheck_t(interp: TargetInterpretation, term: Term, delta=(), gamma: Mapping | None = None):
    return _check(interp, frozenset(delta), dict(gamma or {}), term)


def _check(interp, delta, gamma, e):
    if isinstance(e, Const):
        if e.name not in interp.constants:
            raise UnboundVariable(f"unknown constant {e.name}")
        return interp.constants[e.name]
    if isinstance(e, VarRef):
        if e.name not in gamma:
            raise UnboundVariable(f"unbound variable {e.name}")
        return gamma[e.name]
    if isinstance(e, Prim):
        if e.name not in interp.ops:
            raise UnboundVariable(f"unknown primitive {e.name}")
        if e.ascription is not None:
            check_prim_t(interp, delta, e.name, e.ascription)
            return e.ascription
        if len(interp.ops[e.name]) == 1:
            return interp.ops[e.name][0]
        raise PrimNeedsAscription(e.name, interp.ops[e.name])
    if isinstance(e, Lam):
        well_formed_t(delta, e.annot)
        body = _check(interp, delta, {**gamma, e.var: e.annot}, e.body)
        return Arrow(e.annot, _mono(body, show_target(e.body)))
    if isinstance(e, App):
        arg = _mono(_check(interp, delta, gamma, e.arg), show_target(e.arg))
        if isinstance(e.fn, Prim) and e.fn.ascription is None and e.fn.name in interp.ops:
            fn = infer_prim_t(interp, e.fn.name, arg)
        else:
            fn = _mono(_check(interp, delta, gamma, e.fn), show_target(e.fn))
        if not isinstance(fn, Arrow):
            raise TypeMismatch(f"{show_target(e.fn)} has type {show_ttype(fn)}, not a function type")
        if fn.dom != arg:
            raise TypeMismatch(
                f"{show_target(e.fn)} expects {show_ttype(fn.dom)} but the argument has type {show_ttype(arg)}")
        return fn.cod
    if isinstance(e, TyApp):
        if not isinstance(e.poly, (VarRef, TyLam)):
            raise TypeMismatch("type application needs a variable or a type abstraction")
        scheme = _check(interp, delta, gamma, e.poly)
        if not isinstance(scheme, TScheme):
            raise TypeMismatch(f"{show_target(e.poly)} is not polymorphic")
        if len(e.args) != len(scheme.vars):
            raise TypeMismatch(f"{len(e.args)} type arguments for {len(scheme.vars)} quantified variables")
        for a in e.args:
            well_formed_t(delta, a)
        return substitute(scheme.body, dict(zip(scheme.vars, e.args)))
    if isinstance(e, Let):
        if not isinstance(e.bound, (VarRef, TyLam)):
            raise TypeMismatch("let binds a type abstraction or a variable bound to one")
        bound = _check(interp, delta, gamma, e.bound)
        if not isinstance(bound, TScheme):
            raise TypeMismatch(f"let-bound {e.var} must be polymorphic")
        return _mono(_check(interp, delta, {**gamma, e.var: bound}, e.body), show_target(e.body))
    if isinstance(e, TyLam):
        if len(set(e.vars)) != len(e.vars):
            raise IllFormedType("repeated type variable in one abstraction")
        if any(v in delta for v in e.vars):
            e = _rename(e, delta)
        body = _check(interp, delta | set(e.vars), gamma, e.body)
        return TScheme(e.vars, _mono(body, show_target(e.body)))
    raise TypeMismatch(f"not a target term: {e!r}")


def step_t(interp: TargetInterpretation, e: Term) -> Term | None:
    # The extra ``let x = E in e`` context has nothing to reduce: the bound
    # expression is a variable or a type abstraction.
    return step(e, interp.delta)


def eval_t(interp: TargetInterpretation, e: Term, fuel: int = DEFAULT_FUEL) -> EvalResult:
    return evaluate(e, interp.delta, fuel)
