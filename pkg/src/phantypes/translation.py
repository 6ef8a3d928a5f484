"""Type-preserving translation from the bounded source calculus to the
phantom-typed target calculus, driven by typing derivations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .encodings import EncodingPair
from .errors import PhantypesError
from .phantom import T_CTOR, Arrow, Con, FreshSupply, PhantomType, ctors, fv, match_one_sided
from .source_calculus import (Derivation, Interpretation, SArrow, SBase, SScheme, SType, SVar,
                              bounds, derive, show_stype)
from .target_calculus import (TargetInterpretation, TargetTypeError, TScheme, alpha_equal,
                              show_ttype, typecheck_t)
from .terms import App, Const, Lam, Let, Prim, Term, TyApp, TyLam, VarRef

__all__ = [
    "TranslationError", "UnboundTypeVar", "AppliedToVariable", "NonGroundConcrete",
    "NotExpressible", "UnificationFailed", "check_expressible", "trans_type",
    "trans_abstract", "trans_concrete", "trans_interp", "trans_expr", "bounds",
    "translate", "verify_preservation", "PreservationReport",
]


class TranslationError(PhantypesError):
    pass


class UnboundTypeVar(TranslationError):
    pass


class AppliedToVariable(TranslationError):
    pass


class NonGroundConcrete(TranslationError):
    pass


class NotExpressible(TranslationError):
    pass


class UnificationFailed(TranslationError):
    pass


Env = Mapping[str, PhantomType]


def check_expressible(pair: EncodingPair) -> None:
    if not pair.ground:
        raise NonGroundConcrete(f"the {pair.scheme} scheme has open concrete encodings")
    for sort, t in pair.conc_map.items():
        extra = ctors(t) - {T_CTOR}
        if extra:
            raise NotExpressible(
                f"encoding of {sort} uses constructor {sorted(extra)[0]}; the target calculus only has {T_CTOR}")


def trans_concrete(t: SType, pair: EncodingPair) -> PhantomType:
    if isinstance(t, SBase):
        return Con(T_CTOR, pair.conc(t.name))
    if isinstance(t, SArrow):
        return Arrow(trans_concrete(t.dom, pair), trans_concrete(t.cod, pair))
    raise AppliedToVariable(f"concrete encoding of type variable {t.name}")


def trans_abstract(t: SType, pair: EncodingPair, supply: FreshSupply, hint: str = "a") -> PhantomType:
    if isinstance(t, SBase):
        return Con(T_CTOR, pair.abst(t.name, _Hinted(supply, hint)))
    if isinstance(t, SArrow):
        return Arrow(trans_concrete(t.dom, pair), trans_abstract(t.cod, pair, supply, hint))
    raise AppliedToVariable(f"abstract encoding of type variable {t.name}")


class _Hinted:
    """Supply adaptor that forces one naming hint."""

    def __init__(self, supply, hint):
        self.supply, self.hint = supply, hint

    def fresh(self, _hint="a"):
        return self.supply.fresh(self.hint)


def _bind_bounds(bound_list, env, pair, supply):
    env = dict(env)
    quantified: list[str] = []
    for var, bound in bound_list:
        enc = trans_abstract(bound, pair, supply, var)
        quantified.extend(fv(enc))
        env[var] = enc
    return tuple(quantified), env


def trans_type(t: SType | SScheme, env: Env, pair: EncodingPair, supply: FreshSupply):
    if isinstance(t, SScheme):
        quantified, inner = _bind_bounds(t.bounds, env, pair, supply)
        return TScheme(quantified, trans_type(t.body, inner, pair, supply))
    if isinstance(t, SVar):
        if t.name not in env:
            raise UnboundTypeVar(f"type variable {t.name} has no encoding in scope")
        return env[t.name]
    if isinstance(t, SBase):
        return Con(T_CTOR, pair.conc(t.name))
    return Arrow(trans_type(t.dom, env, pair, supply), trans_type(t.cod, env, pair, supply))


def trans_interp(interp: Interpretation, pair: EncodingPair) -> TargetInterpretation:
    check_expressible(pair)
    constants = {c: Con(T_CTOR, pair.conc(s)) for c, s in interp.constants.items()}
    ops = {f: tuple(trans_concrete(a, pair) for a in interp.op_types(f)) for f in interp.ops}
    return TargetInterpretation(constants, ops, dict(interp.delta))


def trans_expr(d: Derivation, env: Env, pair: EncodingPair, supply: FreshSupply) -> Term:
    e = d.term
    if isinstance(e, (Const, VarRef)):
        return e
    if isinstance(e, Prim):
        return Prim(e.name, trans_type(d.type, env, pair, supply))
    if isinstance(e, Lam):
        return Lam(e.var, trans_type(e.annot, env, pair, supply),
                   trans_expr(d.premises[0], env, pair, supply))
    if isinstance(e, App):
        fn, arg = d.premises
        return App(trans_expr(fn, env, pair, supply), trans_expr(arg, env, pair, supply))
    if isinstance(e, Let):
        bound, body = d.premises
        return Let(e.var, trans_expr(bound, env, pair, supply), trans_expr(body, env, pair, supply))
    if isinstance(e, TyLam):
        quantified, inner = _bind_bounds(zip(e.vars, e.bounds), env, pair, supply)
        return TyLam(quantified, None, trans_expr(d.premises[0], inner, pair, supply))
    if isinstance(e, TyApp):
        poly = d.premises[0]
        scheme = poly.type
        args: list[PhantomType] = []
        for arg, (_, bound) in zip(e.args, scheme.bounds):
            pattern = trans_abstract(bound, pair, supply, "m")
            target = trans_type(arg, env, pair, supply)
            theta = match_one_sided(pattern, target)
            if theta is None:
                raise UnificationFailed(
                    f"encoding of {show_stype(arg)} does not match the abstract encoding of its bound {show_stype(bound)}")
            if len(theta) != len(fv(pattern)):
                raise UnificationFailed("binding count differs from the bound's variable count")
            args.extend(b.ty for b in theta)
        return TyApp(trans_expr(poly, env, pair, supply), tuple(args))
    raise TranslationError(f"cannot translate {e!r}")


@dataclass(frozen=True)
class Translation:
    source: Term
    target: Term
    interp: TargetInterpretation
    source_type: SType | SScheme
    expected_type: PhantomType | TScheme


def translate(interp: Interpretation, pair: EncodingPair, e: Term, supply: FreshSupply | None = None) -> Translation:
    supply = supply or FreshSupply()
    d = derive(interp, e)
    tinterp = trans_interp(interp, pair)
    target = trans_expr(d, {}, pair, supply)
    expected = trans_type(d.type, {}, pair, supply)
    return Translation(e, target, tinterp, d.type, expected)


@dataclass(frozen=True)
class PreservationReport:
    source_type: str
    target_type: str | None
    expected_type: str
    preserved: bool
    error: str | None = None

    def as_json(self) -> dict:
        out = {"source_type": self.source_type, "target_type": self.target_type,
               "expected_type": self.expected_type, "preserved": self.preserved}
        if self.error:
            out["error"] = self.error
        return out


def verify_preservation(interp: Interpretation, pair: EncodingPair, e: Term,
                        translation: Translation | None = None) -> PreservationReport:
    tr = translation or translate(interp, pair, e)
    try:
        got = typecheck_t(tr.interp, tr.target)
    except TargetTypeError as err:
        return PreservationReport(show_stype(tr.source_type), None, show_ttype(tr.expected_type), False, str(err))
    return PreservationReport(show_stype(tr.source_type), show_ttype(got), show_ttype(tr.expected_type),
                              alpha_equal(got, tr.expected_type))
