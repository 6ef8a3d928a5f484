from __future__ import annotations

import itertools
from dataclasses import replace

import pytest

import phantypes
from phantypes.phantom import UNIT, Arrow, Con, Var, parse_type, substitute
from phantypes.target_calculus import (IllFormedType, PrimNeedsAscription, PrimNotCovered,
                                       TargetInterpretation, TScheme, TViolation, TypeMismatch,
                                       alpha_equal, check_pi_f_sound_t, eval_t, show_ttype, step_t,
                                       typecheck_t, well_formed_t)
from phantypes.terms import App, Const, Lam, Prim, TyLam, VarRef, erase, evaluate, is_value
from phantypes.translation import trans_interp, translate
from support import target_term
from termgen import generate_terms, target_encoding

ATOM = phantypes.load_fixture("atom")
TINTERP = trans_interp(ATOM.interp, ATOM.encoding())
INT = parse_type("T (T 1 * (1 * 1))")
GENERATED_PER_FIXTURE = 500


def scheme(vars_, body):
    return TScheme(tuple(vars_), parse_type(body))


def check(text):
    return typecheck_t(TINTERP, target_term("atom", text))


class TestTranslatedInterpretation:
    def test_constant_types(self):
        assert TINTERP.constants["m1"] == INT
        assert show_ttype(TINTERP.constants["n1"]) == "T (T (T 1) * 1 * 1)"

    def test_shape_restrictions(self):
        with pytest.raises(IllFormedType):
            TargetInterpretation({"c": UNIT}, {})
        with pytest.raises(IllFormedType):
            TargetInterpretation({"c": INT}, {"f": (Arrow(INT, UNIT),)})

    def test_only_t_is_allowed(self):
        with pytest.raises(IllFormedType):
            well_formed_t((), Con("z", UNIT))
        with pytest.raises(IllFormedType):
            well_formed_t((), Var("a"))


class TestTyping:
    def test_double_wrapper(self):
        got = check("/\\a,b,c. \\x:T(T 'a * ('b * 'c)). double x")
        assert alpha_equal(got, scheme("abc", "T (T 'a * ('b * 'c)) -> T (T 'a * ('b * 'c))"))

    def test_shared_variable_instance_of_double(self):
        got = check("/\\a. \\x:T(T 'a * ('a * 'a)). "
                    "(prim double : T(T 'a * ('a * 'a)) -> T(T 'a * ('a * 'a))) x")
        assert alpha_equal(got, scheme("a", "T (T 'a * ('a * 'a)) -> T (T 'a * ('a * 'a))"))

    def test_shared_variable_instance_is_ambiguous_without_ascription(self):
        with pytest.raises(PrimNeedsAscription) as err:
            check("/\\a. \\x:T(T 'a * ('a * 'a)). double x")
        assert "candidates" in str(err.value)

    def test_to_string_with_shared_variable(self):
        got = check("/\\a,b. \\x:T('a * ('b * 'b)). toString x")
        assert alpha_equal(got, scheme("ab", "T ('a * ('b * 'b)) -> T (1 * (1 * T 1))"))

    def test_uncovered_ascription(self):
        with pytest.raises(PrimNotCovered):
            check("/\\a. (prim double : T('a * (1 * 1)) -> T('a * (1 * 1)))")

    def test_rejected_instantiation(self):
        with pytest.raises(TypeMismatch):
            check("(/\\a. \\x:'a. x) [T 1] m1")

    def test_type_application(self):
        assert check("(/\\a. \\x:'a. x) [T (T 1 * (1 * 1))] m1") == INT

    def test_constant(self):
        assert check("m1") == INT

    def test_alpha_equal_distinguishes_sharing(self):
        assert not alpha_equal(scheme("ab", "'a * 'b"), scheme("a", "'a * 'a"))
        assert alpha_equal(scheme("ab", "'a * 'b"), scheme("xy", "'x * 'y"))

    def test_hand_written_program_in_rand_atom_fixture(self):
        project = phantypes.load_fixture("rand_atom")
        interp = trans_interp(project.interp, project.encoding())
        with pytest.raises(PrimNotCovered):
            typecheck_t(interp, project.target_programs["main"])

    def test_instances_of_an_accepted_ascription_are_accepted(self):
        generic = parse_type("T (T 'a * ('b * 'c)) -> T (T 'a * ('b * 'c))")
        images = [Var("a"), Var("b"), Var("c"), UNIT, Con("T", UNIT)]
        for combo in itertools.product(images, repeat=3):
            inst = substitute(generic, dict(zip("abc", combo)))
            names = tuple(sorted({v.name for v in combo if isinstance(v, Var)}))
            term = TyLam(names, None, Prim("double", inst)) if names else Prim("double", inst)
            typecheck_t(TINTERP, term)


class TestEvaluation:
    def test_beta(self):
        term = App(Lam("x", INT, VarRef("x")), Const("m1"))
        assert step_t(TINTERP, term) == Const("m1")

    def test_type_beta_then_beta(self):
        term = target_term("atom", "(/\\a. \\x:'a. x) [T (T 1 * (1 * 1))] m1")
        res = eval_t(TINTERP, term)
        assert (res.status, res.term, res.steps) == ("value", Const("m1"), 2)

    def test_translated_wrapper(self):
        tr = translate(ATOM.interp, ATOM.encoding(), ATOM.programs["main"])
        assert eval_t(tr.interp, tr.target).term == Const("s1")


class TestSoundness:
    def test_translated_fixtures(self):
        for name in phantypes.FIXTURES:
            project = phantypes.load_fixture(name)
            interp = trans_interp(project.interp, target_encoding(project))
            assert check_pi_f_sound_t(interp) is None, name

    def test_empty(self):
        assert check_pi_f_sound_t(replace(TINTERP, ops={}, delta={})) is None

    def test_wrong_codomain_is_caught(self):
        nat = TINTERP.constants["n1"]
        ops = dict(TINTERP.ops, double=tuple(Arrow(a.dom, nat) if a.dom == INT else a
                                             for a in TINTERP.ops["double"]))
        v = check_pi_f_sound_t(replace(TINTERP, ops=ops))
        assert isinstance(v, TViolation) and v.prim == "double"


def target_failures(interp, terms, fuel=200):
    for term, ty in terms:
        e = term
        for _ in range(fuel):
            if is_value(e):
                break
            nxt = step_t(interp, e)
            if nxt is None:
                return ("stuck", term, e)
            if not alpha_equal(typecheck_t(interp, nxt), ty):
                return ("type changed", term, nxt)
            e = nxt
    return None


def translated_terms(name, count):
    project = phantypes.load_fixture(name)
    pair = target_encoding(project)
    out = []
    interp = None
    for term, _ in generate_terms(project.interp, count, seed=100 + phantypes.FIXTURES.index(name)):
        tr = translate(project.interp, pair, term)
        interp = tr.interp
        out.append((tr.target, typecheck_t(tr.interp, tr.target)))
    return interp, out


@pytest.mark.parametrize("name", phantypes.FIXTURES)
def test_generated_target_terms_preserve_type_and_progress(name):
    interp, terms = translated_terms(name, GENERATED_PER_FIXTURE)
    assert len(terms) == GENERATED_PER_FIXTURE
    assert target_failures(interp, terms) is None


@pytest.mark.parametrize("name", ["atom", "sockets", "crown34"])
def test_evaluation_ignores_phantom_types(name):
    interp, terms = translated_terms(name, 200)
    for term, _ in terms:
        typed = eval_t(interp, term)
        untyped = evaluate(erase(term), interp.delta)
        assert typed.status == untyped.status == "value"
        if isinstance(typed.term, Const):
            assert typed.term == untyped.term
