from __future__ import annotations

import itertools
from dataclasses import replace

import pytest

import phantypes
from oracles import declarative_subtypes, leq_table
from phantypes.hierarchy import Hierarchy
from phantypes.source_calculus import (BoundViolation, IllFormedType, Interpretation, PrimAmbiguous,
                                       PrimNotCovered, SArrow, SBase, SScheme, SVar, TypeMismatch,
                                       UnboundVariable, Violation, check_pi_f_sound, eval_source,
                                       show_stype, step_source, subtype, typecheck)
from phantypes.terms import App, Const, Lam, Prim, TyApp, VarRef, is_value
from support import source_term
from termgen import generate_terms

ATOM = phantypes.load_fixture("atom")
INTERP = ATOM.interp
GENERATED_PER_FIXTURE = 500


def base(s):
    return SBase(s)


def check(text, fixture="atom"):
    project = phantypes.load_fixture(fixture)
    return show_stype(typecheck(project.interp, source_term(fixture, text)))


class TestSubtype:
    H = ATOM.hierarchy

    def test_base_order(self):
        assert subtype(self.H, {}, base("int"), base("atom"))
        assert not subtype(self.H, {}, base("atom"), base("int"))

    def test_arrows_are_covariant_in_the_result_only(self):
        assert subtype(self.H, {}, SArrow(base("atom"), base("int")), SArrow(base("atom"), base("atom")))
        assert not subtype(self.H, {}, SArrow(base("int"), base("int")), SArrow(base("atom"), base("int")))

    def test_variable_bound(self):
        delta = {"a": base("nat")}
        assert subtype(self.H, delta, SVar("a"), base("int"))
        assert not subtype(self.H, delta, base("nat"), SVar("a"))

    def test_ill_formed(self):
        with pytest.raises(IllFormedType):
            subtype(self.H, {}, SVar("a"), base("int"))
        with pytest.raises(IllFormedType):
            subtype(self.H, {}, base("float"), base("int"))

    def test_agrees_with_declarative_oracle(self):
        h = self.H
        delta = {"a": ("base", "int"), "b": ("base", "bool")}
        atoms = [("base", s) for s in h.sorts] + [("var", a) for a in delta]
        universe = atoms + [("arrow", d, c) for d in atoms for c in atoms]
        rel = declarative_subtypes(h.sorts, leq_table(h), delta, set(universe))

        def to_stype(t):
            if t[0] == "base":
                return SBase(t[1])
            if t[0] == "var":
                return SVar(t[1])
            return SArrow(to_stype(t[1]), to_stype(t[2]))

        sdelta = {a: SBase(b[1]) for a, b in delta.items()}
        for s, t in itertools.product(universe, universe):
            assert subtype(h, sdelta, to_stype(s), to_stype(t)) == ((s, t) in rel), (s, t)


class TestTyping:
    def test_wrapper_schemes(self):
        assert check("/\\a<:int. \\x:a. double x") == "forall a<:int. a -> a"
        assert check("/\\a<:atom. \\x:a. toString x") == "forall a<:atom. a -> str"

    def test_constant(self):
        assert check("n2") == "nat"

    def test_application_at_an_instance(self):
        assert check("(/\\a<:int. \\x:a. double x)[nat] n1") == "nat"

    def test_ascribed_prim(self):
        assert check("(prim toString : atom -> str)") == "atom -> str"
        assert check("/\\a<:int. (prim double : a -> a)") == "forall a<:int. a -> a"

    def test_unascribed_prim_needs_a_unique_candidate(self):
        with pytest.raises(PrimAmbiguous):
            check("double")

    def test_uncovered_instance(self):
        with pytest.raises(PrimNotCovered):
            check("/\\a<:atom. \\x:a. double x")

    def test_bound_violation(self):
        with pytest.raises(BoundViolation):
            check("(/\\a<:int. \\x:a. double x)[bool]")

    def test_no_subsumption_at_application(self):
        with pytest.raises(TypeMismatch):
            check("(\\x:int. double x) n1")

    def test_not_a_function(self):
        with pytest.raises(TypeMismatch):
            check("\\x:int. x x")

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariable):
            typecheck(INTERP, VarRef("y"))

    def test_fixture_programs(self):
        expected = {"double_wrapper": "forall a<:int. a -> a", "to_string_wrapper": "forall a<:atom. a -> str",
                    "main": "str", "report": "str", "shared": "nat"}
        for name, term in ATOM.programs.items():
            assert show_stype(typecheck(INTERP, term)) == expected[name]

    @pytest.mark.parametrize("name", phantypes.FIXTURES)
    def test_every_fixture_program_typechecks(self, name):
        project = phantypes.load_fixture(name)
        for term in project.programs.values():
            typecheck(project.interp, term)

    def test_deterministic(self):
        term = ATOM.programs["shared"]
        assert typecheck(INTERP, term) == typecheck(INTERP, term)


class TestEvaluation:
    def test_beta(self):
        assert step_source(INTERP, App(Lam("x", base("int"), VarRef("x")), Const("m1"))) == Const("m1")

    def test_type_beta(self):
        poly = source_term("atom", "/\\a<:int. \\x:a. double x")
        out = step_source(INTERP, TyApp(poly, (base("nat"),)))
        assert out == Lam("x", base("nat"), App(Prim("double"), VarRef("x")))

    def test_delta(self):
        assert step_source(INTERP, App(Prim("double"), Const("n1"))) == Const("n2")

    def test_value_is_final(self):
        res = eval_source(INTERP, Const("n0"))
        assert (res.status, res.term, res.steps) == ("value", Const("n0"), 0)

    def test_let_trace(self):
        res = eval_source(INTERP, source_term("atom", "let y = /\\a<:int. \\x:a. double x in y[nat] n2"))
        assert res.status == "value" and res.term == Const("n4")

    def test_fixture_main(self):
        assert eval_source(INTERP, ATOM.programs["main"]).term == Const("s1")
        assert eval_source(INTERP, ATOM.programs["shared"]).term == Const("n4")

    def test_bypassing_the_types_gets_stuck(self):
        h = Hierarchy.from_parents({"atom": [], "int": ["atom"], "bool": ["atom"]})
        interp = Interpretation(h, {"m1": "int", "tt": "bool"}, {"conj": (("int", "bool"),)},
                                {("conj", "tt"): "tt"})
        assert isinstance(check_pi_f_sound(interp), Violation)
        assert eval_source(interp, App(Prim("conj"), Const("m1"))).status == "stuck"

    def test_fuel(self):
        res = eval_source(INTERP, ATOM.programs["main"], fuel=1)
        assert res.status == "fuel-exhausted" and res.steps == 1


class TestSoundness:
    @pytest.mark.parametrize("name", phantypes.FIXTURES)
    def test_fixtures_are_sound(self, name):
        assert check_pi_f_sound(phantypes.load_fixture(name).interp) is None

    def test_empty_ops(self):
        assert check_pi_f_sound(replace(INTERP, ops={}, delta={})) is None

    def test_missing_delta_entry(self):
        delta = dict(INTERP.delta)
        del delta[("double", "n2")]
        v = check_pi_f_sound(replace(INTERP, delta=delta))
        assert (v.prim, v.const, v.expected, v.actual) == ("double", "n2", "nat", None)

    def test_wrong_result_sort(self):
        delta = {**INTERP.delta, ("toString", "tt"): "tt"}
        v = check_pi_f_sound(replace(INTERP, delta=delta))
        assert (v.prim, v.const, v.actual) == ("toString", "tt", "bool")

    def test_conflicting_codomains(self):
        ops = dict(INTERP.ops, double=INTERP.ops["double"] + (("int", "atom"),))
        assert check_pi_f_sound(replace(INTERP, ops=ops)) is not None


def preservation_failures(interp, terms, fuel=200):
    """Every reduct of every term; returns the first term that changes type or gets stuck."""
    for term, ty in terms:
        e = term
        for _ in range(fuel):
            if is_value(e):
                break
            nxt = step_source(interp, e)
            if nxt is None:
                return ("stuck", term, e)
            if typecheck(interp, nxt) != ty:
                return ("type changed", term, nxt)
            e = nxt
    return None


@pytest.mark.parametrize("name", phantypes.FIXTURES)
def test_generated_terms_preserve_type_and_progress(name):
    project = phantypes.load_fixture(name)
    terms = generate_terms(project.interp, GENERATED_PER_FIXTURE, seed=phantypes.FIXTURES.index(name))
    assert len(terms) == GENERATED_PER_FIXTURE
    assert not any(isinstance(t, SScheme) for _, t in terms)
    assert preservation_failures(project.interp, terms) is None
