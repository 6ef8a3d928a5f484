from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_match
from phantypes.errors import ParseError
from phantypes.phantom import (UNIT, Arrow, Con, FreshSupply, Product, Var, fv, freshen,
                               match_one_sided, nest, parse_type, show, substitute, tuple_items,
                               tuple_of, unify_general)

CTORS = ["A", "B", "z", "T"]

ground_types = st.recursive(
    st.just(UNIT),
    lambda inner: st.one_of(
        st.builds(Con, st.sampled_from(CTORS), inner),
        st.builds(Product, inner, inner),
    ),
    max_leaves=8,
)

open_types = st.recursive(
    st.one_of(st.just(UNIT), st.builds(Var, st.sampled_from(["a", "b", "c"]))),
    lambda inner: st.one_of(
        st.builds(Con, st.sampled_from(CTORS), inner),
        st.builds(Product, inner, inner),
        st.builds(Arrow, inner, inner),
    ),
    max_leaves=8,
)


class TestPrinting:
    def test_tree_nesting(self):
        t = Con("A", Con("C", Con("D", UNIT)))
        assert show(t) == "((unit D) C) A"

    def test_flat_tuple(self):
        t = tuple_of([Con("z", UNIT), UNIT, Con("z", UNIT), Con("z", UNIT)])
        assert show(t) == "unit z * unit * unit z * unit z"

    def test_nested_left_component_is_parenthesized(self):
        t = tuple_of([Product(UNIT, UNIT), Con("z", UNIT)])
        assert show(t) == "(unit * unit) * unit z"

    def test_formal_style(self):
        t = Con("T", tuple_of([Con("T", Var("a")), Var("b"), Var("c")]))
        assert show(t, "formal") == "T (T 'a * 'b * 'c)"
        assert show(Con("T", tuple_of([UNIT, UNIT, Con("T", UNIT)])), "formal") == "T (1 * 1 * T 1)"

    def test_arrow(self):
        assert show(Arrow(Var("a"), Arrow(UNIT, UNIT))) == "'a -> unit -> unit"
        assert show(Arrow(Arrow(UNIT, UNIT), UNIT)) == "(unit -> unit) -> unit"

    @given(open_types)
    def test_parse_inverts_show(self, t):
        assert parse_type(show(t)) == t

    @given(open_types)
    def test_parse_inverts_formal_show(self, t):
        assert parse_type(show(t, "formal")) == t


class TestParsing:
    def test_unicode_operators(self):
        assert parse_type("unit × unit → unit") == Arrow(Product(UNIT, UNIT), UNIT)

    def test_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_type("unit * ")
        assert (err.value.line, err.value.col) == (1, 8)

    def test_trailing_garbage(self):
        with pytest.raises(ParseError):
            parse_type("unit )")


class TestMatching:
    def test_binds_in_first_occurrence_order(self):
        pattern = parse_type("'b * 'a z")
        theta = match_one_sided(pattern, parse_type("unit A * unit z"))
        assert [b.var for b in theta] == ["b", "a"]
        assert [show(b.ty) for b in theta] == ["unit A", "unit"]

    def test_repeated_variable_must_agree(self):
        pattern = parse_type("'a * 'a")
        assert match_one_sided(pattern, parse_type("unit * unit")) is not None
        assert match_one_sided(pattern, parse_type("unit * unit z")) is None

    def test_constructor_clash(self):
        assert match_one_sided(parse_type("'a A"), parse_type("unit B")) is None

    @given(open_types, ground_types)
    def test_agrees_with_oracle(self, pattern, target):
        theta = match_one_sided(pattern, target)
        assert (theta is None) == (naive_match(pattern, target) is None)
        if theta is not None:
            assert substitute(pattern, theta) == target
            assert tuple(b.var for b in theta) == fv(pattern)

    @given(open_types, st.lists(ground_types, min_size=3, max_size=3))
    def test_instances_always_match(self, pattern, images):
        mapping = dict(zip(["a", "b", "c"], images))
        assert match_one_sided(pattern, substitute(pattern, mapping)) is not None


class TestUnification:
    def test_occurs_check(self):
        assert unify_general(Var("a"), Con("A", Var("a"))) is None

    @given(open_types, open_types)
    @settings(max_examples=200)
    def test_unifier_unifies(self, t1, t2):
        theta = unify_general(t1, t2)
        if theta is not None:
            assert substitute(t1, theta) == substitute(t2, theta)

    @given(open_types, ground_types)
    def test_agrees_with_matching_on_ground_targets(self, pattern, target):
        assert (unify_general(pattern, target) is None) == (match_one_sided(pattern, target) is None)


class TestFreshness:
    def test_supply_skips_reserved(self):
        supply = FreshSupply(reserved=["a1"])
        assert supply.fresh() == "a2"
        assert supply.fresh() == "a3"

    def test_freshen_renames_consistently(self):
        supply = FreshSupply()
        t = freshen(parse_type("'x * 'y z * 'x"), supply)
        assert show(t) == "'a1 * 'a2 z * 'a1"
        assert show(freshen(parse_type("'x"), supply)) == "'a3"


def test_nest_and_tuple_items():
    assert show(nest("z", UNIT, 3)) == "((unit z) z) z"
    items = [Product(UNIT, UNIT), Con("z", UNIT), UNIT]
    assert tuple_items(tuple_of(items)) == items
