"""Project files: one text file holding a hierarchy, an encoding choice,
an interpretation, programs and an interface description.

    hierarchy { sort atom; sort int < atom; sort nat < int; }
    encoding  { scheme width; ctor T; labels { atom = (0); int = (1); nat = (2); } }
    constants { n2, n4 : nat; }
    ops       { double : int -> int | nat -> nat; }
    delta     { double n2 = n4; double n4 = n4; }
    program main { /\\a<:int. \\x:a. double x }

Programs are parsed after every declaration has been read, so block
order does not matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .codegen import InterfaceSpec, OpSpec, Slot
from .encodings import (PER_SORT, EncodingPair, SchemeConfig, SchemeNotExtensible, WidthLabeling,
                        encode, extend_powerset_sort, extend_subhierarchy,
                        extend_tree)
from .errors import ParseError
from .hierarchy import Hierarchy, manual_embedding, validate
from .lexer import Token, TokenStream
from .phantom import read_type
from .source_calculus import Interpretation, SArrow, SBase, SVar
from .terms import App, Const, Lam, Let, Prim, Term, TyApp, TyLam, VarRef

KEYWORDS = {"let", "in", "prim"}
SCHEMES = ("tree", "powerset", "embed", "width", "infinite")


@dataclass(frozen=True)
class NewSort:
    name: str
    parent: str


@dataclass(frozen=True)
class Graft:
    parent: str
    hierarchy: Hierarchy
    labeling: WidthLabeling | None = None


Extension = NewSort | Graft


@dataclass
class Project:
    base_hierarchy: Hierarchy
    config: SchemeConfig
    extensions: tuple[Extension, ...] = ()
    constants: dict[str, str] = field(default_factory=dict)
    ops: dict[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)
    delta: dict[tuple[str, str], str] = field(default_factory=dict)
    programs: dict[str, Term] = field(default_factory=dict)
    target_programs: dict[str, Term] = field(default_factory=dict)
    interface: InterfaceSpec | None = None

    @property
    def hierarchy(self) -> Hierarchy:
        h = self.base_hierarchy
        for ext in self.extensions:
            h = h.with_sort(ext.name, [ext.parent]) if isinstance(ext, NewSort) else h.graft(ext.parent, ext.hierarchy)
        return h

    @property
    def interp(self) -> Interpretation:
        return Interpretation(self.hierarchy, self.constants, self.ops, self.delta)

    def scheme_config(self, scheme: str | None = None, ctor: str | None = None) -> SchemeConfig:
        cfg = self.config
        if scheme is not None:
            cfg = replace(cfg, scheme=scheme)
        if ctor is not None:
            cfg = replace(cfg, ctor_policy=ctor)
        return cfg

    def base_encoding(self, scheme: str | None = None, ctor: str | None = None) -> EncodingPair:
        return encode(self.base_hierarchy, self.scheme_config(scheme, ctor))

    def encoding(self, scheme: str | None = None, ctor: str | None = None) -> EncodingPair:
        """The encoding of the base hierarchy with every extension applied."""
        cfg = self.scheme_config(scheme, ctor)
        pair, h = encode(self.base_hierarchy, cfg), self.base_hierarchy
        for ext in self.extensions:
            if isinstance(ext, Graft):
                sub_cfg = SchemeConfig("width", cfg.ctor_policy, labeling=ext.labeling)
                sub_pair = encode(ext.hierarchy, sub_cfg)
                pair, h = extend_subhierarchy(pair, h, ext.parent, ext.hierarchy, sub_pair)
            elif pair.scheme == "tree":
                pair, h = extend_tree(pair, h, ext.name, ext.parent)
            elif pair.scheme in ("powerset", "embedded"):
                pair, h = extend_powerset_sort(pair, h, ext.name, ext.parent)
            else:
                raise SchemeNotExtensible(f"the {pair.scheme} scheme cannot be extended in place")
        return pair


def load_project(path: str | Path) -> Project:
    return parse_project(Path(path).read_text(encoding="utf-8"))


def parse_project(text: str) -> Project:
    return _ProjectParser(TokenStream(text)).parse()


# -- project blocks ---------------------------------------------------------

class _ProjectParser:
    def __init__(self, s: TokenStream):
        self.s = s
        self.sorts: dict[str, list[str]] = {}
        self.extensions: list[Extension] = []
        self.ext_sorts: set[str] = set()
        self.encoding_items: dict = {}
        self.constants: dict[str, str] = {}
        self.ops: dict[str, tuple[tuple[str, str], ...]] = {}
        self.delta: dict[tuple[str, str], str] = {}
        self.deferred: list[tuple[str, str, list[Token]]] = []
        self.interface: tuple | None = None
        self.delta_refs: list[tuple[Token, Token, Token]] = []

    def parse(self) -> Project:
        s = self.s
        if not s.at("hierarchy"):
            s.fail("'hierarchy'")
        seen = set()
        handlers = {"hierarchy": self.hierarchy_block, "encoding": self.encoding_block,
                    "constants": self.constants_block, "ops": self.ops_block,
                    "delta": self.delta_block, "interface": self.interface_block,
                    "extend": self.extend_block}
        while not s.at_end():
            tok = s.peek()
            if tok.text in ("program", "target_program"):
                s.next()
                name = s.next().text if s.peek().kind == "ident" else "main"
                self.deferred.append((tok.text, name, self._braced_tokens()))
                continue
            if tok.kind != "ident" or tok.text not in handlers:
                s.fail("a block name")
            if tok.text in seen:
                raise ParseError(tok.line, tok.col, "each block at most once", tok.text)
            seen.add(tok.text)
            s.next()
            s.expect("{")
            handlers[tok.text]()
            s.expect("}")
        return self._finish()

    # hierarchy ------------------------------------------------------------

    def _sort_decls(self, into: dict[str, list[str]]) -> None:
        s = self.s
        while s.accept("sort"):
            tok = s.expect_kind("ident", "a sort name")
            if tok.text in into or self._known(tok.text):
                raise ParseError(tok.line, tok.col, "a new sort name", tok.text)
            parents = [self._sort_ref(lambda n: n in into or self._known(n))] if s.accept("<") else []
            while parents and s.accept(","):
                parents.append(self._sort_ref(lambda n: n in into or self._known(n)))
            into[tok.text] = parents
            s.expect(";")

    def _sort_ref(self, is_known) -> str:
        tok = self.s.expect_kind("ident", "a sort name")
        if not is_known(tok.text):
            raise ParseError(tok.line, tok.col, "a declared sort", tok.text)
        return tok.text

    def _known(self, name) -> bool:
        return name in self.sorts or name in self.ext_sorts

    def hierarchy_block(self):
        self._sort_decls(self.sorts)
        if not self.sorts:
            self.s.fail("'sort'")

    def extend_block(self):
        s = self.s
        while not s.at("}"):
            if s.at("sort"):
                local: dict[str, list[str]] = {}
                self._sort_decls(local)
                for name, parents in local.items():
                    if len(parents) != 1:
                        s.fail(f"exactly one parent for new sort {name}")
                    self.extensions.append(NewSort(name, parents[0]))
                    self.ext_sorts.add(name)
            elif s.accept("graft"):
                parent = self._sort_ref(self._known)
                s.expect("{")
                sub: dict[str, list[str]] = {}
                self._sort_decls(sub)
                labels = self._labels(sub) if s.accept("labels") else None
                s.expect("}")
                subh = Hierarchy.from_parents(sub)
                validate(subh, require_joins=False)
                lab = None
                if labels is not None:
                    lab = WidthLabeling(len(next(iter(labels.values()))), labels)
                self.extensions.append(Graft(parent, subh, lab))
                self.ext_sorts |= set(sub)
            else:
                s.fail("'sort' or 'graft'")

    # encoding -------------------------------------------------------------

    def encoding_block(self):
        s = self.s
        while not s.at("}"):
            key = s.expect_kind("ident", "an encoding option")
            if key.text == "scheme":
                val = s.expect_kind("ident", "a scheme name")
                if val.text not in SCHEMES + ("embedded",):
                    raise ParseError(val.line, val.col, "one of " + ", ".join(SCHEMES), val.text)
                self.encoding_items["scheme"] = val.text
                s.expect(";")
            elif key.text == "ctor":
                self.encoding_items["ctor"] = s.expect_kind("ident", "a constructor policy").text
                s.expect(";")
            elif key.text == "labels":
                self.encoding_items["labels"] = self._labels(None)
            elif key.text in ("embed", "index"):
                self.encoding_items[key.text] = self._int_sets()
            else:
                raise ParseError(key.line, key.col, "scheme, ctor, labels, embed or index", key.text)

    def _sort_key(self, local):
        return self._sort_ref(lambda n: self._known(n) or (local is not None and n in local))

    def _labels(self, local) -> dict[str, tuple[int, ...]]:
        s = self.s
        s.expect("{")
        out = {}
        while not s.at("}"):
            name = self._sort_key(local)
            s.expect("=")
            s.expect("(")
            vec = [int(s.expect_kind("number").text)]
            while s.accept(","):
                vec.append(int(s.expect_kind("number").text))
            s.expect(")")
            s.expect(";")
            out[name] = tuple(vec)
        s.expect("}")
        return out

    def _int_sets(self) -> dict[str, frozenset[int]]:
        s = self.s
        s.expect("{")
        out = {}
        while not s.at("}"):
            name = self._sort_key(None)
            s.expect("=")
            s.expect("{")
            items = set()
            if not s.at("}"):
                items.add(int(s.expect_kind("number").text))
                while s.accept(","):
                    items.add(int(s.expect_kind("number").text))
            s.expect("}")
            s.expect(";")
            out[name] = frozenset(items)
        s.expect("}")
        return out

    # interpretation -------------------------------------------------------

    def constants_block(self):
        s = self.s
        while not s.at("}"):
            names = [s.expect_kind("ident", "a constant name")]
            while s.accept(","):
                names.append(s.expect_kind("ident", "a constant name"))
            s.expect(":")
            sort = self._sort_ref(self._known)
            s.expect(";")
            for tok in names:
                if tok.text in self.constants or tok.text in KEYWORDS:
                    raise ParseError(tok.line, tok.col, "a new constant name", tok.text)
                self.constants[tok.text] = sort

    def ops_block(self):
        s = self.s
        while not s.at("}"):
            tok = s.expect_kind("ident", "a primitive name")
            if tok.text in self.ops or tok.text in KEYWORDS:
                raise ParseError(tok.line, tok.col, "a new primitive name", tok.text)
            s.expect(":")
            arrows = [self._op_arrow()]
            while s.accept("|"):
                arrows.append(self._op_arrow())
            s.expect(";")
            self.ops[tok.text] = tuple(arrows)

    def _op_arrow(self):
        dom = self._sort_ref(self._known)
        self.s.expect("->")
        return dom, self._sort_ref(self._known)

    def delta_block(self):
        s = self.s
        while not s.at("}"):
            f = s.expect_kind("ident", "a primitive name")
            c = s.expect_kind("ident", "a constant name")
            s.expect("=")
            out = s.expect_kind("ident", "a constant name")
            s.expect(";")
            self.delta_refs.append((f, c, out))

    # interface ------------------------------------------------------------

    def interface_block(self):
        s = self.s
        fields: dict[str, str] = {}
        ops: list[OpSpec] = []
        while not s.at("}"):
            key = s.expect_kind("ident", "an interface item")
            if key.text == "val":
                ops.append(self._val())
            elif key.text in ("type", "structure", "signature", "safe"):
                fields[key.text] = s.expect_kind("ident", f"a {key.text} name").text
                s.expect(";")
            elif key.text == "base":
                fields["base"] = s.expect_kind("string", "a quoted ML type").text[1:-1]
                s.expect(";")
            else:
                raise ParseError(key.line, key.col, "type, base, structure, signature, safe or val", key.text)
        for required in ("type", "base", "structure"):
            if required not in fields:
                s.fail(f"'{required}' in the interface block")
        self.interface = InterfaceSpec(fields["type"], fields["base"], fields["structure"], tuple(ops),
                                       fields.get("signature"), fields.get("safe"))

    def _val(self) -> OpSpec:
        s = self.s
        name = s.expect_kind("ident", "an operation name").text
        s.expect(":")
        args = [self._slot()]
        while s.accept("*"):
            args.append(self._slot())
        s.expect("->")
        result = self._slot()
        s.expect(";")
        args = [self._resolve_shared(a, args) for a in args]
        return OpSpec(name, tuple(args), self._resolve_shared(result, args))

    def _slot(self) -> Slot:
        s = self.s
        label = None
        if s.peek().kind == "ident" and s.peek(1).text == ":":
            label = s.next().text
            s.next()
        tok = s.peek()
        if tok.kind == "string":
            s.next()
            return Slot("ml", tok.text[1:-1], name=label)
        if tok.kind == "tyvar":
            s.next()
            bound = self._sort_ref(self._known) if s.accept("<:") else ""
            return Slot("shared", bound, var=tok.text[1:], name=label)
        return Slot("sort", self._sort_ref(self._known), name=label)

    @staticmethod
    def _resolve_shared(slot: Slot, args) -> Slot:
        # `'v` without a bound refers to a bounded occurrence elsewhere in the val.
        if slot.kind != "shared" or slot.value:
            return slot
        for a in args:
            if a.kind == "shared" and a.var == slot.var and a.value:
                return replace(slot, value=a.value)
        return slot

    # programs -------------------------------------------------------------

    def _braced_tokens(self) -> list[Token]:
        s = self.s
        s.expect("{")
        depth, out = 1, []
        while True:
            tok = s.peek()
            if tok.kind == "eof":
                s.fail("'}'")
            s.next()
            if tok.text == "{" and tok.kind == "punct":
                depth += 1
            elif tok.text == "}" and tok.kind == "punct":
                depth -= 1
                if depth == 0:
                    out.append(Token("eof", "", tok.line, tok.col))
                    return out
            out.append(tok)

    def _finish(self) -> Project:
        h = Hierarchy.from_parents(self.sorts)
        validate(h, require_joins=False)
        for f, c, out in self.delta_refs:
            if f.text not in self.ops:
                raise ParseError(f.line, f.col, "a declared primitive", f.text)
            for tok in (c, out):
                if tok.text not in self.constants:
                    raise ParseError(tok.line, tok.col, "a declared constant", tok.text)
            self.delta[(f.text, c.text)] = out.text
        cfg = self._config(h)
        project = Project(h, cfg, tuple(self.extensions), self.constants, self.ops, self.delta,
                          interface=self.interface)
        names = _Names(set(project.hierarchy.sorts), set(self.constants), set(self.ops))
        for kind, name, tokens in self.deferred:
            stream = TokenStream(tokens=tokens)
            if kind == "program":
                term = _SourceTerms(stream, names).term({}, {})
                target = project.programs
            else:
                term = _TargetTerms(stream, names).term({}, {})
                target = project.target_programs
            if not stream.at_end():
                stream.fail("end of program")
            if name in target:
                tok = tokens[0]
                raise ParseError(tok.line, tok.col, "a new program name", name)
            target[name] = term
        return project

    def _config(self, h: Hierarchy) -> SchemeConfig:
        items = self.encoding_items
        ctor = items.get("ctor", "T")
        scheme = items.get("scheme", "width")
        lab = None
        if "labels" in items:
            labels = items["labels"]
            lab = WidthLabeling(len(next(iter(labels.values()))), labels)
        emb = manual_embedding(h, items["embed"]) if "embed" in items else None
        return SchemeConfig(scheme, PER_SORT if ctor == PER_SORT else ctor, emb, lab, items.get("index"))


# -- terms ------------------------------------------------------------------

@dataclass(frozen=True)
class _Names:
    sorts: set[str]
    constants: set[str]
    ops: set[str]


class _Terms:
    """Shared term grammar; subclasses supply the type syntax and binders."""

    def __init__(self, s: TokenStream, names: _Names):
        self.s, self.names = s, names

    def term(self, env, tyenv) -> Term:
        s = self.s
        if s.accept("\\"):
            var = s.expect_kind("ident", "a variable name").text
            s.expect(":")
            annot = self.type(tyenv)
            s.expect(".")
            return Lam(var, annot, self.term({**env, var: True}, tyenv))
        if s.accept("let"):
            var = s.expect_kind("ident", "a variable name").text
            s.expect("=")
            bound = self.term(env, tyenv)
            s.expect("in")
            return Let(var, bound, self.term({**env, var: True}, tyenv))
        if s.accept("/\\"):
            return self.tylam(env, tyenv)
        fn = self.postfix(env, tyenv)
        while self._starts_atom():
            fn = App(fn, self.postfix(env, tyenv))
        return fn

    def _starts_atom(self) -> bool:
        tok = self.s.peek()
        if tok.kind == "ident":
            return tok.text not in ("in",)
        return tok.kind == "punct" and tok.text in ("(", "\\", "/\\")

    def postfix(self, env, tyenv) -> Term:
        s = self.s
        if s.at("\\") or s.at("/\\"):
            return self.term(env, tyenv)
        e = self.atom(env, tyenv)
        while s.accept("["):
            args = [self.type(tyenv)]
            while s.accept(","):
                args.append(self.type(tyenv))
            s.expect("]")
            e = TyApp(e, tuple(args))
        return e

    def atom(self, env, tyenv) -> Term:
        s = self.s
        if s.accept("("):
            if s.accept("prim"):
                e = self.prim(tyenv, True)
            else:
                e = self.term(env, tyenv)
            s.expect(")")
            return e
        if s.accept("prim"):
            return self.prim(tyenv, False)
        tok = s.expect_kind("ident", "a term")
        if tok.text in env:
            return VarRef(tok.text)
        if tok.text in self.names.constants:
            return Const(tok.text)
        if tok.text in self.names.ops:
            return Prim(tok.text)
        raise ParseError(tok.line, tok.col, "a variable, constant or primitive", tok.text)

    def prim(self, tyenv, allow_ascription) -> Prim:
        s = self.s
        tok = s.expect_kind("ident", "a primitive name")
        if tok.text not in self.names.ops:
            raise ParseError(tok.line, tok.col, "a declared primitive", tok.text)
        ascription = None
        if allow_ascription and s.accept(":"):
            ascription = self.type(tyenv)
        return Prim(tok.text, ascription)


class _SourceTerms(_Terms):
    def tylam(self, env, tyenv) -> Term:
        s = self.s
        names, bounds = [], []
        while True:
            tok = s.peek()
            var = (s.expect_kind("tyvar").text[1:] if tok.kind == "tyvar"
                   else s.expect_kind("ident", "a type variable").text)
            s.expect("<:")
            bounds.append(self.type(tyenv))
            names.append(var)
            if not s.accept(","):
                break
        s.expect(".")
        inner = {**tyenv, **{v: True for v in names}}
        return TyLam(tuple(names), tuple(bounds), self.term(env, inner))

    def type(self, tyenv):
        left = self._type_atom(tyenv)
        if self.s.accept("->"):
            return SArrow(left, self.type(tyenv))
        return left

    def _type_atom(self, tyenv):
        s = self.s
        if s.accept("("):
            t = self.type(tyenv)
            s.expect(")")
            return t
        tok = s.peek()
        if tok.kind == "tyvar":
            s.next()
            name = tok.text[1:]
            if name not in tyenv:
                raise ParseError(tok.line, tok.col, "a type variable in scope", tok.text)
            return SVar(name)
        tok = s.expect_kind("ident", "a source type")
        if tok.text in tyenv:
            return SVar(tok.text)
        if tok.text in self.names.sorts:
            return SBase(tok.text)
        raise ParseError(tok.line, tok.col, "a declared sort or type variable", tok.text)


class _TargetTerms(_Terms):
    def tylam(self, env, tyenv) -> Term:
        s = self.s
        names = []
        while True:
            tok = s.peek()
            names.append(s.expect_kind("tyvar").text[1:] if tok.kind == "tyvar"
                         else s.expect_kind("ident", "a type variable").text)
            if not s.accept(","):
                break
        s.expect(".")
        inner = {**tyenv, **{v: v for v in names}}
        return TyLam(tuple(names), None, self.term(env, inner))

    def type(self, tyenv):
        return read_type(self.s, tyenv)
