"""ML-style source text for a safe interface over an unsafe structure.

Arguments get abstract encodings, results concrete ones; the
implementation wraps the unsafe base type in a one-constructor datatype.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .encodings import EncodingPair
from .errors import PhantypesError
from .hierarchy import Hierarchy
from .phantom import Con, FreshSupply, PhantomType, show


class CodegenError(PhantypesError):
    pass


class PolarityViolation(CodegenError):
    pass


@dataclass(frozen=True)
class Slot:
    """One argument or result position of an operation.

    kind is "sort" (encoded sort), "shared" (a bounded variable shared by
    every slot naming the same ``var``) or "ml" (plain ML type text).
    """

    kind: str
    value: str
    var: str | None = None
    name: str | None = None


@dataclass(frozen=True)
class OpSpec:
    name: str
    args: tuple[Slot, ...]
    result: Slot


@dataclass(frozen=True)
class InterfaceSpec:
    type_name: str  # e.g. safe_atom
    base_type: str  # e.g. Atom.atom
    structure: str  # the unsafe structure, e.g. Atom
    ops: tuple[OpSpec, ...] = ()
    signature_name: str | None = None
    safe_structure: str | None = None

    @property
    def sig_name(self) -> str:
        return self.signature_name or self.type_name.upper()

    @property
    def struct_name(self) -> str:
        if self.safe_structure:
            return self.safe_structure
        return "".join(part.capitalize() for part in self.type_name.split("_"))

    def check(self, h: Hierarchy) -> None:
        for op in self.ops:
            bound: dict[str, str] = {}
            for slot in op.args:
                if slot.kind in ("sort", "shared"):
                    h.check(slot.value)
                if slot.kind == "shared":
                    if bound.setdefault(slot.var, slot.value) != slot.value:
                        raise CodegenError(f"{op.name}: variable '{slot.var} given two bounds")
            r = op.result
            if r.kind == "sort":
                h.check(r.value)
            elif r.kind == "shared" and r.var not in bound:
                raise PolarityViolation(
                    f"{op.name}: result '{r.var} does not occur in an argument, so it would be an "
                    "abstract encoding in a result position")


def emit_datatypes(pair: EncodingPair, h: Hierarchy) -> str:
    return "".join(f"datatype 'a {c} = Irrelevant_{c}\n" for c in pair.constructors(h))


@dataclass
class _ValTypes:
    args: list[str] = field(default_factory=list)
    result: str = ""


def _slot_types(spec: InterfaceSpec, pair: EncodingPair, op: OpSpec) -> _ValTypes:
    supply = FreshSupply()
    shared: dict[str, PhantomType] = {}

    def wrap(t):
        return show(Con(spec.type_name, t))

    out = _ValTypes()
    for slot in op.args:
        if slot.kind == "ml":
            out.args.append(slot.value)
        elif slot.kind == "sort":
            out.args.append(wrap(pair.abst(slot.value, supply)))
        else:
            if slot.var not in shared:
                shared[slot.var] = pair.abst(slot.value, supply)
            out.args.append(wrap(shared[slot.var]))
    r = op.result
    if r.kind == "ml":
        out.result = r.value
    elif r.kind == "sort":
        out.result = wrap(pair.conc(r.value))
    else:
        out.result = wrap(shared[r.var])
    return out


def _val_line(spec, pair, op) -> str:
    types = _slot_types(spec, pair, op)
    args = " * ".join(types.args) if types.args else "unit"
    return f"  val {op.name}: {args} -> {types.result}\n"


def emit_safe_signature(spec: InterfaceSpec, pair: EncodingPair, h: Hierarchy) -> str:
    spec.check(h)
    lines = [f"signature {spec.sig_name} = sig\n", f"  type 'a {spec.type_name}\n"]
    lines += [_val_line(spec, pair, op) for op in spec.ops]
    lines.append("end\n")
    return "".join(lines)


def _param_names(op: OpSpec) -> list[str]:
    names = []
    for i, slot in enumerate(op.args, 1):
        names.append(slot.name or (f"v{i}" if slot.kind != "ml" else f"x{i}"))
    return names


def _fun(spec: InterfaceSpec, pair: EncodingPair, op: OpSpec) -> str:
    types = _slot_types(spec, pair, op)
    names = _param_names(op)
    params = []
    for slot, name, ty in zip(op.args, names, types.args):
        pattern = name if slot.kind == "ml" else f"W {name}"
        params.append(f"{pattern} : {ty}")
    head = f"({', '.join(params)})" if params else "()"
    call = f"{spec.structure}.{op.name} ({', '.join(names)})"
    body = call if op.result.kind == "ml" else f"W ({call})"
    return f"  fun {op.name} {head} : {types.result} =\n    {body}\n"


def emit_safe_structure(spec: InterfaceSpec, pair: EncodingPair, h: Hierarchy) -> str:
    spec.check(h)
    lines = [f"structure {spec.struct_name} : {spec.sig_name} = struct\n",
             f"  datatype 'a {spec.type_name} = W of {spec.base_type}\n"]
    lines += [_fun(spec, pair, op) for op in spec.ops]
    lines.append("end\n")
    return "".join(lines)


def emit_opaque_alternative(spec: InterfaceSpec) -> str:
    lines = ["(* Alternative without a wrapper: ascribe the signature opaquely.\n",
             f"structure {spec.struct_name}Opaque :> {spec.sig_name} = struct\n",
             f"  type 'a {spec.type_name} = {spec.base_type}\n"]
    lines += [f"  val {op.name} = {spec.structure}.{op.name}\n" for op in spec.ops]
    lines.append("end\n*)\n")
    return "".join(lines)


def emit_interface(spec: InterfaceSpec, pair: EncodingPair, h: Hierarchy) -> str:
    parts = [emit_datatypes(pair, h), emit_safe_signature(spec, pair, h),
             emit_safe_structure(spec, pair, h), emit_opaque_alternative(spec)]
    return "\n".join(parts)
