"""Predicates that recognize the bytecode shapes each backend mishandles.

The corpus generator, the assessment oracle, and the backends themselves
all share these definitions, so a declared weakness, the class that
exercises it, and the code that trips over it can never drift apart.
Every predicate takes a compiled top-level class and scans its nested
classes too.
"""

from __future__ import annotations

from ..vm.model import BytecodeClass, MethodBody, code_offsets
from .core import StructureError, _Lifter, collect_cast_sites, split_clinit, wrapper_ctor_ids


def _classes(bc: BytecodeClass):
    yield bc
    yield from bc.nested


def method_has_multi_handlers(m: MethodBody) -> bool:
    return len(m.handlers) >= 2


def method_has_try_over_loop(m: MethodBody) -> bool:
    """A protected region that contains a backward branch, i.e. a loop
    living inside a try block (a loop around a try leaves its latch
    outside every handler row)."""
    if not m.handlers:
        return False
    offs = code_offsets(m.code)
    for h in m.handlers:
        for o, ins in zip(offs, m.code):
            if h.start <= o < h.end and ins.op in ("IFEQ", "IFNE", "GOTO") \
                    and ins.arg is not None and ins.arg <= o:
                return True
    return False


def has_multi_handler_method(bc: BytecodeClass) -> bool:
    return any(method_has_multi_handlers(m)
               for c in _classes(bc) for m in c.methods)


def has_try_over_loop(bc: BytecodeClass) -> bool:
    return any(method_has_try_over_loop(m)
               for c in _classes(bc) for m in c.methods)


def has_newline_string_constant(bc: BytecodeClass) -> bool:
    return any(e[0] == "str" and "\n" in e[1]
               for c in _classes(bc) for e in c.pool)


def has_static_setter(bc: BytecodeClass) -> bool:
    """A one-parameter static method whose whole body stores the argument
    into a static field of the same class."""
    for c in _classes(bc):
        for m in c.methods:
            if not (m.static and len(m.params) == 1 and len(m.code) == 3):
                continue
            a, b, r = m.code
            if a.op != "LOAD" or a.arg != 0 or b.op != "PUTSTATIC" \
                    or r.op != "RETURN":
                continue
            ref = c.pool[b.arg]
            if ref[1] == c.name and ref[3] == m.params[0]:
                return True
    return False


def has_variant_b_wrapper_call(bc: BytecodeClass) -> bool:
    """A wrapper constructor call whose extra parameter is typed as a real
    class instead of a compiler-made `$` name.  Only variant B produces
    this; backends keyed on the `$` convention miss it."""
    unit = {c.name: c for c in _classes(bc)}
    for c in _classes(bc):
        for m in c.methods:
            prev = None
            for ins in m.code:
                if ins.op == "INVOKESPECIAL" and prev is not None \
                        and prev.op == "ACONST_NULL":
                    ref = c.pool[ins.arg]
                    params = ref[3]
                    if params and "$" not in params[-1]:
                        target = unit.get(ref[1])
                        if target is not None and any(
                                target.methods[i].params == params
                                for i in wrapper_ctor_ids(target)):
                            return True
                prev = ins
    return False


def _overload_sites(bc: BytecodeClass):
    unit = {c.name: c for c in _classes(bc)}
    for site in collect_cast_sites(bc):
        owner = unit.get(site.owner)
        if owner is None:
            continue
        siblings = sum(
            1 for m in owner.methods
            if m.name == site.method and len(m.params) == site.arity
        )
        if siblings >= 2:
            yield site


def has_overload_cast_recursion(bc: BytecodeClass) -> bool:
    return any(not s.is_null for s in _overload_sites(bc))


def has_null_cast_ambiguity(bc: BytecodeClass) -> bool:
    return any(s.is_null for s in _overload_sites(bc))


def has_field_order_dependency(bc: BytecodeClass) -> bool:
    """A static initializer reads a later-alphabetical static sibling.

    Declaration order makes the read legal; a backend that sorts field
    declarations turns it into a forward reference."""
    from .backends import _LITERALIST_POLICY

    for c in _classes(bc):
        clinit = next((m for m in c.methods if m.name == "<clinit>"), None)
        if clinit is None:
            continue
        unit = {x.name: x for x in _classes(bc)}
        try:
            stmts = _Lifter(unit, c, clinit, _LITERALIST_POLICY).lift().stmts
        except StructureError:
            continue
        inits, _rest = split_clinit(stmts, c)
        for fname, expr in inits.items():
            for g in _own_static_reads(expr, c.name):
                if g > fname:
                    return True
    return False


def _own_static_reads(expr, cls: str) -> list[str]:
    from ..lang.nodes import StaticGet
    from .core import _expr_children

    out = []
    if isinstance(expr, StaticGet) and expr.cls == cls:
        out.append(expr.name)
    for child in _expr_children(expr):
        out.extend(_own_static_reads(child, cls))
    return out


SHAPES = {
    "multi-handler-method": has_multi_handler_method,
    "try-over-loop": has_try_over_loop,
    "newline-in-string-constant": has_newline_string_constant,
    "variant-b-wrapper-call": has_variant_b_wrapper_call,
    "static-setter": has_static_setter,
    "overload-cast-recursion": has_overload_cast_recursion,
    "null-cast-ambiguity": has_null_cast_ambiguity,
    "field-order-dependency": has_field_order_dependency,
}
