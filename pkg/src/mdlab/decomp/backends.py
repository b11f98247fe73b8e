"""The built-in decompilers.

Three backends share one reconstruction engine but disagree about
everything a decompiler gets to choose: naming, declaration placement,
sugar recovery, and how much type information to trust.  Each also ships
a small set of deliberate bugs, declared up front in its failure
profile, so the surrounding pipeline has known-bad behavior to detect:

* ``literalist`` translates as directly as it can, hoists every
  declaration to the top, and never reconstructs sugar.  It declines
  whole classes with multiple catch handlers in one method, gives up on
  methods whose protected region contains a loop, and prints string
  constants without escaping newlines.
* ``sugarer`` rebuilds concatenation from builder chains, scopes
  declarations tightly, folds single-use temporaries, and sorts field
  declarations alphabetically, which silently reorders initializers.
  It also only recognizes wrapper constructors whose extra parameter
  carries a compiler-made ``$`` name.
* ``optimist`` drops redundant qualifiers and casts on the theory that
  the compiler will put them back.  Dropped casts un-pin overloads;
  its setter-renaming heuristic produces self-assignments.

A backend's output is plain source text; all error annotation happens
downstream by reparsing, the same as for an external tool.
"""

from __future__ import annotations

import string
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from ..lang.nodes import (
    Assign, Binary, Block, Call, Cast, ClassAst, CtorDecl, Expr, ExprStmt,
    FieldDecl, FieldGet, If, MethodDecl, NestedClassDecl, New, Param, Print,
    Return, StaticBlock, StaticCall, StaticGet, Stmt, This, Throw, TryCatch,
    Unary, VarDecl, VarRef, While,
)
from ..lang.printer import PrintOptions, pretty_print
from ..vm.model import BytecodeClass
from . import shapes
from .core import Policy, assemble_class

FAILURE_MARKER_CLASS = "minij.Undecompiled"


@dataclass(frozen=True)
class DecompilerSpec:
    """Identity, invocation kind, and declared weaknesses of one backend.

    ``failure_profile`` maps a shape predicate name (see
    ``shapes.SHAPES``) to the outcome category the backend is expected
    to produce on classes with that shape: ``EmptyOutput``,
    ``NotRecompilable``, or ``Deceptive``.
    """

    name: str
    kind: str = "builtin"                       # "builtin" | "external"
    failure_profile: dict[str, str] = field(default_factory=dict)
    command: tuple[str, ...] = ()               # external tools only


@dataclass
class DecompOutput:
    status: str                                 # "source" | "empty"
    source: str
    elapsed_ms: float


@dataclass(frozen=True)
class DecompOptions:
    # Failed methods normally throw the unresolvable marker class so the
    # failure surfaces at recompile time; disguising swaps in a real
    # exception class, which recompiles and fails only under test.
    disguise_failures: bool = False
    ext_timeout_secs: float = 60.0


def _r(slot: int) -> str:
    return f"r{slot}"


_LITERALIST_POLICY = Policy(
    name_param=lambda i, slot: _r(slot),
    name_local=_r,
    name_catch=_r,
    reverse_builder=False,
    insert_casts=True,
    hoist_decls=True,
    wrapper_call_strip="shape",
)


_SUGARER_POLICY = Policy(
    name_param=lambda i, slot: f"a{i}",
    name_local=lambda slot: f"t{slot}",
    name_catch=lambda slot: f"e{slot}",
    reverse_builder=True,
    insert_casts=True,
    hoist_decls=False,
    fold_single_use_temps=True,
    normalize_not_if=True,
    sort_fields=True,
    use_debug_names=True,
    wrapper_call_strip="dollar",
)


def _letter(slot: int) -> str:
    base = string.ascii_lowercase[slot % 26]
    return base if slot < 26 else base + str(slot // 26)


_OPTIMIST_POLICY = Policy(
    name_param=lambda i, slot: _letter(slot),
    name_local=_letter,
    name_catch=_letter,
    reverse_builder=True,
    insert_casts=False,
    hoist_decls=False,
    normalize_not_if=True,
    wrapper_call_strip="shape",
)


LITERALIST = DecompilerSpec("literalist", "builtin", {
    "multi-handler-method": "EmptyOutput",
    "try-over-loop": "NotRecompilable",
    "newline-in-string-constant": "NotRecompilable",
})

SUGARER = DecompilerSpec("sugarer", "builtin", {
    "variant-b-wrapper-call": "NotRecompilable",
    "field-order-dependency": "NotRecompilable",
})

OPTIMIST = DecompilerSpec("optimist", "builtin", {
    "static-setter": "Deceptive",
    "overload-cast-recursion": "Deceptive",
    "null-cast-ambiguity": "NotRecompilable",
})

BUILTINS: dict[str, DecompilerSpec] = {
    s.name: s for s in (LITERALIST, SUGARER, OPTIMIST)
}


def get_decompiler(name: str) -> DecompilerSpec:
    try:
        return BUILTINS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTINS))
        raise KeyError(f"unknown decompiler {name!r} (builtins: {known})") from None


def _unit(bc: BytecodeClass) -> dict[str, BytecodeClass]:
    unit = {bc.name: bc}
    for n in bc.nested:
        unit[n.name] = n
    return unit


def _run_literalist(bc: BytecodeClass, options: DecompOptions) -> Optional[str]:
    if shapes.has_multi_handler_method(bc):
        return None
    exc = "minij.NullRef" if options.disguise_failures else FAILURE_MARKER_CLASS
    policy = replace(
        _LITERALIST_POLICY,
        fail_method=lambda _cls, m: shapes.method_has_try_over_loop(m),
        fail_stmt=lambda: Throw(New(exc, [])),
    )
    ast = assemble_class(_unit(bc), bc, policy)
    return pretty_print(ast, PrintOptions(escape_newlines=False))


def _run_sugarer(bc: BytecodeClass, options: DecompOptions) -> Optional[str]:
    ast = assemble_class(_unit(bc), bc, _SUGARER_POLICY)
    return pretty_print(ast)


def _run_optimist(bc: BytecodeClass, options: DecompOptions) -> Optional[str]:
    ast = assemble_class(_unit(bc), bc, _OPTIMIST_POLICY)
    _strip_qualifiers(ast, ast.name)
    return pretty_print(ast)


_RUNNERS: dict[str, Callable[[BytecodeClass, DecompOptions], Optional[str]]] = {
    "literalist": _run_literalist,
    "sugarer": _run_sugarer,
    "optimist": _run_optimist,
}


def decompile(spec: DecompilerSpec, bc: BytecodeClass,
              options: Optional[DecompOptions] = None) -> DecompOutput:
    """Run one decompiler over one compiled class.

    Returns source text or an empty result; engine crashes propagate so
    the caller can report a tool fault rather than misclassify.
    """
    opts = options if options is not None else DecompOptions()
    if spec.kind == "external":
        from .external import run_external
        return run_external(spec, bc, opts)
    t0 = time.perf_counter()
    text = _RUNNERS[spec.name](bc, opts)
    ms = (time.perf_counter() - t0) * 1000.0
    if text is None:
        return DecompOutput("empty", "", ms)
    return DecompOutput("source", text, ms)


# ---- optimist qualifier stripping ----
#
# Own-class statics lose their class qualifier, `this.` receivers
# disappear, both guarded by every name bound anywhere in the member so
# a shadowing local blocks the rewrite.  The one unguarded path is the
# setter heuristic below, which creates the shadow itself.


def _strip_qualifiers(cls: ClassAst | NestedClassDecl, cname: str) -> None:
    static_fields = {
        m.name: m for m in cls.members
        if isinstance(m, FieldDecl) and m.static
    }
    for m in cls.members:
        if isinstance(m, NestedClassDecl):
            _strip_qualifiers(m, f"{cname}.{m.name}")
        elif isinstance(m, FieldDecl):
            if m.init is not None:
                m.init = _rw_expr(m.init, cname, frozenset())
        elif isinstance(m, StaticBlock):
            _rw_block(m.body, cname, frozenset(_decl_names(m.body)))
        elif isinstance(m, (MethodDecl, CtorDecl)):
            if isinstance(m, MethodDecl) and _bug_setter(m, cname, static_fields):
                continue
            bound = {p.name for p in m.params} | _decl_names(m.body)
            _rw_block(m.body, cname, frozenset(bound))


def _bug_setter(m: MethodDecl, cname: str,
                static_fields: dict[str, FieldDecl]) -> bool:
    """Rename a setter's parameter after the field it stores.

    The rename is meant to be cosmetic, but dropping the qualifier at
    the same time leaves `value = value;`: a self-assignment that
    compiles cleanly and stores nothing.
    """
    if not (m.static and len(m.params) == 1 and len(m.body.stmts) == 1):
        return False
    s = m.body.stmts[0]
    if not (isinstance(s, Assign) and isinstance(s.target, StaticGet)
            and s.target.cls == cname):
        return False
    if not (isinstance(s.value, VarRef) and s.value.name == m.params[0].name):
        return False
    f = static_fields.get(s.target.name)
    if f is None or f.type != m.params[0].type:
        return False
    m.params[0] = Param(m.params[0].type, f.name)
    m.body.stmts[0] = Assign(VarRef(f.name), VarRef(f.name))
    return True


def _decl_names(b: Block) -> set[str]:
    out: set[str] = set()

    def walk(blk: Block) -> None:
        for s in blk.stmts:
            if isinstance(s, VarDecl):
                out.add(s.name)
            elif isinstance(s, Block):
                walk(s)
            elif isinstance(s, If):
                walk(s.then)
                if s.orelse is not None:
                    walk(s.orelse)
            elif isinstance(s, While):
                walk(s.body)
            elif isinstance(s, TryCatch):
                out.add(s.exc_name)
                walk(s.body)
                walk(s.handler)

    walk(b)
    return out


def _rw_expr(e: Expr, cname: str, bound: frozenset) -> Expr:
    if isinstance(e, StaticGet):
        if e.cls == cname and e.name not in bound:
            return VarRef(e.name)
        return e
    if isinstance(e, FieldGet):
        if isinstance(e.target, This) and e.name not in bound:
            return VarRef(e.name)
        e.target = _rw_expr(e.target, cname, bound)
        return e
    if isinstance(e, Call):
        e.args = [_rw_expr(a, cname, bound) for a in e.args]
        if isinstance(e.target, This):
            e.target = None
        elif e.target is not None:
            e.target = _rw_expr(e.target, cname, bound)
        return e
    if isinstance(e, (StaticCall, New)):
        e.args = [_rw_expr(a, cname, bound) for a in e.args]
        return e
    if isinstance(e, Binary):
        e.left = _rw_expr(e.left, cname, bound)
        e.right = _rw_expr(e.right, cname, bound)
        return e
    if isinstance(e, Unary):
        e.operand = _rw_expr(e.operand, cname, bound)
        return e
    if isinstance(e, Cast):
        e.expr = _rw_expr(e.expr, cname, bound)
        return e
    return e


def _rw_target(t, cname: str, bound: frozenset):
    if isinstance(t, StaticGet) and t.cls == cname and t.name not in bound:
        return VarRef(t.name)
    if isinstance(t, FieldGet):
        if isinstance(t.target, This) and t.name not in bound:
            return VarRef(t.name)
        t.target = _rw_expr(t.target, cname, bound)
    return t


def _rw_block(b: Block, cname: str, bound: frozenset) -> None:
    for s in b.stmts:
        _rw_stmt(s, cname, bound)


def _rw_stmt(s: Stmt, cname: str, bound: frozenset) -> None:
    if isinstance(s, VarDecl):
        if s.init is not None:
            s.init = _rw_expr(s.init, cname, bound)
    elif isinstance(s, Assign):
        s.target = _rw_target(s.target, cname, bound)
        s.value = _rw_expr(s.value, cname, bound)
    elif isinstance(s, ExprStmt):
        s.expr = _rw_expr(s.expr, cname, bound)
    elif isinstance(s, Print):
        s.expr = _rw_expr(s.expr, cname, bound)
    elif isinstance(s, Return):
        if s.value is not None:
            s.value = _rw_expr(s.value, cname, bound)
    elif isinstance(s, Throw):
        s.expr = _rw_expr(s.expr, cname, bound)
    elif isinstance(s, Block):
        _rw_block(s, cname, bound)
    elif isinstance(s, If):
        s.cond = _rw_expr(s.cond, cname, bound)
        _rw_block(s.then, cname, bound)
        if s.orelse is not None:
            _rw_block(s.orelse, cname, bound)
    elif isinstance(s, While):
        s.cond = _rw_expr(s.cond, cname, bound)
        _rw_block(s.body, cname, bound)
    elif isinstance(s, TryCatch):
        _rw_block(s.body, cname, bound)
        _rw_block(s.handler, cname, bound)
