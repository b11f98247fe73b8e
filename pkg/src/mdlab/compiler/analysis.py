"""Name resolution and type checking for one compilation unit.

A unit is a top-level class together with its nested classes. The
analyzer produces diagnostics plus the side tables code generation
needs: a type per expression node, a resolution per name/call/new
node, local slot numbers, per-body local counts, and the set of
synthetic wrappers that cross-class calls to private nested
constructors will require.

Rules beyond ordinary typing:
  - instance fields never carry initializers (constructors assign them);
  - a static initializer may read an own-class static field only if that
    field is declared earlier, except compile-time constants
    (static final with a literal initializer), which fold at use sites;
  - final fields: static ones are assigned by their initializer or in a
    static block (not both), instance ones only in own constructors;
  - try/catch does not nest lexically within one method;
  - privacy is unit-scoped (outer and nested classes trust each other).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from mdlab.lang import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Diagnostic, ExprStmt, FieldDecl, FieldGet, If, IntLit,
    MethodDecl, NestedClassDecl, New, NullLit, Param, Print, Return,
    Span, StaticBlock, StaticCall, StaticGet, StrLit, This, Throw, TryCatch,
    Unary, VarDecl, VarRef, While, is_primitive,
)
from mdlab.compiler.env import Env, ClassSym, FieldSym, STR_BUILDER

ERROR_T = "<error>"


@dataclass
class UnitInfo:
    types: dict[int, str] = dc_field(default_factory=dict)
    res: dict[int, tuple] = dc_field(default_factory=dict)
    slots: dict[int, int] = dc_field(default_factory=dict)
    nlocals: dict[int, int] = dc_field(default_factory=dict)
    # nested class name -> sorted private-ctor param tuples needing wrappers
    wrappers: dict[str, list[tuple[str, ...]]] = dc_field(default_factory=dict)


def _is_class_like(t: str) -> bool:
    return t == "null" or not (is_primitive(t) or t in ("void", ERROR_T))


class _UnitAnalyzer:
    def __init__(self, env: Env, unit: ClassAst):
        self.env = env
        self.unit = unit
        self.diags: list[Diagnostic] = []
        self.info = UnitInfo()
        # per-body state
        self.cls: ClassSym | None = None
        self.scopes: list[dict[str, tuple[int, str]]] = []
        self.next_slot = 0
        self.static_ctx = True
        self.in_ctor = False
        self.in_static_block = False
        self.in_clinit = False
        self.member_index = 0
        self.ret_type: str | None = None
        self.loop_depth = 0
        self.in_try = False
        self.clinit_slots = 0

    def err(self, msg: str, span: Span) -> None:
        self.diags.append(Diagnostic(msg, span))

    # ---- types ----

    def check_type(self, t: str, span: Span, allow_void: bool = False) -> None:
        if t == "void":
            if not allow_void:
                self.err("void is not a value type", span)
            return
        if is_primitive(t):
            return
        sym = self.env.classes.get(t)
        if sym is None:
            self.err(f"unknown type {t}", span)
            return
        if sym.private and sym.unit != self.env.unit_of(self.cls.name):
            self.err(f"{t} is private to {sym.unit}", span)

    def assignable(self, src: str, dst: str) -> bool:
        if ERROR_T in (src, dst):
            return True
        if src == "void":
            return False
        if is_primitive(dst):
            return src == dst
        return src == "null" or self.env.is_subtype(src, dst)

    # ---- scopes ----

    def lookup_local(self, name: str):
        for scope in reversed(self.scopes):
            hit = scope.get(name)
            if hit is not None:
                return hit
        return None

    def declare_local(self, name: str, t: str, span: Span) -> int:
        if self.lookup_local(name) is not None:
            self.err(f"{name} is already declared", span)
        slot = self.next_slot
        self.next_slot += 1
        self.scopes[-1][name] = (slot, t)
        return slot

    # ---- member access helpers ----

    def check_private(self, private: bool, owner: str, what: str, span: Span) -> None:
        if private and self.env.unit_of(owner) != self.env.unit_of(self.cls.name):
            self.err(f"{what} is private to {self.env.unit_of(owner)}", span)

    def read_static_field(self, f: FieldSym, node, span: Span) -> str:
        self.check_private(f.private, f.owner, f"{f.owner}.{f.name}", span)
        if f.foldable:
            self.info.res[id(node)] = ("const", f.const_value, f.type)
            return f.type
        if (
            self.in_clinit
            and f.owner == self.cls.name
            and f.decl_index >= self.member_index
        ):
            self.err(f"forward reference to static field {f.name}", span)
        self.info.res[id(node)] = ("sfield", f.owner, f.name, f.type)
        return f.type

    def resolve_overload(self, param_sets: list[tuple[str, ...]], argts: list[str]):
        """Index of the unique most-concrete applicable overload,
        'ambiguous', or None when nothing applies."""
        def arg_ok(a: str, p: str) -> bool:
            if ERROR_T in (a, p):
                return True
            if is_primitive(p):
                return a == p
            return a == "null" or self.env.is_subtype(a, p)

        def tighter(c: tuple, d: tuple) -> bool:
            for cp, dp in zip(c, d):
                if cp == dp:
                    continue
                if is_primitive(cp) or is_primitive(dp):
                    return False
                if not self.env.is_subtype(cp, dp):
                    return False
            return True

        apps = [
            i for i, ps in enumerate(param_sets)
            if len(ps) == len(argts) and all(arg_ok(a, p) for a, p in zip(argts, ps))
        ]
        if not apps:
            return None
        if len(apps) == 1:
            return apps[0]
        mins = [
            i for i in apps
            if all(tighter(param_sets[i], param_sets[j]) for j in apps if j != i)
        ]
        if len(mins) == 1:
            return mins[0]
        return "ambiguous"

    # ---- expressions ----

    def expr(self, e) -> str:
        t = self._expr(e)
        self.info.types[id(e)] = t
        return t

    def _expr(self, e) -> str:
        env = self.env
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, StrLit):
            return "str"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, NullLit):
            return "null"
        if isinstance(e, This):
            if self.static_ctx:
                self.err("this is not available in a static context", e.span)
                return ERROR_T
            return self.cls.name
        if isinstance(e, VarRef):
            hit = self.lookup_local(e.name)
            if hit is not None:
                slot, t = hit
                self.info.res[id(e)] = ("local", slot, t)
                return t
            f = env.lookup_field(self.cls.name, e.name)
            if f is not None:
                if f.static:
                    return self.read_static_field(f, e, e.span)
                if self.static_ctx:
                    self.err(f"instance field {e.name} read from static context", e.span)
                    return ERROR_T
                self.info.res[id(e)] = ("ifield", f.owner, e.name, f.type)
                return f.type
            self.err(f"unknown name {e.name}", e.span)
            return ERROR_T
        if isinstance(e, StaticGet):
            if not env.has(e.cls):
                self.err(f"unknown class {e.cls}", e.span)
                return ERROR_T
            self.check_type(e.cls, e.span)
            f = env.lookup_field(e.cls, e.name)
            if f is None or not f.static:
                self.err(f"no static field {e.name} on {e.cls}", e.span)
                return ERROR_T
            return self.read_static_field(f, e, e.span)
        if isinstance(e, FieldGet):
            t = self.expr(e.target)
            if t == ERROR_T:
                return ERROR_T
            if not _is_class_like(t) or t == "null" or t == STR_BUILDER:
                self.err(f"no field {e.name} on {t}", e.span)
                return ERROR_T
            f = env.lookup_field(t, e.name)
            if f is None or f.static:
                self.err(f"no instance field {e.name} on {t}", e.span)
                return ERROR_T
            self.check_private(f.private, f.owner, f"{f.owner}.{f.name}", e.span)
            self.info.res[id(e)] = ("ifield", f.owner, e.name, f.type)
            return f.type
        if isinstance(e, Binary):
            return self._binary(e)
        if isinstance(e, Unary):
            t = self.expr(e.operand)
            want = "int" if e.op == "-" else "bool"
            if t not in (want, ERROR_T):
                self.err(f"operator {e.op} needs {want}, got {t}", e.span)
            return want
        if isinstance(e, Cast):
            self.check_type(e.type, e.span)
            t = self.expr(e.expr)
            if t != ERROR_T and not _is_class_like(t):
                self.err(f"cannot cast {t}; casts apply to class types", e.span)
            if not env.has(e.type):
                return ERROR_T
            return e.type
        if isinstance(e, Call):
            return self._call(e)
        if isinstance(e, StaticCall):
            return self._static_call(e)
        if isinstance(e, New):
            return self._new(e)
        raise TypeError(f"unexpected expression {type(e).__name__}")

    def _binary(self, e: Binary) -> str:
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        op = e.op
        if op == "+":
            if "str" in (lt, rt):
                for t, side in ((lt, e.left), (rt, e.right)):
                    if t == "void":
                        self.err("void value in concatenation", side.span)
                return "str"
            if ERROR_T in (lt, rt):
                return "int"
            if lt == rt == "int":
                return "int"
            self.err(f"operator + needs ints or a string, got {lt} and {rt}", e.span)
            return ERROR_T
        if op in ("-", "*", "/", "%"):
            if not (lt in ("int", ERROR_T) and rt in ("int", ERROR_T)):
                self.err(f"operator {op} needs ints, got {lt} and {rt}", e.span)
            return "int"
        if op in ("<", "<=", ">", ">="):
            if not (lt in ("int", ERROR_T) and rt in ("int", ERROR_T)):
                self.err(f"operator {op} needs ints, got {lt} and {rt}", e.span)
            return "bool"
        if op in ("==", "!="):
            if ERROR_T in (lt, rt):
                return "bool"
            if lt == rt and lt in ("int", "bool", "str"):
                return "bool"
            if _is_class_like(lt) and _is_class_like(rt):
                return "bool"
            self.err(f"cannot compare {lt} with {rt}", e.span)
            return "bool"
        raise ValueError(f"unknown operator {op}")

    def _call(self, e: Call) -> str:
        env = self.env
        if e.target is None:
            cands = env.lookup_methods(self.cls.name, e.name)
            if not cands:
                self.err(f"unknown method {e.name}", e.span)
                for a in e.args:
                    self.expr(a)
                return ERROR_T
            argts = [self.expr(a) for a in e.args]
            pick = self.resolve_overload([m.params for m in cands], argts)
            if pick is None:
                self.err(f"no applicable overload of {e.name}", e.span)
                return ERROR_T
            if pick == "ambiguous":
                self.err(f"ambiguous call to {e.name}", e.span)
                return ERROR_T
            m = cands[pick]
            self.check_private(m.private, m.owner, f"{m.owner}.{m.name}", e.span)
            if m.static:
                self.info.res[id(e)] = ("bare_static", m.owner, m.name, m.params, m.ret)
            else:
                if self.static_ctx:
                    self.err(f"instance method {e.name} called from static context", e.span)
                    return ERROR_T
                self.info.res[id(e)] = ("bare_virt", m.owner, m.name, m.params, m.ret)
            return m.ret

        t = self.expr(e.target)
        if t == ERROR_T:
            for a in e.args:
                self.expr(a)
            return ERROR_T
        if t == STR_BUILDER:
            argts = [self.expr(a) for a in e.args]
            if e.name == "append" and len(argts) == 1:
                if argts[0] == "void":
                    self.err("cannot append a void value", e.span)
                self.info.res[id(e)] = ("builder_append",)
                return STR_BUILDER
            if e.name == "str" and not argts:
                self.info.res[id(e)] = ("builder_str",)
                return "str"
            self.err(f"no builder method {e.name} with {len(argts)} arguments", e.span)
            return ERROR_T
        if not _is_class_like(t) or t == "null":
            self.err(f"method call on non-object type {t}", e.span)
            for a in e.args:
                self.expr(a)
            return ERROR_T
        cands = [m for m in env.lookup_methods(t, e.name)]
        argts = [self.expr(a) for a in e.args]
        if not cands:
            self.err(f"no method {e.name} on {t}", e.span)
            return ERROR_T
        inst = [m for m in cands if not m.static]
        if not inst:
            self.err(f"{e.name} is static; call it through the class name", e.span)
            return ERROR_T
        pick = self.resolve_overload([m.params for m in inst], argts)
        if pick is None:
            self.err(f"no applicable overload of {t}.{e.name}", e.span)
            return ERROR_T
        if pick == "ambiguous":
            self.err(f"ambiguous call to {t}.{e.name}", e.span)
            return ERROR_T
        m = inst[pick]
        self.check_private(m.private, m.owner, f"{m.owner}.{m.name}", e.span)
        self.info.res[id(e)] = ("virt", m.owner, m.name, m.params, m.ret)
        return m.ret

    def _static_call(self, e: StaticCall) -> str:
        env = self.env
        if not env.has(e.cls):
            self.err(f"unknown class {e.cls}", e.span)
            for a in e.args:
                self.expr(a)
            return ERROR_T
        self.check_type(e.cls, e.span)
        cands = [m for m in env.lookup_methods(e.cls, e.name) if m.static]
        argts = [self.expr(a) for a in e.args]
        if not cands:
            self.err(f"no static method {e.name} on {e.cls}", e.span)
            return ERROR_T
        pick = self.resolve_overload([m.params for m in cands], argts)
        if pick is None:
            self.err(f"no applicable overload of {e.cls}.{e.name}", e.span)
            return ERROR_T
        if pick == "ambiguous":
            self.err(f"ambiguous call to {e.cls}.{e.name}", e.span)
            return ERROR_T
        m = cands[pick]
        self.check_private(m.private, m.owner, f"{m.owner}.{m.name}", e.span)
        self.info.res[id(e)] = ("smethod", m.owner, m.name, m.params, m.ret)
        return m.ret

    def _new(self, e: New) -> str:
        env = self.env
        sym = env.classes.get(e.cls)
        if sym is None:
            self.err(f"unknown class {e.cls}", e.span)
            for a in e.args:
                self.expr(a)
            return ERROR_T
        self.check_type(e.cls, e.span)
        argts = [self.expr(a) for a in e.args]
        if e.cls == STR_BUILDER:
            if argts:
                self.err("the builder constructor takes no arguments", e.span)
            self.info.res[id(e)] = ("builder_new",)
            return STR_BUILDER
        ctors = env.lookup_ctors(e.cls)
        pick = self.resolve_overload([c.params for c in ctors], argts)
        if pick is None:
            self.err(f"no applicable constructor {e.cls}({','.join(argts)})", e.span)
            return ERROR_T
        if pick == "ambiguous":
            self.err(f"ambiguous constructor call {e.cls}", e.span)
            return ERROR_T
        c = ctors[pick]
        if c.private:
            if env.unit_of(e.cls) != env.unit_of(self.cls.name):
                self.err(f"constructor of {e.cls} is private", e.span)
                return e.cls
            wrapper = self.cls.name != e.cls
        else:
            wrapper = False
        if wrapper:
            bucket = self.info.wrappers.setdefault(e.cls, [])
            if c.params not in bucket:
                bucket.append(c.params)
        self.info.res[id(e)] = ("new", e.cls, c.params, wrapper)
        return e.cls

    # ---- statements ----

    def stmt(self, s) -> None:
        if isinstance(s, VarDecl):
            self.check_type(s.type, s.span)
            if s.init is not None:
                t = self.expr(s.init)
                if not self.assignable(t, s.type):
                    self.err(f"cannot assign {t} to {s.type}", s.span)
            slot = self.declare_local(s.name, s.type, s.span)
            self.info.slots[id(s)] = slot
        elif isinstance(s, Assign):
            self._assign(s)
        elif isinstance(s, ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, Print):
            t = self.expr(s.expr)
            if t == "void":
                self.err("cannot print a void value", s.span)
        elif isinstance(s, Block):
            self.scopes.append({})
            for inner in s.stmts:
                self.stmt(inner)
            self.scopes.pop()
        elif isinstance(s, If):
            t = self.expr(s.cond)
            if t not in ("bool", ERROR_T):
                self.err(f"condition must be bool, got {t}", s.span)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, While):
            t = self.expr(s.cond)
            if t not in ("bool", ERROR_T):
                self.err(f"condition must be bool, got {t}", s.span)
            self.loop_depth += 1
            self.stmt(s.body)
            self.loop_depth -= 1
        elif isinstance(s, TryCatch):
            if self.in_try:
                self.err("try blocks do not nest within a method", s.span)
            self.check_type(s.exc_type, s.span)
            if self.env.has(s.exc_type) and not _is_class_like(s.exc_type):
                self.err(f"cannot catch non-class type {s.exc_type}", s.span)
            self.in_try = True
            self.stmt(s.body)
            self.scopes.append({})
            slot = self.declare_local(s.exc_name, s.exc_type, s.span)
            self.info.slots[id(s)] = slot
            self.stmt(s.handler)
            self.scopes.pop()
            self.in_try = False
        elif isinstance(s, Throw):
            t = self.expr(s.expr)
            if t not in (ERROR_T, "null") and not _is_class_like(t):
                self.err(f"cannot throw {t}", s.span)
        elif isinstance(s, Return):
            if self.ret_type is None or self.ret_type == "void":
                if s.value is not None:
                    self.err("cannot return a value here", s.span)
                elif self.ret_type is None and s.value is None:
                    pass
            else:
                if s.value is None:
                    self.err(f"missing return value of type {self.ret_type}", s.span)
                else:
                    t = self.expr(s.value)
                    if not self.assignable(t, self.ret_type):
                        self.err(f"cannot return {t} as {self.ret_type}", s.span)
        elif isinstance(s, Break):
            if self.loop_depth == 0:
                self.err("break outside a loop", s.span)
        elif isinstance(s, Continue):
            if self.loop_depth == 0:
                self.err("continue outside a loop", s.span)
        else:
            raise TypeError(f"unexpected statement {type(s).__name__}")

    def _assign(self, s: Assign) -> None:
        vt = self.expr(s.value)
        target = s.target
        if isinstance(target, VarRef):
            hit = self.lookup_local(target.name)
            if hit is not None:
                slot, t = hit
                self.info.res[id(target)] = ("local", slot, t)
                if not self.assignable(vt, t):
                    self.err(f"cannot assign {vt} to {t}", s.span)
                return
            f = self.env.lookup_field(self.cls.name, target.name)
            if f is None:
                self.err(f"unknown name {target.name}", target.span)
                return
            if f.static:
                self.info.res[id(target)] = ("sfield", f.owner, f.name, f.type)
            else:
                if self.static_ctx:
                    self.err(f"instance field {f.name} written from static context", s.span)
                    return
                self.info.res[id(target)] = ("ifield", f.owner, f.name, f.type)
            self._check_field_store(f, s.span)
            if not self.assignable(vt, f.type):
                self.err(f"cannot assign {vt} to {f.type}", s.span)
        elif isinstance(target, StaticGet):
            if not self.env.has(target.cls):
                self.err(f"unknown class {target.cls}", target.span)
                return
            f = self.env.lookup_field(target.cls, target.name)
            if f is None or not f.static:
                self.err(f"no static field {target.name} on {target.cls}", target.span)
                return
            self.check_private(f.private, f.owner, f"{f.owner}.{f.name}", target.span)
            self.info.res[id(target)] = ("sfield", f.owner, f.name, f.type)
            self._check_field_store(f, s.span)
            if not self.assignable(vt, f.type):
                self.err(f"cannot assign {vt} to {f.type}", s.span)
        elif isinstance(target, FieldGet):
            tt = self.expr(target.target)
            if tt == ERROR_T:
                return
            if not _is_class_like(tt) or tt in ("null", STR_BUILDER):
                self.err(f"no field {target.name} on {tt}", target.span)
                return
            f = self.env.lookup_field(tt, target.name)
            if f is None or f.static:
                self.err(f"no instance field {target.name} on {tt}", target.span)
                return
            self.check_private(f.private, f.owner, f"{f.owner}.{f.name}", target.span)
            self.info.res[id(target)] = ("ifield", f.owner, f.name, f.type)
            self._check_field_store(f, s.span, via_this=isinstance(target.target, This))
            if not self.assignable(vt, f.type):
                self.err(f"cannot assign {vt} to {f.type}", s.span)
        else:
            raise TypeError("unassignable target")

    def _check_field_store(self, f: FieldSym, span: Span, via_this: bool = True) -> None:
        if not f.final:
            return
        if f.static:
            ok = (
                self.in_static_block
                and f.owner == self.cls.name
                and (f.decl is None or f.decl.init is None)
            )
            if not ok:
                self.err(f"final field {f.name} cannot be reassigned", span)
        else:
            ok = self.in_ctor and f.owner == self.cls.name and via_this
            if not ok:
                self.err(f"final field {f.name} can only be set in a constructor of {f.owner}", span)

    # ---- members ----

    def _body(
        self, *, static: bool, params: list[Param], ret: str | None,
        in_ctor: bool = False, in_static_block: bool = False,
        clinit_part: bool = False,
    ):
        self.scopes = [{}]
        # static initializer parts share one frame, hence one slot counter
        self.next_slot = self.clinit_slots if clinit_part else (0 if static else 1)
        self.static_ctx = static
        self.in_ctor = in_ctor
        self.in_static_block = in_static_block
        self.in_clinit = clinit_part
        self.ret_type = ret
        self.loop_depth = 0
        self.in_try = False
        seen = set()
        for p in params:
            self.check_type(p.type, p.span)
            if p.name in seen:
                self.err(f"duplicate parameter {p.name}", p.span)
            seen.add(p.name)
            slot = self.next_slot
            self.next_slot += 1
            self.scopes[0][p.name] = (slot, p.type)
            self.info.slots[id(p)] = slot

    def analyze_member(self, m, index: int) -> None:
        self.member_index = index
        if isinstance(m, FieldDecl):
            self.check_type(m.type, m.span)
            if m.init is not None and not m.static:
                self.err(
                    f"instance field {m.name} cannot have an initializer; assign it in a constructor",
                    m.span,
                )
            if m.init is not None and m.static:
                self._body(static=True, params=[], ret=None, clinit_part=True)
                t = self.expr(m.init)
                self.in_clinit = False
                if not self.assignable(t, m.type):
                    self.err(f"cannot initialize {m.type} field with {t}", m.span)
        elif isinstance(m, MethodDecl):
            self.check_type(m.ret, m.span, allow_void=True)
            self._body(static=m.static, params=m.params, ret=m.ret)
            self.stmt(m.body)
            self.info.nlocals[id(m)] = self.next_slot
            if m.ret != "void" and not _terminates(m.body):
                self.err(f"method {m.name} can finish without returning {m.ret}", m.span)
        elif isinstance(m, CtorDecl):
            self._body(static=False, params=m.params, ret=None, in_ctor=True)
            self.stmt(m.body)
            self.info.nlocals[id(m)] = self.next_slot
        elif isinstance(m, StaticBlock):
            self._body(
                static=True, params=[], ret=None,
                in_static_block=True, clinit_part=True,
            )
            self.stmt(m.body)
            self.clinit_slots = self.next_slot
            self.in_clinit = False
        elif isinstance(m, NestedClassDecl):
            pass
        else:
            raise TypeError(f"unexpected member {type(m).__name__}")

    def analyze_class(self, sym: ClassSym, members) -> None:
        self.cls = sym
        if sym.super_name is not None:
            sup_ctors = self.env.lookup_ctors(sym.super_name)
            noarg = [c for c in sup_ctors if not c.params]
            span = sym.ast.span if sym.ast is not None else (0, 0)
            if not noarg:
                self.err(f"superclass {sym.super_name} has no no-argument constructor", span)
            elif noarg[0].private and self.env.unit_of(sym.super_name) != self.env.unit_of(sym.name):
                self.err(f"the {sym.super_name} no-argument constructor is private", span)
        self.clinit_slots = 0
        for idx, m in enumerate(members):
            self.analyze_member(m, idx)
        self.info.nlocals[id(sym.ast)] = self.clinit_slots

    def run(self) -> None:
        outer = self.env.classes.get(self.unit.name)
        if outer is None or outer.ast is not self.unit:
            self.err(f"class {self.unit.name} is not registered", self.unit.span)
            return
        self.analyze_class(outer, self.unit.members)
        for m in self.unit.members:
            if isinstance(m, NestedClassDecl):
                nsym = self.env.classes.get(f"{self.unit.name}.{m.name}")
                if nsym is not None and nsym.ast is m:
                    self.analyze_class(nsym, m.members)


def _contains_loop_break(s) -> bool:
    if isinstance(s, Break):
        return True
    if isinstance(s, Block):
        return any(_contains_loop_break(x) for x in s.stmts)
    if isinstance(s, If):
        return _contains_loop_break(s.then) or (
            s.orelse is not None and _contains_loop_break(s.orelse))
    if isinstance(s, TryCatch):
        return _contains_loop_break(s.body) or _contains_loop_break(s.handler)
    return False  # nested While owns its own breaks


def _terminates(s) -> bool:
    """Conservative: can control not fall out the bottom of this statement?"""
    if isinstance(s, (Return, Throw)):
        return True
    if isinstance(s, Block):
        return any(_terminates(x) for x in s.stmts)
    if isinstance(s, If):
        return s.orelse is not None and _terminates(s.then) and _terminates(s.orelse)
    if isinstance(s, While):
        return isinstance(s.cond, BoolLit) and s.cond.value and not _contains_loop_break(s.body)
    if isinstance(s, TryCatch):
        return _terminates(s.body) and _terminates(s.handler)
    return False


def analyze_unit(env: Env, unit: ClassAst) -> tuple[list[Diagnostic], UnitInfo]:
    a = _UnitAnalyzer(env, unit)
    a.run()
    return a.diags, a.info
