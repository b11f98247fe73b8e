"""Lowering from analyzed ASTs to bytecode, in two divergent styles.

Variant A branches with IFEQ (jump when false), keeps loop tests at the
top, lowers string concatenation through the builder idiom, and types
the synthetic wrapper's disambiguation parameter as a fresh empty
class (`Outer$1`). Variant B branches with IFNE around swapped blocks,
moves loop tests to the bottom behind an initial GOTO, emits a single
CONCAT per join, and types the wrapper parameter as the nested class
itself. Both fold final static fields with literal initializers at
their use sites while still emitting the field and its <clinit> store.

Member emission order is fixed so that a faithful decompile/recompile
round trip reproduces the bytecode exactly: declared methods and
constructors in source order, then a synthesized default constructor,
then <clinit>, then synthetic wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass

from mdlab.lang import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Diagnostic, ExprStmt, FieldDecl, FieldGet, If, IntLit,
    MethodDecl, NestedClassDecl, New, NullLit, Print, Return, StaticBlock,
    StaticCall, StaticGet, StrLit, This, Throw, ToolFault, TryCatch, Unary,
    VarDecl, VarRef, While, annotate_errors, parse,
)
from mdlab.compiler.env import Env, build_env
from mdlab.compiler.analysis import UnitInfo, analyze_unit
from mdlab.vm.model import (
    BytecodeClass, FieldInfo, Handler, Instr, MethodBody, TERMINAL_OPS,
)
from mdlab.vm.verify import compute_max_stack, verify_class


@dataclass(frozen=True)
class Variant:
    name: str
    concat_builder: bool      # builder idiom vs a CONCAT instruction
    jump_on_true: bool        # IFNE with swapped blocks vs IFEQ
    bottom_test_loops: bool   # GOTO-to-test loops vs top-test loops
    wrapper_fresh_class: bool # wrapper param: fresh Outer$1 vs the nested class
    emit_local_names: bool    # debug name table (off in both shipped variants)


VARIANT_A = Variant("A", True, False, False, True, False)
VARIANT_B = Variant("B", False, True, True, False, False)
VARIANTS = {"A": VARIANT_A, "B": VARIANT_B}


class _Label:
    __slots__ = ("pos",)

    def __init__(self):
        self.pos: int | None = None


class _Pool:
    def __init__(self):
        self.entries: list[tuple] = []
        self.index: dict[tuple, int] = {}

    def ref(self, entry: tuple) -> int:
        k = self.index.get(entry)
        if k is None:
            k = len(self.entries)
            self.entries.append(entry)
            self.index[entry] = k
        return k


class _MethodGen:
    def __init__(self, owner: "_ClassGen"):
        self.o = owner
        self.pool = owner.pool
        self.code: list[list] = []      # [op, arg-or-_Label]
        self.handlers: list[list] = []  # [startL, endL, targetL, type]
        self.loops: list[tuple[_Label, _Label]] = []

    # ---- emission primitives ----

    def emit(self, op: str, arg=None) -> None:
        self.code.append([op, arg])

    def mark(self) -> _Label:
        lab = _Label()
        self.code.append(["LABEL", lab])
        return lab

    def finalize(self) -> tuple[list[Instr], list[Handler]]:
        pos = 0
        for entry in self.code:
            if entry[0] == "LABEL":
                entry[1].pos = pos
            else:
                pos += 1 if entry[1] is None else 2
        out: list[Instr] = []
        for op, arg in self.code:
            if op == "LABEL":
                continue
            if isinstance(arg, _Label):
                arg = arg.pos
            out.append(Instr(op, arg))
        handlers = [
            Handler(s.pos, e.pos, t.pos, ty)
            for s, e, t, ty in self.handlers
            if s.pos != e.pos
        ]
        return out, handlers

    # ---- expressions ----

    def load_const(self, value, t: str) -> None:
        if t == "bool":
            self.emit("CONST_TRUE" if value else "CONST_FALSE")
        elif t == "int":
            self.emit("LDC", self.pool.ref(("int", value)))
        else:
            self.emit("LDC", self.pool.ref(("str", value)))

    def _concat_parts(self, e) -> list:
        if (
            isinstance(e, Binary)
            and e.op == "+"
            and self.o.info.types.get(id(e)) == "str"
        ):
            return self._concat_parts(e.left) + [e.right]
        return [e]

    def expr(self, e) -> None:
        res = self.o.info.res.get(id(e))
        if isinstance(e, IntLit):
            self.emit("LDC", self.pool.ref(("int", e.value)))
        elif isinstance(e, StrLit):
            self.emit("LDC", self.pool.ref(("str", e.value)))
        elif isinstance(e, BoolLit):
            self.emit("CONST_TRUE" if e.value else "CONST_FALSE")
        elif isinstance(e, NullLit):
            self.emit("ACONST_NULL")
        elif isinstance(e, This):
            self.emit("LOAD", 0)
        elif isinstance(e, (VarRef, StaticGet)):
            kind = res[0]
            if kind == "local":
                self.emit("LOAD", res[1])
            elif kind == "const":
                self.load_const(res[1], res[2])
            elif kind == "sfield":
                self.emit("GETSTATIC", self.pool.ref(("fieldref", res[1], res[2], res[3])))
            else:  # bare name naming an instance field
                self.emit("LOAD", 0)
                self.emit("GETFIELD", self.pool.ref(("fieldref", res[1], res[2], res[3])))
        elif isinstance(e, FieldGet):
            self.expr(e.target)
            self.emit("GETFIELD", self.pool.ref(("fieldref", res[1], res[2], res[3])))
        elif isinstance(e, Binary):
            self._binary(e)
        elif isinstance(e, Unary):
            self.expr(e.operand)
            self.emit("NEG" if e.op == "-" else "NOT")
        elif isinstance(e, Cast):
            self.expr(e.expr)  # casts are erased
        elif isinstance(e, Call):
            self._call(e, res)
        elif isinstance(e, StaticCall):
            for a in e.args:
                self.expr(a)
            _, owner, name, params, ret = res
            self.emit("INVOKESTATIC", self.pool.ref(("methodref", owner, name, params, ret)))
        elif isinstance(e, New):
            self._new(e, res)
        else:
            raise ToolFault(f"no lowering for {type(e).__name__}")

    def _binary(self, e: Binary) -> None:
        if e.op == "+" and self.o.info.types.get(id(e)) == "str":
            parts = self._concat_parts(e)
            if self.o.variant.concat_builder:
                self.emit("BUILDER_NEW")
                for p in parts:
                    self.expr(p)
                    self.emit("BUILDER_APPEND")
                self.emit("BUILDER_STR")
            else:
                self.expr(parts[0])
                for p in parts[1:]:
                    self.expr(p)
                    self.emit("CONCAT")
            return
        self.expr(e.left)
        self.expr(e.right)
        op = {
            "+": "ADD", "-": "SUB", "*": "MUL", "/": "DIV", "%": "MOD",
            "==": "CMPEQ", "!=": "CMPNE", "<": "CMPLT", "<=": "CMPLE",
            ">": "CMPGT", ">=": "CMPGE",
        }[e.op]
        self.emit(op)

    def _call(self, e: Call, res: tuple) -> None:
        kind = res[0]
        if kind == "builder_append":
            self.expr(e.target)
            self.expr(e.args[0])
            self.emit("BUILDER_APPEND")
            return
        if kind == "builder_str":
            self.expr(e.target)
            self.emit("BUILDER_STR")
            return
        if kind in ("virt", "bare_virt"):
            if kind == "virt":
                self.expr(e.target)
            else:
                self.emit("LOAD", 0)
            for a in e.args:
                self.expr(a)
            _, owner, name, params, ret = res
            self.emit("INVOKEVIRT", self.pool.ref(("methodref", owner, name, params, ret)))
            return
        if kind == "bare_static":
            for a in e.args:
                self.expr(a)
            _, owner, name, params, ret = res
            self.emit("INVOKESTATIC", self.pool.ref(("methodref", owner, name, params, ret)))
            return
        raise ToolFault(f"bad call resolution {kind}")

    def _new(self, e: New, res: tuple) -> None:
        if res[0] == "builder_new":
            self.emit("BUILDER_NEW")
            return
        _, cls, params, wrapper = res
        self.emit("NEW", self.pool.ref(("typeref", cls)))
        for a in e.args:
            self.expr(a)
        if wrapper:
            extra = self.o.wrapper_param_type(cls)
            self.emit("ACONST_NULL")
            params = params + (extra,)
        self.emit("INVOKESPECIAL", self.pool.ref(("methodref", cls, "<init>", params, "void")))

    # ---- statements ----

    def stmt(self, s) -> None:
        v = self.o.variant
        if isinstance(s, VarDecl):
            if s.init is not None:
                self.expr(s.init)
                self.emit("STORE", self.o.info.slots[id(s)])
        elif isinstance(s, Assign):
            self._assign(s)
        elif isinstance(s, ExprStmt):
            self.expr(s.expr)
            if self.o.info.types.get(id(s.expr)) != "void":
                self.emit("POP")
        elif isinstance(s, Print):
            self.expr(s.expr)
            self.emit("PRINT")
        elif isinstance(s, Block):
            for inner in s.stmts:
                self.stmt(inner)
        elif isinstance(s, If):
            self._if(s)
        elif isinstance(s, While):
            self._while(s)
        elif isinstance(s, TryCatch):
            self._try(s)
        elif isinstance(s, Throw):
            self.expr(s.expr)
            self.emit("THROW")
        elif isinstance(s, Return):
            if s.value is None:
                self.emit("RETURN")
            else:
                self.expr(s.value)
                self.emit("IRETURN" if self.o.cur_ret in ("int", "bool") else "ARETURN")
        elif isinstance(s, Break):
            self.emit("GOTO", self.loops[-1][1])
        elif isinstance(s, Continue):
            self.emit("GOTO", self.loops[-1][0])
        else:
            raise ToolFault(f"no lowering for {type(s).__name__}")

    def _assign(self, s: Assign) -> None:
        res = self.o.info.res.get(id(s.target))
        if res is None:
            raise ToolFault("unresolved assignment target")
        kind = res[0]
        if kind == "local":
            self.expr(s.value)
            self.emit("STORE", res[1])
        elif kind == "sfield":
            self.expr(s.value)
            self.emit("PUTSTATIC", self.pool.ref(("fieldref", res[1], res[2], res[3])))
        else:
            if isinstance(s.target, FieldGet):
                self.expr(s.target.target)
            else:
                self.emit("LOAD", 0)
            self.expr(s.value)
            self.emit("PUTFIELD", self.pool.ref(("fieldref", res[1], res[2], res[3])))

    def _last_terminal(self) -> bool:
        # A trailing label is an inbound edge, so the point is reachable.
        if self.code and self.code[-1][0] != "LABEL":
            return self.code[-1][0] in TERMINAL_OPS
        return False

    def _if(self, s: If) -> None:
        end = _Label()
        if not self.o.variant.jump_on_true:
            self.expr(s.cond)
            if s.orelse is None:
                self.emit("IFEQ", end)
                self.stmt(s.then)
            else:
                orelse = _Label()
                self.emit("IFEQ", orelse)
                self.stmt(s.then)
                if not self._last_terminal():
                    self.emit("GOTO", end)
                self.code.append(["LABEL", orelse])
                self.stmt(s.orelse)
        else:
            then = _Label()
            self.expr(s.cond)
            self.emit("IFNE", then)
            if s.orelse is not None:
                self.stmt(s.orelse)
            if not self._last_terminal():
                self.emit("GOTO", end)
            self.code.append(["LABEL", then])
            self.stmt(s.then)
        self.code.append(["LABEL", end])

    def _while(self, s: While) -> None:
        exit_ = _Label()
        if isinstance(s.cond, BoolLit) and s.cond.value:
            # Constant-true loop: no test to branch past the end of code.
            top = self.mark()
            self.loops.append((top, exit_))
            self.stmt(s.body)
            self.loops.pop()
            if not self._last_terminal():
                self.emit("GOTO", top)
            self.code.append(["LABEL", exit_])
            return
        if not self.o.variant.bottom_test_loops:
            top = self.mark()
            self.expr(s.cond)
            self.emit("IFEQ", exit_)
            self.loops.append((top, exit_))
            self.stmt(s.body)
            self.loops.pop()
            self.emit("GOTO", top)
        else:
            test = _Label()
            body = _Label()
            self.emit("GOTO", test)
            self.code.append(["LABEL", body])
            self.loops.append((test, exit_))
            self.stmt(s.body)
            self.loops.pop()
            self.code.append(["LABEL", test])
            self.expr(s.cond)
            self.emit("IFNE", body)
        self.code.append(["LABEL", exit_])

    def _try(self, s: TryCatch) -> None:
        before = len([c for c in self.code if c[0] != "LABEL"])
        start = self.mark()
        self.stmt(s.body)
        after_body = len([c for c in self.code if c[0] != "LABEL"])
        body_terminal = self._last_terminal()
        end = self.mark()
        if after_body == before:
            return  # nothing to protect; the handler is unreachable
        done = _Label()
        if not body_terminal:
            self.emit("GOTO", done)
        target = self.mark()
        self.emit("STORE", self.o.info.slots[id(s)])
        self.stmt(s.handler)
        self.code.append(["LABEL", done])
        self.handlers.append([start, end, target, s.exc_type])


class _ClassGen:
    def __init__(self, env: Env, info: UnitInfo, variant: Variant, unit_name: str):
        self.env = env
        self.info = info
        self.variant = variant
        self.unit_name = unit_name
        self.pool = _Pool()
        self.cur_ret = "void"

    def wrapper_param_type(self, nested_cls: str) -> str:
        return f"{self.unit_name}$1" if self.variant.wrapper_fresh_class else nested_cls

    def _method_shell(self, gen: _MethodGen, *, name, params, ret, static,
                      private, synthetic, nlocals, bc: BytecodeClass) -> MethodBody:
        code, handlers = gen.finalize()
        m = MethodBody(
            name=name, params=params, ret=ret, static=static, private=private,
            synthetic=synthetic, max_locals=nlocals, code=code, handlers=handlers,
        )
        m.max_stack = compute_max_stack(bc, m)
        return m

    def _ctor_prologue(self, gen: _MethodGen, super_name: str | None) -> None:
        if super_name is not None:
            gen.emit("LOAD", 0)
            gen.emit("INVOKESPECIAL", self.pool.ref(("methodref", super_name, "<init>", (), "void")))
            gen.emit("POP")

    def gen_class(self, name: str, super_name: str | None, members: list) -> BytecodeClass:
        bc = BytecodeClass(name=name, super_name=super_name)
        bc.pool = self.pool.entries  # live list; grows as methods are lowered
        for m in members:
            if isinstance(m, FieldDecl):
                bc.fields.append(FieldInfo(
                    m.name, m.type, static=m.static, final=m.final, private=m.private,
                ))

        has_ctor = any(isinstance(m, CtorDecl) for m in members)
        for m in members:
            if isinstance(m, MethodDecl):
                self.cur_ret = m.ret
                gen = _MethodGen(self)
                gen.stmt(m.body)
                if m.ret == "void" and _needs_return(gen):
                    gen.emit("RETURN")
                bc.methods.append(self._method_shell(
                    gen, name=m.name, params=tuple(p.type for p in m.params),
                    ret=m.ret, static=m.static, private=m.private, synthetic=False,
                    nlocals=self.info.nlocals[id(m)], bc=bc,
                ))
            elif isinstance(m, CtorDecl):
                self.cur_ret = "void"
                gen = _MethodGen(self)
                self._ctor_prologue(gen, super_name)
                gen.stmt(m.body)
                if _needs_return(gen):
                    gen.emit("RETURN")
                bc.methods.append(self._method_shell(
                    gen, name="<init>", params=tuple(p.type for p in m.params),
                    ret="void", static=False, private=m.private, synthetic=False,
                    nlocals=self.info.nlocals[id(m)], bc=bc,
                ))

        if not has_ctor:
            gen = _MethodGen(self)
            self._ctor_prologue(gen, super_name)
            gen.emit("RETURN")
            bc.methods.append(self._method_shell(
                gen, name="<init>", params=(), ret="void", static=False,
                private=False, synthetic=False, nlocals=1, bc=bc,
            ))

        clinit_parts = [
            m for m in members
            if (isinstance(m, FieldDecl) and m.static and m.init is not None)
            or isinstance(m, StaticBlock)
        ]
        if clinit_parts:
            self.cur_ret = "void"
            gen = _MethodGen(self)
            for m in clinit_parts:
                if isinstance(m, FieldDecl):
                    gen.expr(m.init)
                    gen.emit("PUTSTATIC", self.pool.ref(("fieldref", name, m.name, m.type)))
                else:
                    gen.stmt(m.body)
            if _needs_return(gen):
                gen.emit("RETURN")
            ast_node = self.env.classes[name].ast
            bc.methods.append(self._method_shell(
                gen, name="<clinit>", params=(), ret="void", static=True,
                private=False, synthetic=False,
                nlocals=self.info.nlocals[id(ast_node)], bc=bc,
            ))

        for params in sorted(self.info.wrappers.get(name, ())):
            gen = _MethodGen(self)
            gen.emit("LOAD", 0)
            for i in range(len(params)):
                gen.emit("LOAD", i + 1)
            gen.emit("INVOKESPECIAL", self.pool.ref(("methodref", name, "<init>", params, "void")))
            gen.emit("POP")
            gen.emit("RETURN")
            wparams = params + (self.wrapper_param_type(name),)
            bc.methods.append(self._method_shell(
                gen, name="<init>", params=wparams, ret="void", static=False,
                private=False, synthetic=True, nlocals=1 + len(wparams), bc=bc,
            ))
        return bc


def _needs_return(gen: _MethodGen) -> bool:
    for op, _arg in reversed(gen.code):
        if op == "LABEL":
            return True  # some branch targets end-of-code
        return op not in TERMINAL_OPS
    return True


def compile_unit(ast: ClassAst, variant: Variant, env: Env, info: UnitInfo) -> BytecodeClass:
    """Bytecode for one analyzed unit (top-level class plus its nesteds)."""
    cg = _ClassGen(env, info, variant, ast.name)
    bc = cg.gen_class(ast.name, ast.superclass, ast.members)
    for m in ast.members:
        if isinstance(m, NestedClassDecl):
            ncg = _ClassGen(env, info, variant, ast.name)
            bc.nested.append(ncg.gen_class(f"{ast.name}.{m.name}", None, m.members))
    if variant.wrapper_fresh_class and info.wrappers:
        bc.nested.append(BytecodeClass(name=f"{ast.name}$1", synthetic=True))
    faults = verify_class(bc)
    if faults:
        raise ToolFault(
            f"generated code for {ast.name} failed verification: "
            + "; ".join(d.message for d in faults[:3])
        )
    return bc


def compile_program(
    asts: dict[str, ClassAst], variant: Variant,
) -> tuple[Env, dict[str, BytecodeClass], list[Diagnostic]]:
    """Compile a whole program. On any error diagnostic the class table
    comes back empty; callers treat that as fatal for the program."""
    env, diags = build_env(asts)
    infos: dict[str, UnitInfo] = {}
    for name in sorted(asts):
        unit_diags, info = analyze_unit(env, asts[name])
        diags.extend(unit_diags)
        infos[name] = info
    if any(d.severity == "error" for d in diags):
        return env, {}, diags
    classes: dict[str, BytecodeClass] = {}
    for name in sorted(asts):
        bc = compile_unit(asts[name], variant, env, infos[name])
        classes[bc.name] = bc
        for n in bc.nested:
            classes[n.name] = n
    return env, classes, diags


@dataclass
class RecompileResult:
    ok: bool
    diagnostics: list[Diagnostic]
    bytecode: BytecodeClass | None
    ast: ClassAst | None


def recompile_check(
    source: str,
    replace_name: str,
    context_asts: dict[str, ClassAst],
    variant: Variant,
) -> RecompileResult:
    """Parse and compile decompiled source against a trusted program
    context, with the original class swapped out for the new text.
    Only the replaced unit is reanalyzed; backends preserve the public
    surface of a class, so the context cannot be invalidated by a body
    change. Error annotations land on the parsed AST's members."""
    r = parse(source)
    diags = list(r.diagnostics)
    if r.ast is None:
        return RecompileResult(False, diags, None, None)
    if r.ast.name != replace_name:
        diags.append(Diagnostic(
            f"decompiled class is named {r.ast.name}, expected {replace_name}",
            r.ast.span,
        ))
        annotate_errors(r.ast, diags)
        return RecompileResult(False, diags, None, r.ast)
    asts = dict(context_asts)
    asts[replace_name] = r.ast
    env, ediags = build_env(asts)
    diags.extend(ediags)
    unit_diags, info = analyze_unit(env, r.ast)
    diags.extend(unit_diags)
    annotate_errors(r.ast, diags)
    if any(d.severity == "error" for d in diags):
        return RecompileResult(False, diags, None, r.ast)
    bc = compile_unit(r.ast, variant, env, info)
    return RecompileResult(True, diags, bc, r.ast)
