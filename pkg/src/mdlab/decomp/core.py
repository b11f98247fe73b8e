"""Shared reconstruction engine behind the built-in decompilers.

Every backend runs the same pipeline: recognize the loop and branch
layouts both compiler variants emit, simulate the operand stack back
into expression trees, split <clinit> into field initializers plus one
static block, and drop synthesized members (default constructor,
constructor wrappers) so the printed class recompiles to the same
tables.  Backends differ only through a Policy: naming, declaration
placement, sugar reversal, cast handling, and deliberate quirks.

The engine is strict: any instruction sequence it cannot explain raises
StructureError, which callers surface as an internal fault rather than
misattributing it to the subject program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..lang.nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Expr, ExprStmt, FieldDecl, FieldGet, If, IntLit, Member,
    MethodDecl, NestedClassDecl, New, NullLit, Param, Print, Return,
    StaticBlock, StaticCall, StaticGet, Stmt, StrLit, This, Throw, TryCatch,
    Unary, VarDecl, VarRef, While, is_class_type, simple_name,
)
from ..vm.model import (
    BytecodeClass, Handler, Instr, MethodBody, code_offsets, instr_width,
)

STR_BUILDER = "minij.StrBuilder"

_BIN_FROM_OP = {
    "ADD": "+", "SUB": "-", "MUL": "*", "DIV": "/", "MOD": "%",
    "CMPEQ": "==", "CMPNE": "!=", "CMPLT": "<", "CMPLE": "<=",
    "CMPGT": ">", "CMPGE": ">=",
}
_CMP_OPS = frozenset({"CMPEQ", "CMPNE", "CMPLT", "CMPLE", "CMPGT", "CMPGE"})


class StructureError(Exception):
    """Bytecode did not match any shape the engine understands."""


@dataclass
class Policy:
    """Everything that makes one backend's output differ from another's."""

    name_param: Callable[[int, int], str]      # (position, slot) -> name
    name_local: Callable[[int], str]           # slot -> name
    name_catch: Callable[[int], str]           # slot -> name
    reverse_builder: bool = False              # builder chains back to infix +
    insert_casts: bool = True                  # re-pin overloads with casts
    hoist_decls: bool = True                   # all decls at method top
    fold_single_use_temps: bool = False
    normalize_not_if: bool = False
    sort_fields: bool = False
    use_debug_names: bool = False              # honor embedded local names
    # "shape" strips a trailing null at wrapper call sites whenever the
    # callee looks like a wrapper; "dollar" only when the extra parameter
    # type carries a compiler-made "$" name; None never strips.
    wrapper_call_strip: Optional[str] = "shape"
    # Per-method give-up hook; a matching method body is replaced with
    # `fail_stmt` instead of being lifted.
    fail_method: Optional[Callable[[BytecodeClass, MethodBody], bool]] = None
    fail_stmt: Optional[Callable[[], Stmt]] = None


@dataclass
class CastSite:
    """One place the engine pinned a call argument with a cast."""

    owner: str
    method: str
    arity: int
    arg_type: str
    is_null: bool


# ====== synthesized-member recognition ======


def wrapper_ctor_ids(bc: BytecodeClass) -> set[int]:
    """Indices of constructor-wrapper methods in bc.methods.

    A wrapper forwards its leading parameters to a private constructor of
    the same class and ignores one trailing parameter; both compiler
    variants emit exactly this shape.
    """
    private_ctors = {
        m.params for m in bc.methods if m.name == "<init>" and m.private
    }
    out = set()
    for i, m in enumerate(bc.methods):
        if m.name != "<init>" or m.private or not m.params:
            continue
        inner = m.params[:-1]
        if inner not in private_ctors:
            continue
        want = [Instr("LOAD", 0)]
        want += [Instr("LOAD", k + 1) for k in range(len(inner))]
        want += [None, Instr("POP"), Instr("RETURN")]  # None = the invoke
        if len(m.code) != len(want):
            continue
        ok = all(w is None or c == w for c, w in zip(m.code, want))
        inv = m.code[len(inner) + 1]
        if ok and inv.op == "INVOKESPECIAL":
            ref = bc.pool[inv.arg]
            if ref[:2] == ("methodref", bc.name) and ref[2] == "<init>" \
                    and ref[3] == inner:
                out.add(i)
    return out


def _is_trivial_ctor(bc: BytecodeClass, m: MethodBody) -> bool:
    if m.name != "<init>" or m.params or m.private:
        return False
    if bc.super_name is None:
        return m.code == [Instr("RETURN")]
    if len(m.code) != 4:
        return False
    a, b, c, d = m.code
    if (a, c, d) != (Instr("LOAD", 0), Instr("POP"), Instr("RETURN")):
        return False
    return b.op == "INVOKESPECIAL" and bc.pool[b.arg][2] == "<init>"


def default_ctor_id(bc: BytecodeClass, skip: set[int]) -> Optional[int]:
    """Index of the synthesized zero-argument constructor, if present.

    The compiler appends it after every declared member, so only a
    trailing trivial constructor is treated as synthesized; an explicit
    empty constructor declared before other members survives.
    """
    last = None
    for i, m in enumerate(bc.methods):
        if i in skip or m.name == "<clinit>":
            continue
        last = i
    if last is not None and _is_trivial_ctor(bc, bc.methods[last]):
        return last
    return None


# ====== method lifting ======


class _NewRef:
    """Stack placeholder between NEW and its INVOKESPECIAL."""

    def __init__(self, cls: str):
        self.cls = cls


class _SuperRef:
    """Stack placeholder for the implicit super() result."""


@dataclass
class _Loop:
    continue_target: int
    break_target: int


class _Lifter:
    def __init__(self, unit: dict[str, BytecodeClass], owner: BytecodeClass,
                 m: MethodBody, policy: Policy):
        self.unit = unit
        self.owner = owner
        self.m = m
        self.policy = policy
        self.pool = owner.pool
        self.stack: list[tuple[Expr, str]] = []
        self.loops: list[_Loop] = []
        self.slot_types: dict[int, str] = {}
        self.slot_names: dict[int, str] = {}
        self.local_slots: list[int] = []   # discovery order of stored slots
        self.catch_slots: set[int] = set()
        self.cast_sites: list[CastSite] = []

        offs = code_offsets(m.code)
        self.by_off = {o: ins for o, ins in zip(offs, m.code)}
        self.end = offs[-1] + instr_width(m.code[-1]) if m.code else 0
        self.handler_at = {}
        for h in m.handlers:
            self.handler_at.setdefault(h.start, []).append(h)
        for rows in self.handler_at.values():
            rows.sort(key=lambda h: h.target)
        # Back edges.  A GOTO backwards marks a loop header under variant
        # A and under the shared constant-true lowering; an IFNE backwards
        # is a bottom-test latch, entered through the GOTO just before the
        # body label.
        self.goto_loops: dict[int, int] = {}
        self.btm_loops: dict[int, tuple[int, int]] = {}
        for o, ins in self.by_off.items():
            if ins.op == "GOTO" and ins.arg <= o:
                h = ins.arg
                self.goto_loops[h] = max(self.goto_loops.get(h, -1), o)
            elif ins.op == "IFNE" and ins.arg <= o:
                body = ins.arg
                entry = body - 2
                g = self.by_off.get(entry)
                if g is None or g.op != "GOTO" or not (body <= g.arg <= o):
                    raise StructureError(
                        f"bottom-test loop at {o} lacks its entry jump")
                self.btm_loops[entry] = (g.arg, o)
        self.consumed_latches: set[int] = set()

        self._bind_params()

    # ---- names and slots ----

    def _bind_params(self) -> None:
        base = 0 if self.m.static else 1
        for i, t in enumerate(self.m.params):
            slot = base + i
            name = None
            if self.policy.use_debug_names and self.m.local_names \
                    and slot < len(self.m.local_names):
                name = self.m.local_names[slot] or None
            self.slot_names[slot] = name or self.policy.name_param(i, slot)
            self.slot_types[slot] = t
        self.param_slots = set(range(base, base + len(self.m.params)))

    def _local(self, slot: int) -> str:
        if slot not in self.slot_names:
            name = None
            if self.policy.use_debug_names and self.m.local_names \
                    and slot < len(self.m.local_names):
                name = self.m.local_names[slot] or None
            self.slot_names[slot] = name or self.policy.name_local(slot)
        return self.slot_names[slot]

    def params(self) -> list[Param]:
        base = 0 if self.m.static else 1
        return [Param(t, self.slot_names[base + i])
                for i, t in enumerate(self.m.params)]

    # ---- entry ----

    def lift(self) -> Block:
        start = 0
        if self.m.name == "<init>" and self.owner.super_name is not None:
            three = self.m.code[:3]
            if len(three) < 3 or three[0] != Instr("LOAD", 0) \
                    or three[1].op != "INVOKESPECIAL" or three[2].op != "POP":
                raise StructureError("constructor without super prologue")
            start = 5
        stmts = self._stmts(start, self.end)
        if self.m.ret == "void" and stmts and \
                isinstance(stmts[-1], Return) and stmts[-1].value is None:
            stmts.pop()
        return Block(stmts)

    # ---- structured range walk ----

    def _stmts(self, lo: int, hi: int) -> list[Stmt]:
        out: list[Stmt] = []
        off = lo
        while off < hi:
            rows = self.handler_at.get(off)
            latch = self.goto_loops.get(off, -1)
            # a loop header on a region boundary: the loop is the outer
            # construct exactly when its latch lies past the region end
            loop_outer = (
                rows is not None
                and off <= latch < hi
                and latch >= rows[0].end
                and latch not in self.consumed_latches
            )
            if rows and not loop_outer:
                h = rows.pop(0)
                if not rows:
                    del self.handler_at[off]
                off = self._try(h, out, hi)
                continue
            if off <= latch < hi and latch not in self.consumed_latches:
                off = self._goto_loop(off, latch, out)
                continue
            if off in self.btm_loops:
                off = self._bottom_loop(off, out)
                continue
            ins = self.by_off.get(off)
            if ins is None:
                raise StructureError(f"no instruction at offset {off}")
            if ins.op == "GOTO":
                off = self._goto(off, ins.arg, out)
            elif ins.op in ("IFEQ", "IFNE"):
                off = self._branch(off, ins, hi, out)
            else:
                self._exec(ins, out)
                off += instr_width(ins)
        return out

    def _eval_cond(self, lo: int, hi: int) -> Expr:
        before = len(self.stack)
        sink: list[Stmt] = []
        off = lo
        while off < hi:
            ins = self.by_off[off]
            self._exec(ins, sink)
            off += instr_width(ins)
        if sink or len(self.stack) != before + 1:
            raise StructureError(f"loop test at {lo} is not one expression")
        return self.stack.pop()[0]

    # ---- control shapes ----

    def _try(self, h: Handler, out: list[Stmt], hi: int) -> int:
        body = Block(self._stmts(h.start, h.end))
        tail = self.by_off.get(h.end)
        if tail is not None and tail.op == "GOTO" and tail.arg > h.end:
            join = tail.arg
        else:
            join = hi  # protected code never falls out; the handler
            # absorbs whatever follows, which preserves behavior
        store = self.by_off.get(h.target)
        if store is None or store.op != "STORE":
            raise StructureError(f"handler at {h.target} does not bind")
        slot = store.arg
        self.catch_slots.add(slot)
        self.slot_names[slot] = self.policy.name_catch(slot)
        self.slot_types[slot] = h.type
        handler = Block(self._stmts(h.target + 2, join))
        out.append(TryCatch(body, h.type, self.slot_names[slot], handler))
        return join

    def _goto_loop(self, head: int, latch: int, out: list[Stmt]) -> int:
        self.consumed_latches.add(latch)
        exit_ = latch + 2
        # Top-test shape: the header evaluates one branch-free expression
        # and an IFEQ jumps past the latch.  Anything else is a
        # constant-true loop whose body starts at the header.
        scan = head
        test = None
        while scan < latch:
            ins = self.by_off[scan]
            if ins.op in ("IFEQ", "IFNE", "GOTO"):
                if ins.op == "IFEQ" and ins.arg == exit_:
                    test = scan
                break
            scan += instr_width(ins)
        self.loops.append(_Loop(head, exit_))
        try:
            if test is not None:
                cond = self._eval_cond(head, test)
                stmts = self._stmts(test + 2, latch)
            else:
                cond = BoolLit(True)
                stmts = self._stmts(head, latch)
        finally:
            self.loops.pop()
        if self.by_off[latch] != Instr("GOTO", head):
            raise StructureError(f"loop at {head} has no latch")
        out.append(While(cond, Block(stmts)))
        return exit_

    def _bottom_loop(self, entry: int, out: list[Stmt]) -> int:
        test, ifne = self.btm_loops[entry]
        self.loops.append(_Loop(test, ifne + 2))
        try:
            stmts = self._stmts(entry + 2, test)
        finally:
            self.loops.pop()
        cond = self._eval_cond(test, ifne)
        out.append(While(cond, Block(stmts)))
        return ifne + 2

    def _targets_within(self, lo: int, hi: int, label: int) -> bool:
        off = lo
        while off < hi:
            ins = self.by_off.get(off)
            if ins is None:
                return False
            if ins.op in ("IFEQ", "IFNE", "GOTO") and ins.arg == label:
                return True
            off += instr_width(ins)
        return False

    def _goto(self, off: int, target: int, out: list[Stmt]) -> int:
        if self.loops:
            if target == self.loops[-1].break_target:
                out.append(Break())
                return off + 2
            if target == self.loops[-1].continue_target:
                out.append(Continue())
                return off + 2
        if target == off + 2:
            return target  # jump to the next instruction carries nothing
        raise StructureError(f"unstructured jump {off} -> {target}")

    def _branch(self, off: int, ins: Instr, hi: int, out: list[Stmt]) -> int:
        if not self.stack:
            raise StructureError(f"branch at {off} with empty stack")
        cond = self.stack.pop()[0]
        if self.stack:
            raise StructureError(f"branch at {off} mid-expression")
        t = ins.arg
        if t <= off or t > hi:
            raise StructureError(f"branch {off} -> {t} escapes its region")
        g = self.by_off.get(t - 2) if t - 2 >= off + 2 else None
        has_join = g is not None and g.op == "GOTO" and \
            (g.arg == t or t < g.arg <= hi)
        if has_join and self._targets_within(off + 2, t - 2, t):
            # the jump before t belongs to a nested conditional whose own
            # join label is t; there is no else branch here
            has_join = False
        if ins.op == "IFEQ":
            # Variant A: jump on false over the then branch.
            if has_join:
                then = Block(self._stmts(off + 2, t - 2))
                orelse = Block(self._stmts(t, g.arg))
                out.append(If(cond, then, orelse))
                return g.arg
            then = Block(self._stmts(off + 2, t))
            out.append(If(cond, then, None))
            return t
        # Variant B: jump on true to the then branch; the else block sits
        # in between.  A missing join jump means the else branch never
        # falls through, so the rest of the region is the then branch.
        if has_join:
            orelse = Block(self._stmts(off + 2, t - 2))
            then = Block(self._stmts(t, g.arg))
            if not orelse.stmts:
                out.append(If(cond, then, None))
            else:
                out.append(If(cond, then, orelse))
            return g.arg
        orelse = Block(self._stmts(off + 2, t))
        then = Block(self._stmts(t, hi))
        out.append(If(cond, then, orelse))
        return hi

    # ---- straight-line execution ----

    def _push(self, e: Expr, t: str) -> None:
        self.stack.append((e, t))

    def _pop(self) -> tuple[Expr, str]:
        if not self.stack:
            raise StructureError("operand stack underflow during lifting")
        return self.stack.pop()

    def _pop_args(self, n: int) -> list[tuple[Expr, str]]:
        if n == 0:
            return []
        args = self.stack[-n:]
        del self.stack[-n:]
        return list(args)

    def _cast_args(self, owner: str, name: str,
                   params: tuple[str, ...],
                   args: list[tuple[Expr, str]]) -> list[Expr]:
        res = []
        for (e, t), p in zip(args, params):
            if is_class_type(p) and t != p:
                self.cast_sites.append(
                    CastSite(owner, name, len(params), t, t == "null"))
                if self.policy.insert_casts:
                    e = Cast(p, e)
            res.append(e)
        return res

    def _cast_recv(self, e: Expr, t: str, owner: str) -> Expr:
        if t != owner and self.policy.insert_casts:
            return Cast(owner, e)
        return e

    def _strip_wrapper_null(self, cls: str, params: tuple[str, ...],
                            args: list[tuple[Expr, str]]):
        mode = self.policy.wrapper_call_strip
        if mode is None or not params or not args:
            return params, args
        if not isinstance(args[-1][0], NullLit):
            return params, args
        if mode == "dollar":
            if "$" not in params[-1]:
                return params, args
        else:
            target = self.unit.get(cls)
            if target is None:
                return params, args
            shaped = any(
                target.methods[i].params == params
                for i in wrapper_ctor_ids(target)
            )
            if not shaped:
                return params, args
        return params[:-1], args[:-1]

    def _exec(self, ins: Instr, out: list[Stmt]) -> None:
        op, arg = ins.op, ins.arg
        if op == "LDC":
            e = self.pool[arg]
            if e[0] == "int":
                self._push(IntLit(e[1]), "int")
            elif e[0] == "str":
                self._push(StrLit(e[1]), "str")
            else:
                raise StructureError(f"LDC of a {e[0]} pool entry")
        elif op == "ACONST_NULL":
            self._push(NullLit(), "null")
        elif op == "CONST_TRUE":
            self._push(BoolLit(True), "bool")
        elif op == "CONST_FALSE":
            self._push(BoolLit(False), "bool")
        elif op == "LOAD":
            if arg == 0 and not self.m.static:
                self._push(This(), self.owner.name)
            else:
                t = self.slot_types.get(arg)
                if t is None:
                    raise StructureError(f"local {arg} read before any store")
                self._push(VarRef(self.slot_names[arg]), t)
        elif op == "STORE":
            e, t = self._pop()
            first = arg not in self.slot_types
            self.slot_types.setdefault(arg, t)
            name = self._local(arg)
            if first and arg not in self.param_slots:
                self.local_slots.append(arg)
            out.append(Assign(VarRef(name), e))
            self._end_stmt()
        elif op == "GETSTATIC":
            _, cls, name, t = self.pool[arg]
            self._push(StaticGet(cls, name), t)
        elif op == "PUTSTATIC":
            _, cls, name, _t = self.pool[arg]
            e, _ = self._pop()
            out.append(Assign(StaticGet(cls, name), e))
            self._end_stmt()
        elif op == "GETFIELD":
            _, cls, name, t = self.pool[arg]
            recv, rt = self._pop()
            self._push(FieldGet(self._cast_recv(recv, rt, cls), name), t)
        elif op == "PUTFIELD":
            _, cls, name, _t = self.pool[arg]
            e, _ = self._pop()
            recv, rt = self._pop()
            out.append(Assign(FieldGet(self._cast_recv(recv, rt, cls), name), e))
            self._end_stmt()
        elif op in _BIN_FROM_OP:
            r, _rt = self._pop()
            l, _lt = self._pop()
            self._push(Binary(_BIN_FROM_OP[op], l, r),
                       "bool" if op in _CMP_OPS else "int")
        elif op == "NEG":
            e, _ = self._pop()
            self._push(Unary("-", e), "int")
        elif op == "NOT":
            e, _ = self._pop()
            self._push(Unary("!", e), "bool")
        elif op == "CONCAT":
            r, _ = self._pop()
            l, _ = self._pop()
            self._push(Binary("+", l, r), "str")
        elif op == "BUILDER_NEW":
            self._push(New(STR_BUILDER, []), STR_BUILDER)
        elif op == "BUILDER_APPEND":
            v, _ = self._pop()
            b, _ = self._pop()
            self._push(Call(b, "append", [v]), STR_BUILDER)
        elif op == "BUILDER_STR":
            b, _ = self._pop()
            self._push(self._finish_builder(b), "str")
        elif op == "NEW":
            _, cls = self.pool[arg]
            self._push(_NewRef(cls), cls)
        elif op == "INVOKESTATIC":
            _, cls, name, params, ret = self.pool[arg]
            args = self._pop_args(len(params))
            call = StaticCall(cls, name, self._cast_args(cls, name, params, args))
            if ret == "void":
                out.append(ExprStmt(call))
                self._end_stmt()
            else:
                self._push(call, ret)
        elif op == "INVOKEVIRT":
            _, cls, name, params, ret = self.pool[arg]
            args = self._pop_args(len(params))
            recv, rt = self._pop()
            call = Call(self._cast_recv(recv, rt, cls), name,
                        self._cast_args(cls, name, params, args))
            if ret == "void":
                out.append(ExprStmt(call))
                self._end_stmt()
            else:
                self._push(call, ret)
        elif op == "INVOKESPECIAL":
            _, cls, name, params, _ret = self.pool[arg]
            args = self._pop_args(len(params))
            recv, _rt = self._pop()
            if isinstance(recv, _NewRef):
                params, args = self._strip_wrapper_null(cls, params, args)
                e = New(cls, self._cast_args(cls, "<init>", params, args))
                self._push(e, cls)
            elif isinstance(recv, This) and name == "<init>":
                self._push(_SuperRef(), "void")
            else:
                raise StructureError("INVOKESPECIAL outside a new-expression")
        elif op == "POP":
            e, _ = self._pop()
            if not isinstance(e, _SuperRef):
                out.append(ExprStmt(e))
                self._end_stmt()
        elif op == "PRINT":
            e, _ = self._pop()
            out.append(Print(e))
            self._end_stmt()
        elif op == "THROW":
            e, _ = self._pop()
            out.append(Throw(e))
            self._end_stmt()
        elif op == "RETURN":
            out.append(Return(None))
            self._end_stmt()
        elif op in ("IRETURN", "ARETURN"):
            e, _ = self._pop()
            out.append(Return(e))
            self._end_stmt()
        else:
            raise StructureError(f"unexpected {op} in straight-line code")

    def _end_stmt(self) -> None:
        if self.stack:
            raise StructureError("operand stack not empty between statements")

    def _finish_builder(self, chain: Expr) -> Expr:
        done = Call(chain, "str", [])
        if not self.policy.reverse_builder:
            return done
        parts = []
        cur = chain
        while isinstance(cur, Call) and cur.name == "append" \
                and len(cur.args) == 1:
            parts.append(cur.args[0])
            cur = cur.target
        if not (isinstance(cur, New) and cur.cls == STR_BUILDER) \
                or len(parts) < 2:
            return done  # a hand-written builder; leave it alone
        parts.reverse()
        e = parts[0]
        for p in parts[1:]:
            e = Binary("+", e, p)
        return e


# ====== declaration placement ======


def _expr_uses(e: Expr, name_set: set, acc: set) -> None:
    if isinstance(e, VarRef) and e.name in name_set:
        acc.add(e.name)
    for child in _expr_children(e):
        _expr_uses(child, name_set, acc)


def _walk_occurrences(block: Block, path: tuple, hits: dict, name_set: set):
    """Document-order occurrences of tracked names.

    Each entry is (chain, stmt, is_direct_assign) where chain ends with
    (containing block, statement index)."""
    for i, s in enumerate(block.stmts):
        used: set = set()
        direct = None
        if isinstance(s, Assign):
            _expr_uses(s.value, name_set, used)
            if isinstance(s.target, VarRef) and s.target.name in name_set:
                direct = s.target.name
                used.add(s.target.name)
            elif isinstance(s.target, FieldGet):
                _expr_uses(s.target.target, name_set, used)
        elif isinstance(s, (ExprStmt, Print, Throw)):
            _expr_uses(s.expr, name_set, used)
        elif isinstance(s, Return):
            if s.value is not None:
                _expr_uses(s.value, name_set, used)
        elif isinstance(s, If):
            _expr_uses(s.cond, name_set, used)
        elif isinstance(s, While):
            _expr_uses(s.cond, name_set, used)
        chain = path + ((block, i),)
        for n in sorted(used):
            hits.setdefault(n, []).append((chain, s, direct == n))
        if isinstance(s, Block):
            _walk_occurrences(s, chain, hits, name_set)
        elif isinstance(s, If):
            _walk_occurrences(s.then, chain, hits, name_set)
            if s.orelse is not None:
                _walk_occurrences(s.orelse, chain, hits, name_set)
        elif isinstance(s, While):
            _walk_occurrences(s.body, chain, hits, name_set)
        elif isinstance(s, TryCatch):
            _walk_occurrences(s.body, chain, hits, name_set)
            _walk_occurrences(s.handler, chain, hits, name_set)


def place_decls(body: Block, locals_: list[tuple[str, str]],
                hoist: bool) -> None:
    """Insert VarDecls for lifted locals.

    Hoisted mode declares everything at the top of the method.  Scoped
    mode turns the first assignment into a declaration when it sits in
    the innermost block containing every use of the name, and otherwise
    inserts a bare declaration into that block.
    """
    if not locals_:
        return
    if hoist:
        body.stmts[:0] = [VarDecl(t, n, None) for n, t in locals_]
        return
    hits: dict[str, list] = {}
    order = {n: k for k, (n, _) in enumerate(locals_)}
    types = dict(locals_)
    _walk_occurrences(body, (), hits, set(types))
    inserts: list[tuple[Block, int, str]] = []
    for name in sorted(hits, key=lambda n: order[n]):
        occ = hits[name]
        chains = [c for c, _s, _d in occ]
        depth = min(len(c) for c in chains)
        d = 0
        while d < depth and all(c[d][0] is chains[0][d][0] for c in chains):
            d += 1
        # All chains share blocks up to level d-1; that block is the
        # innermost one containing every occurrence.
        anchor_block = chains[0][d - 1][0]
        anchor_index = min(c[d - 1][1] for c in chains)
        first_chain, first_stmt, first_direct = occ[0]
        if first_direct and len(first_chain) == d \
                and first_chain[-1][1] == anchor_index:
            anchor_block.stmts[anchor_index] = VarDecl(
                types[name], name, first_stmt.value)
        else:
            inserts.append((anchor_block, anchor_index, name))
    # Insert bottom-up per block so earlier indices stay valid; ties keep
    # slot order by inserting later names first.
    for block, index, name in sorted(
            inserts, key=lambda p: (-p[1], -order[p[2]])):
        block.stmts.insert(index, VarDecl(types[name], name, None))


# ====== post-lift passes ======


def _pure_local_expr(e: Expr) -> bool:
    if isinstance(e, (IntLit, StrLit, BoolLit, NullLit, This, VarRef)):
        return True
    if isinstance(e, Binary):
        return _pure_local_expr(e.left) and _pure_local_expr(e.right)
    if isinstance(e, Unary):
        return _pure_local_expr(e.operand)
    if isinstance(e, Cast):
        return _pure_local_expr(e.expr)
    return False


def _count_var_uses(root: Block, name: str) -> tuple[int, int]:
    reads = writes = 0

    def expr(e):
        nonlocal reads
        if isinstance(e, VarRef) and e.name == name:
            reads += 1
        for child in _expr_children(e):
            expr(child)

    def stmt(s):
        nonlocal writes
        if isinstance(s, Assign):
            if isinstance(s.target, VarRef) and s.target.name == name:
                writes += 1
            else:
                expr(s.target)
            expr(s.value)
        elif isinstance(s, VarDecl):
            if s.init is not None:
                expr(s.init)
        elif isinstance(s, (ExprStmt, Print, Throw)):
            expr(s.expr)
        elif isinstance(s, Return):
            if s.value is not None:
                expr(s.value)
        elif isinstance(s, Block):
            for x in s.stmts:
                stmt(x)
        elif isinstance(s, If):
            expr(s.cond)
            for x in s.then.stmts:
                stmt(x)
            if s.orelse is not None:
                for x in s.orelse.stmts:
                    stmt(x)
        elif isinstance(s, While):
            expr(s.cond)
            for x in s.body.stmts:
                stmt(x)
        elif isinstance(s, TryCatch):
            for x in s.body.stmts + s.handler.stmts:
                stmt(x)

    for s in root.stmts:
        stmt(s)
    return reads, writes


def _expr_children(e: Expr) -> list[Expr]:
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Cast):
        return [e.expr]
    if isinstance(e, FieldGet):
        return [e.target]
    if isinstance(e, Call):
        return ([e.target] if e.target is not None else []) + list(e.args)
    if isinstance(e, (StaticCall, New)):
        return list(e.args)
    return []


def _replace_var(e: Expr, name: str, value: Expr) -> Expr:
    if isinstance(e, VarRef) and e.name == name:
        return value
    if isinstance(e, Binary):
        e.left = _replace_var(e.left, name, value)
        e.right = _replace_var(e.right, name, value)
    elif isinstance(e, Unary):
        e.operand = _replace_var(e.operand, name, value)
    elif isinstance(e, Cast):
        e.expr = _replace_var(e.expr, name, value)
    elif isinstance(e, FieldGet):
        e.target = _replace_var(e.target, name, value)
    elif isinstance(e, Call):
        if e.target is not None:
            e.target = _replace_var(e.target, name, value)
        e.args = [_replace_var(a, name, value) for a in e.args]
    elif isinstance(e, (StaticCall, New)):
        e.args = [_replace_var(a, name, value) for a in e.args]
    return e


_SIMPLE_STMTS = (Return, Print, Throw, ExprStmt, Assign)


def fold_single_use_temps(method_body: Block, local_names: set[str]) -> set[str]:
    """Inline `t = pure-expr; use(t)` pairs.

    Only locally pure values (no reads of fields or calls) move, and only
    into the immediately following simple statement, so evaluation order
    is preserved exactly.  Returns the names that were folded away.
    """
    folded: set[str] = set()

    def visit(block: Block) -> None:
        i = 0
        while i < len(block.stmts):
            s = block.stmts[i]
            if isinstance(s, Assign) and isinstance(s.target, VarRef) \
                    and s.target.name in local_names \
                    and s.target.name not in folded \
                    and _pure_local_expr(s.value) \
                    and i + 1 < len(block.stmts) \
                    and isinstance(block.stmts[i + 1], _SIMPLE_STMTS):
                name = s.target.name
                reads, writes = _count_var_uses(method_body, name)
                nxt = block.stmts[i + 1]
                nreads, _ = _count_var_uses(Block([nxt]), name)
                if reads == 1 and writes == 1 and nreads == 1:
                    if isinstance(nxt, Assign):
                        if isinstance(nxt.target, FieldGet):
                            nxt.target.target = _replace_var(
                                nxt.target.target, name, s.value)
                        nxt.value = _replace_var(nxt.value, name, s.value)
                    elif isinstance(nxt, Return):
                        nxt.value = _replace_var(nxt.value, name, s.value)
                    else:
                        nxt.expr = _replace_var(nxt.expr, name, s.value)
                    del block.stmts[i]
                    folded.add(name)
                    continue
            if isinstance(s, Block):
                visit(s)
            elif isinstance(s, If):
                visit(s.then)
                if s.orelse is not None:
                    visit(s.orelse)
            elif isinstance(s, While):
                visit(s.body)
            elif isinstance(s, TryCatch):
                visit(s.body)
                visit(s.handler)
            i += 1

    visit(method_body)
    return folded


def normalize_not_if(block: Block) -> None:
    """Rewrite negated or empty-then conditionals into their direct form."""
    for i, s in enumerate(block.stmts):
        if isinstance(s, Block):
            normalize_not_if(s)
        elif isinstance(s, While):
            normalize_not_if(s.body)
        elif isinstance(s, TryCatch):
            normalize_not_if(s.body)
            normalize_not_if(s.handler)
        elif isinstance(s, If):
            normalize_not_if(s.then)
            if s.orelse is not None:
                normalize_not_if(s.orelse)
            if s.orelse is not None and not s.then.stmts:
                cond = s.cond.operand if isinstance(s.cond, Unary) \
                    and s.cond.op == "!" else Unary("!", s.cond)
                block.stmts[i] = If(cond, s.orelse, None)
            elif isinstance(s.cond, Unary) and s.cond.op == "!" \
                    and s.orelse is not None:
                block.stmts[i] = If(s.cond.operand, s.orelse, s.then)


# ====== class assembly ======


def split_clinit(stmts: list[Stmt], bc: BytecodeClass) -> tuple[dict, list]:
    """Leading own-field stores become initializers; the rest is one
    static block.  Initializers execute in declaration order, so a store
    is only attributable to one if its field comes after every field
    already claimed; anything else stays in the block to preserve the
    original execution sequence."""
    order = {f.name: i for i, f in enumerate(bc.fields) if f.static}
    inits: dict[str, Expr] = {}
    k = 0
    floor = -1
    for s in stmts:
        if isinstance(s, Assign) and isinstance(s.target, StaticGet) \
                and s.target.cls == bc.name and s.target.name in order \
                and s.target.name not in inits \
                and order[s.target.name] > floor:
            inits[s.target.name] = s.value
            floor = order[s.target.name]
            k += 1
        else:
            break
    return inits, stmts[k:]


def finish_body(body: Block, lifter: "_Lifter", policy: Policy) -> None:
    locals_ = [(lifter.slot_names[s], lifter.slot_types[s])
               for s in lifter.local_slots]
    if policy.fold_single_use_temps:
        folded = fold_single_use_temps(body, {n for n, _ in locals_})
        locals_ = [(n, t) for n, t in locals_ if n not in folded]
    place_decls(body, locals_, policy.hoist_decls)
    if policy.normalize_not_if:
        normalize_not_if(body)


def lift_method(unit: dict[str, BytecodeClass], bc: BytecodeClass,
                m: MethodBody, policy: Policy) -> tuple[list[Param], Block, _Lifter]:
    lifter = _Lifter(unit, bc, m, policy)
    body = lifter.lift()
    finish_body(body, lifter, policy)
    return lifter.params(), body, lifter


def assemble_class(unit: dict[str, BytecodeClass], bc: BytecodeClass,
                   policy: Policy) -> ClassAst:
    """Rebuild one class (plus nesteds) as a printable AST."""
    wrappers = wrapper_ctor_ids(bc)
    default = default_ctor_id(bc, wrappers)

    fields = [
        FieldDecl(f.name, f.type, static=f.static, final=f.final,
                  private=f.private)
        for f in bc.fields if not f.synthetic
    ]
    if policy.sort_fields:
        fields.sort(key=lambda f: f.name)
    by_name = {f.name: f for f in fields}

    methods: list[Member] = []
    static_block: Optional[StaticBlock] = None
    for i, m in enumerate(bc.methods):
        if i in wrappers or i == default:
            continue
        if m.name == "<clinit>":
            # split before declaration placement: initializer expressions
            # never touch locals, so locals stay inside the block part
            lifter = _Lifter(unit, bc, m, policy)
            inits, rest = split_clinit(lifter.lift().stmts, bc)
            for name, e in inits.items():
                by_name[name].init = e
            if rest:
                block = Block(rest)
                finish_body(block, lifter, policy)
                static_block = StaticBlock(block)
            continue
        if policy.fail_method is not None and policy.fail_method(bc, m):
            stmt = policy.fail_stmt() if policy.fail_stmt else None
            body = Block([stmt] if stmt else [])
            if m.name == "<init>":
                params = [Param(t, policy.name_param(k, k + 1))
                          for k, t in enumerate(m.params)]
                methods.append(CtorDecl(params, body, private=m.private))
            else:
                params = [Param(t, policy.name_param(k, k if m.static else k + 1))
                          for k, t in enumerate(m.params)]
                methods.append(MethodDecl(m.name, m.ret, params, body,
                                          static=m.static, private=m.private))
            continue
        params, body, _lifter = lift_method(unit, bc, m, policy)
        if m.name == "<init>":
            methods.append(CtorDecl(params, body, private=m.private))
        else:
            methods.append(MethodDecl(m.name, m.ret, params, body,
                                      static=m.static, private=m.private))

    nesteds: list[Member] = []
    for n in bc.nested:
        if n.synthetic:
            continue
        inner = assemble_class(unit, n, policy)
        nesteds.append(NestedClassDecl(simple_name(n.name), inner.members))

    members: list[Member] = list(fields) + methods + nesteds
    if static_block is not None:
        members.append(static_block)
    return ClassAst(bc.name, bc.super_name, members)


def collect_cast_sites(bc: BytecodeClass) -> list[CastSite]:
    """Where a faithful backend must pin an overload with a cast.

    Runs the engine with neutral settings purely for its bookkeeping;
    used by shape predicates and the corpus oracle."""
    from .backends import _LITERALIST_POLICY  # late import, no cycle at call time

    unit = {bc.name: bc}
    for n in bc.nested:
        unit[n.name] = n
    sites: list[CastSite] = []
    for cls in unit.values():
        wrappers = wrapper_ctor_ids(cls)
        for i, m in enumerate(cls.methods):
            if i in wrappers:
                continue
            try:
                _p, _b, lifter = lift_method(unit, cls, m, _LITERALIST_POLICY)
            except StructureError:
                continue
            sites.extend(lifter.cast_sites)
    return sites
