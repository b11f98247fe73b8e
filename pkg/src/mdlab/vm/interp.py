"""Deterministic bytecode interpreter.

Values are host ints, bools, strings, None (null), ObjRef instances,
and plain lists standing in for string builders. Execution is bounded
by an instruction budget (fuel) and a frame-depth budget; exceeding
either yields a `timeout` verdict, never a wall-clock race. Runtime
resolution failures yield a `crash` verdict rather than a host error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from mdlab.vm.model import BytecodeClass, MethodBody, method_id

DEFAULT_FUEL = 10_000_000
FRAME_BUDGET = 50_000

DIV_BY_ZERO = "minij.DivByZero"
NULL_REF = "minij.NullRef"
STR_BUILDER = "minij.StrBuilder"


class ObjRef:
    __slots__ = ("cls", "fields", "oid")

    def __init__(self, cls: str, fields: dict, oid: int):
        self.cls = cls
        self.fields = fields
        self.oid = oid

    def __repr__(self):
        return f"<{self.cls}#{self.oid}>"


def format_value(v) -> str:
    """The one textual rendering used by PRINT, CONCAT, and builder appends."""
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, ObjRef):
        return f"{v.cls}#{v.oid}"
    if isinstance(v, list):
        return STR_BUILDER
    raise _Crash(f"unprintable value {v!r}")


@dataclass
class Verdict:
    outcome: str   # normal | throws:<type> | timeout | crash
    stdout: str
    steps: int
    detail: str = ""


class _Timeout(Exception):
    pass


class _Crash(Exception):
    pass


class _Thrown(Exception):
    def __init__(self, ref: ObjRef):
        self.ref = ref


def _default(ftype: str):
    if ftype == "int":
        return 0
    if ftype == "bool":
        return False
    if ftype == "str":
        return ""
    return None


def _idiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _irem(a: int, b: int) -> int:
    return a - _idiv(a, b) * b


@dataclass
class _Frame:
    bc: BytecodeClass
    m: MethodBody
    by_off: dict
    pc: int = 0
    stack: list = field(default_factory=list)
    locals: list = field(default_factory=list)
    is_ctor_call: bool = False  # push locals[0] back on return


class _Machine:
    def __init__(self, classes: dict[str, BytecodeClass], fuel: int):
        self.classes = classes
        self.fuel = fuel
        self.steps = 0
        self.out: list[str] = []
        self.statics: dict[tuple[str, str], object] = {}
        self.frames: list[_Frame] = []
        self.next_oid = 0
        self._by_off_cache: dict[int, dict] = {}
        for bc in classes.values():
            for f in bc.fields:
                if f.static:
                    self.statics[(bc.name, f.name)] = _default(f.type)

    # ---- resolution ----

    def _cls(self, name: str) -> BytecodeClass:
        bc = self.classes.get(name)
        if bc is None:
            raise _Crash(f"unresolved class {name}")
        return bc

    def _super_chain(self, name: str):
        seen = set()
        while name is not None and name not in seen:
            seen.add(name)
            yield name
            bc = self.classes.get(name)
            name = bc.super_name if bc else None

    def is_subtype(self, sub: str, sup: str) -> bool:
        return any(c == sup for c in self._super_chain(sub))

    def find_method(self, cls: str, name: str, params: tuple, walk: bool) -> tuple[BytecodeClass, MethodBody]:
        for cname in self._super_chain(cls) if walk else (cls,):
            bc = self.classes.get(cname)
            if bc is None:
                break
            for m in bc.methods:
                if m.name == name and m.params == params:
                    return bc, m
        raise _Crash(f"unresolved method {cls}.{name}({','.join(params)})")

    def _field_owner(self, cls: str, fname: str, static: bool) -> str:
        for cname in self._super_chain(cls):
            bc = self.classes.get(cname)
            if bc is None:
                break
            for f in bc.fields:
                if f.name == fname and f.static == static:
                    return cname
        raise _Crash(f"unresolved field {cls}.{fname}")

    def new_obj(self, cls: str) -> ObjRef:
        fields = {}
        for cname in self._super_chain(cls):
            bc = self.classes.get(cname)
            if bc is None:
                break
            for f in bc.fields:
                if not f.static:
                    fields.setdefault(f.name, _default(f.type))
        ref = ObjRef(cls, fields, self.next_oid)
        self.next_oid += 1
        return ref

    # ---- frames ----

    def _frame_for(self, bc: BytecodeClass, m: MethodBody, args: list, ctor_ref=None) -> _Frame:
        if len(self.frames) >= FRAME_BUDGET:
            raise _Timeout()
        key = id(m)
        by_off = self._by_off_cache.get(key)
        if by_off is None:
            off = 0
            by_off = {}
            for ins in m.code:
                by_off[off] = ins
                off += 1 if ins.arg is None else 2
            self._by_off_cache[key] = by_off
        locals_ = [None] * max(m.max_locals, len(args) + (0 if ctor_ref is None else 1))
        i = 0
        if ctor_ref is not None or not m.static:
            locals_[0] = ctor_ref if ctor_ref is not None else args[0]
            rest = args if ctor_ref is not None else args[1:]
            for v in rest:
                i += 1
                locals_[i] = v
        else:
            for v in args:
                locals_[i] = v
                i += 1
        return _Frame(bc, m, by_off, locals=locals_, is_ctor_call=ctor_ref is not None)

    # ---- exception dispatch ----

    def _raise_ref(self, ref: ObjRef) -> None:
        while self.frames:
            fr = self.frames[-1]
            for h in fr.m.handlers:
                if h.start <= fr.pc < h.end and self.is_subtype(ref.cls, h.type):
                    fr.stack = [ref]
                    fr.pc = h.target
                    return
            self.frames.pop()
        raise _Thrown(ref)

    def builtin_exc(self, cls: str) -> ObjRef:
        ref = ObjRef(cls, {}, self.next_oid)
        self.next_oid += 1
        return ref

    # ---- main loop ----

    def run_frame_to_completion(self, fr: _Frame) -> None:
        base = len(self.frames)
        self.frames.append(fr)
        while len(self.frames) > base:
            self._step()

    def _step(self) -> None:
        if self.steps >= self.fuel:
            raise _Timeout()
        self.steps += 1
        fr = self.frames[-1]
        ins = fr.by_off.get(fr.pc)
        if ins is None:
            raise _Crash(f"pc {fr.pc} not at instruction in {fr.bc.name}.{method_id(fr.m)}")
        op, arg = ins.op, ins.arg
        st = fr.stack
        next_pc = fr.pc + (1 if arg is None else 2)

        try:
            if op == "LDC":
                st.append(fr.bc.pool[arg][1])
            elif op == "ACONST_NULL":
                st.append(None)
            elif op == "CONST_TRUE":
                st.append(True)
            elif op == "CONST_FALSE":
                st.append(False)
            elif op == "LOAD":
                st.append(fr.locals[arg])
            elif op == "STORE":
                fr.locals[arg] = st.pop()
            elif op == "POP":
                st.pop()
            elif op == "GETSTATIC":
                _, cls, name, _t = fr.bc.pool[arg]
                owner = self._field_owner(cls, name, static=True)
                st.append(self.statics[(owner, name)])
            elif op == "PUTSTATIC":
                _, cls, name, _t = fr.bc.pool[arg]
                owner = self._field_owner(cls, name, static=True)
                self.statics[(owner, name)] = st.pop()
            elif op == "GETFIELD":
                _, cls, name, _t = fr.bc.pool[arg]
                ref = st.pop()
                if ref is None:
                    self._raise_ref(self.builtin_exc(NULL_REF))
                    return
                if not isinstance(ref, ObjRef) or name not in ref.fields:
                    raise _Crash(f"bad field access {cls}.{name}")
                st.append(ref.fields[name])
            elif op == "PUTFIELD":
                _, cls, name, _t = fr.bc.pool[arg]
                val = st.pop()
                ref = st.pop()
                if ref is None:
                    self._raise_ref(self.builtin_exc(NULL_REF))
                    return
                if not isinstance(ref, ObjRef) or name not in ref.fields:
                    raise _Crash(f"bad field store {cls}.{name}")
                ref.fields[name] = val
            elif op in ("ADD", "SUB", "MUL", "DIV", "MOD"):
                b = st.pop()
                a = st.pop()
                if op == "ADD":
                    st.append(a + b)
                elif op == "SUB":
                    st.append(a - b)
                elif op == "MUL":
                    st.append(a * b)
                else:
                    if b == 0:
                        self._raise_ref(self.builtin_exc(DIV_BY_ZERO))
                        return
                    st.append(_idiv(a, b) if op == "DIV" else _irem(a, b))
            elif op == "NEG":
                st.append(-st.pop())
            elif op == "NOT":
                st.append(not st.pop())
            elif op == "CONCAT":
                b = st.pop()
                a = st.pop()
                st.append(format_value(a) + format_value(b))
            elif op == "BUILDER_NEW":
                st.append([])
            elif op == "BUILDER_APPEND":
                v = st.pop()
                builder = st.pop()
                if not isinstance(builder, list):
                    raise _Crash("append on non-builder")
                builder.append(format_value(v))
                st.append(builder)
            elif op == "BUILDER_STR":
                builder = st.pop()
                if not isinstance(builder, list):
                    raise _Crash("str() on non-builder")
                st.append("".join(builder))
            elif op in ("CMPEQ", "CMPNE"):
                b = st.pop()
                a = st.pop()
                if isinstance(a, ObjRef) or isinstance(b, ObjRef) or a is None or b is None:
                    eq = a is b
                else:
                    eq = (type(a) is type(b)) and a == b
                st.append(eq if op == "CMPEQ" else not eq)
            elif op in ("CMPLT", "CMPLE", "CMPGT", "CMPGE"):
                b = st.pop()
                a = st.pop()
                st.append(
                    a < b if op == "CMPLT" else
                    a <= b if op == "CMPLE" else
                    a > b if op == "CMPGT" else a >= b
                )
            elif op == "IFEQ":
                if not st.pop():
                    fr.pc = arg
                    return
            elif op == "IFNE":
                if st.pop():
                    fr.pc = arg
                    return
            elif op == "GOTO":
                fr.pc = arg
                return
            elif op == "NEW":
                cls = fr.bc.pool[arg][1]
                if cls in self.classes or cls in (DIV_BY_ZERO, NULL_REF):
                    st.append(self.new_obj(cls))
                else:
                    raise _Crash(f"unresolved class {cls}")
            elif op == "INVOKESTATIC":
                _, cls, name, params, _ret = fr.bc.pool[arg]
                args = [st.pop() for _ in params][::-1]
                bc, m = self.find_method(cls, name, params, walk=True)
                fr.pc = next_pc
                self.frames.append(self._frame_for(bc, m, args))
                return
            elif op == "INVOKEVIRT":
                _, cls, name, params, _ret = fr.bc.pool[arg]
                args = [st.pop() for _ in params][::-1]
                ref = st.pop()
                if ref is None:
                    self._raise_ref(self.builtin_exc(NULL_REF))
                    return
                if not isinstance(ref, ObjRef):
                    raise _Crash(f"virtual call on non-object {ref!r}")
                bc, m = self.find_method(ref.cls, name, params, walk=True)
                fr.pc = next_pc
                self.frames.append(self._frame_for(bc, m, [ref] + args))
                return
            elif op == "INVOKESPECIAL":
                _, cls, name, params, _ret = fr.bc.pool[arg]
                if name != "<init>":
                    raise _Crash("INVOKESPECIAL outside constructor call")
                args = [st.pop() for _ in params][::-1]
                ref = st.pop()
                if ref is None:
                    self._raise_ref(self.builtin_exc(NULL_REF))
                    return
                if cls in (DIV_BY_ZERO, NULL_REF):
                    st.append(ref)  # builtin constructors are no-ops
                else:
                    bc, m = self.find_method(cls, "<init>", params, walk=False)
                    fr.pc = next_pc
                    self.frames.append(self._frame_for(bc, m, args, ctor_ref=ref))
                    return
            elif op == "THROW":
                ref = st.pop()
                if ref is None:
                    self._raise_ref(self.builtin_exc(NULL_REF))
                    return
                if not isinstance(ref, ObjRef):
                    raise _Crash(f"throw of non-object {ref!r}")
                self._raise_ref(ref)
                return
            elif op in ("RETURN", "IRETURN", "ARETURN"):
                val = st.pop() if op != "RETURN" else None
                done = self.frames.pop()
                if self.frames:
                    caller = self.frames[-1].stack
                    if done.is_ctor_call:
                        caller.append(done.locals[0])
                    elif op != "RETURN":
                        caller.append(val)
                return
            elif op == "PRINT":
                self.out.append(format_value(st.pop()) + "\n")
            else:
                raise _Crash(f"unhandled opcode {op}")
        except IndexError as exc:
            raise _Crash(f"operand stack fault at {fr.pc} in {fr.bc.name}.{method_id(fr.m)}") from exc
        except TypeError as exc:
            raise _Crash(f"type fault at {fr.pc} in {fr.bc.name}.{method_id(fr.m)}: {exc}") from exc

        fr.pc = next_pc


def _parse_entry(sig: str) -> tuple[str, str, tuple[str, ...]]:
    head, _, inner = sig.partition("(")
    cls, _, name = head.rpartition(".")
    params = tuple(p for p in inner.rstrip(")").split(",") if p)
    return cls, name, params


def execute(
    classes: dict[str, BytecodeClass],
    entry: str,
    args: list,
    fuel: int = DEFAULT_FUEL,
) -> Verdict:
    """Run clinits (sorted class order), then the entry method.

    Deterministic for fixed inputs. `entry` is `pkg.Cls.method(types)`.
    """
    mach = _Machine(classes, fuel)
    try:
        for cname in sorted(classes):
            bc = classes[cname]
            for m in bc.methods:
                if m.name == "<clinit>":
                    try:
                        mach.run_frame_to_completion(mach._frame_for(bc, m, []))
                    except _Thrown as t:
                        raise _Crash(f"exception {t.ref.cls} escaped static initializer of {cname}")
        cls, name, params = _parse_entry(entry)
        bc, m = mach.find_method(cls, name, params, walk=True)
        if not m.static:
            raise _Crash(f"entry {entry} is not static")
        if len(args) != len(params):
            raise _Crash(f"entry {entry} expects {len(params)} args, got {len(args)}")
        mach.run_frame_to_completion(mach._frame_for(bc, m, list(args)))
    except _Timeout:
        return Verdict("timeout", "".join(mach.out), mach.steps)
    except _Thrown as t:
        return Verdict(f"throws:{t.ref.cls}", "".join(mach.out), mach.steps)
    except _Crash as c:
        return Verdict("crash", "".join(mach.out), mach.steps, detail=str(c))
    return Verdict("normal", "".join(mach.out), mach.steps)
