"""Bytecode object model, canonicalization, and the textual assembly format.

A class is a constant pool plus field and method tables. Instructions are
one opcode and at most one integer operand; an instruction occupies
1 + #operands offset units, and branch operands are absolute code offsets
in those units. Equality between two classes is defined as byte equality
of their serialized forms after pool canonicalization.
"""

from __future__ import annotations

import difflib
import json
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union

# ====== INSTRUCTION SET ======

# op -> operand count (0 or 1)
OPS = {
    "LDC": 1,
    "ACONST_NULL": 0,
    "CONST_TRUE": 0,
    "CONST_FALSE": 0,
    "LOAD": 1,
    "STORE": 1,
    "POP": 0,
    "GETSTATIC": 1,
    "PUTSTATIC": 1,
    "GETFIELD": 1,
    "PUTFIELD": 1,
    "ADD": 0,
    "SUB": 0,
    "MUL": 0,
    "DIV": 0,
    "MOD": 0,
    "NEG": 0,
    "NOT": 0,
    "CONCAT": 0,
    "BUILDER_NEW": 0,
    "BUILDER_APPEND": 0,
    "BUILDER_STR": 0,
    "CMPEQ": 0,
    "CMPNE": 0,
    "CMPLT": 0,
    "CMPLE": 0,
    "CMPGT": 0,
    "CMPGE": 0,
    "IFEQ": 1,
    "IFNE": 1,
    "GOTO": 1,
    "INVOKESTATIC": 1,
    "INVOKEVIRT": 1,
    "INVOKESPECIAL": 1,
    "NEW": 1,
    "THROW": 0,
    "RETURN": 0,
    "IRETURN": 0,
    "ARETURN": 0,
    "PRINT": 0,
}

# ops whose operand is a pool index
POOL_REF_OPS = frozenset({
    "LDC", "GETSTATIC", "PUTSTATIC", "GETFIELD", "PUTFIELD",
    "INVOKESTATIC", "INVOKEVIRT", "INVOKESPECIAL", "NEW",
})

BRANCH_OPS = frozenset({"IFEQ", "IFNE", "GOTO"})

# control never falls through these
TERMINAL_OPS = frozenset({"GOTO", "THROW", "RETURN", "IRETURN", "ARETURN"})

_KIND_ORDER = {"int": 0, "str": 1, "fieldref": 2, "methodref": 3, "typeref": 4}

# pool entries are tagged tuples:
#   ("int", value)  ("str", text)  ("typeref", qname)
#   ("fieldref", cls, name, type)
#   ("methodref", cls, name, (param types...), ret)
PoolEntry = tuple


@dataclass
class Instr:
    op: str
    arg: Optional[int] = None

    def __post_init__(self):
        n = OPS.get(self.op)
        if n is None:
            raise ValueError(f"unknown opcode {self.op!r}")
        if (self.arg is not None) != (n == 1):
            raise ValueError(f"{self.op} takes {n} operands")


def instr_width(ins: Instr) -> int:
    return 1 if ins.arg is None else 2


def code_offsets(code: list[Instr]) -> list[int]:
    """Absolute offset of each instruction, in width units."""
    offs, pos = [], 0
    for ins in code:
        offs.append(pos)
        pos += instr_width(ins)
    return offs


def code_end(code: list[Instr]) -> int:
    return sum(instr_width(i) for i in code)


@dataclass
class Handler:
    """Exception table row: protects [start, end), jumps to target."""
    start: int
    end: int
    target: int
    type: str


@dataclass
class MethodBody:
    name: str                       # plain name, "<init>", or "<clinit>"
    params: tuple[str, ...]
    ret: str
    static: bool = False
    private: bool = False
    synthetic: bool = False
    max_stack: int = 0
    max_locals: int = 0
    code: list[Instr] = field(default_factory=list)
    handlers: list[Handler] = field(default_factory=list)
    local_names: Optional[tuple[str, ...]] = None


@dataclass
class FieldInfo:
    name: str
    type: str
    static: bool = False
    final: bool = False
    private: bool = False
    synthetic: bool = False


@dataclass
class BytecodeClass:
    name: str
    super_name: Optional[str] = None
    synthetic: bool = False
    pool: list[PoolEntry] = field(default_factory=list)
    fields: list[FieldInfo] = field(default_factory=list)
    methods: list[MethodBody] = field(default_factory=list)
    nested: list[BytecodeClass] = field(default_factory=list)


def method_id(m: MethodBody) -> str:
    return f"{m.name}({','.join(m.params)})"


def flatten_classes(top: list[BytecodeClass]) -> dict[str, BytecodeClass]:
    """Name -> class for every top-level and nested class."""
    out: dict[str, BytecodeClass] = {}
    for bc in top:
        out[bc.name] = bc
        for n in bc.nested:
            out[n.name] = n
    return out


# ====== POOL CANONICALIZATION ======


def _entry_key(e: PoolEntry):
    return (_KIND_ORDER[e[0]],) + tuple(e[1:])


def canonicalize_pool(bc: BytecodeClass) -> BytecodeClass:
    """Sorted, deduplicated pool with instruction indices rewritten.

    Pure: returns a fresh class; nested classes are canonicalized too.
    Idempotent and invariant under any permutation of the input pool.
    """
    uniq = sorted(set(bc.pool), key=_entry_key)
    remap = {}
    index = {e: k for k, e in enumerate(uniq)}
    for old, e in enumerate(bc.pool):
        remap[old] = index[e]

    methods = []
    for m in bc.methods:
        code = [
            Instr(i.op, remap[i.arg]) if i.op in POOL_REF_OPS else Instr(i.op, i.arg)
            for i in m.code
        ]
        methods.append(replace(m, code=code, handlers=[replace(h) for h in m.handlers]))
    return BytecodeClass(
        name=bc.name,
        super_name=bc.super_name,
        synthetic=bc.synthetic,
        pool=uniq,
        fields=[replace(f) for f in bc.fields],
        methods=methods,
        nested=[canonicalize_pool(n) for n in bc.nested],
    )


def bytecode_equal(a: BytecodeClass, b: BytecodeClass) -> tuple[bool, str]:
    """Equal modulo constant-pool reordering; on mismatch, a unified diff."""
    sa = serialize_mjc(canonicalize_pool(a))
    sb = serialize_mjc(canonicalize_pool(b))
    if sa == sb:
        return True, ""
    diff = difflib.unified_diff(
        sa.splitlines(keepends=True), sb.splitlines(keepends=True),
        fromfile=a.name, tofile=b.name,
    )
    return False, "".join(diff)


# ====== TEXTUAL ASSEMBLY (.mjc) ======


def _flags_str(*pairs: tuple[str, bool]) -> str:
    return ",".join(n for n, on in pairs if on)


def _pool_payload(e: PoolEntry) -> str:
    kind = e[0]
    if kind == "int":
        return str(e[1])
    if kind == "str":
        return json.dumps(e[1], ensure_ascii=False)
    if kind == "typeref":
        return e[1]
    if kind == "fieldref":
        return f"{e[1]}.{e[2]}:{e[3]}"
    if kind == "methodref":
        return f"{e[1]}.{e[2]}({','.join(e[3])}):{e[4]}"
    raise ValueError(f"unknown pool kind {kind!r}")


def _emit_class(bc: BytecodeClass, header: str, out: list[str]) -> None:
    sup = bc.super_name if bc.super_name else "-"
    out.append(f"{header} {bc.name} super={sup} flags={_flags_str(('synthetic', bc.synthetic))}")
    out.append("POOL:")
    for k, e in enumerate(bc.pool):
        out.append(f"#{k} {e[0]} {_pool_payload(e)}")
    for f in bc.fields:
        fl = _flags_str(("static", f.static), ("final", f.final),
                        ("private", f.private), ("synthetic", f.synthetic))
        out.append(f"FIELD {f.name} {f.type} flags={fl}")
    for m in bc.methods:
        fl = _flags_str(("static", m.static), ("private", m.private),
                        ("synthetic", m.synthetic))
        out.append(
            f"METHOD {m.name}({','.join(m.params)}):{m.ret} "
            f"flags={fl} stack={m.max_stack} locals={m.max_locals}"
        )
        if m.local_names is not None:
            out.append(f"  LOCALS {','.join(m.local_names)}")
        for h in m.handlers:
            out.append(f"  CATCH {h.start} {h.end} {h.target} {h.type}")
        for off, ins in zip(code_offsets(m.code), m.code):
            if ins.arg is None:
                out.append(f"  {off}: {ins.op}")
            elif ins.op in POOL_REF_OPS:
                out.append(f"  {off}: {ins.op} #{ins.arg}")
            else:
                out.append(f"  {off}: {ins.op} {ins.arg}")


def serialize_mjc(bc: BytecodeClass) -> str:
    out: list[str] = []
    _emit_class(bc, "CLASS", out)
    for n in bc.nested:
        _emit_class(n, "NESTED", out)
    return "\n".join(out) + "\n"


class MjcFormatError(ValueError):
    pass


_METHOD_RE = re.compile(
    r"^METHOD (?P<name><?[A-Za-z_$][\w$]*>?)\((?P<params>[^)]*)\):(?P<ret>\S+)"
    r" flags=(?P<flags>[\w,]*) stack=(?P<stack>\d+) locals=(?P<locals>\d+)$"
)
_INSTR_RE = re.compile(r"^(?P<off>\d+): (?P<op>[A-Z_]+)(?: (?P<arg>#?-?\d+))?$")


def _parse_pool_line(rest: str) -> PoolEntry:
    kind, _, payload = rest.partition(" ")
    if kind == "int":
        return ("int", int(payload))
    if kind == "str":
        return ("str", json.loads(payload))
    if kind == "typeref":
        return ("typeref", payload)
    if kind == "fieldref":
        ref, _, ftype = payload.rpartition(":")
        cls, _, name = ref.rpartition(".")
        return ("fieldref", cls, name, ftype)
    if kind == "methodref":
        sig, _, ret = payload.rpartition(":")
        head, _, inner = sig.partition("(")
        cls, _, name = head.rpartition(".")
        params = tuple(p for p in inner.rstrip(")").split(",") if p)
        return ("methodref", cls, name, params, ret)
    raise MjcFormatError(f"unknown pool kind {kind!r}")


def parse_mjc(text: str) -> BytecodeClass:
    """Load a class from its textual assembly. Strict: malformed lines raise."""
    top: Optional[BytecodeClass] = None
    cur: Optional[BytecodeClass] = None
    method: Optional[MethodBody] = None
    in_pool = False

    def flags(s: str) -> set[str]:
        return set(x for x in s.split(",") if x)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            head, _, rest = line.partition(" ")
            if head in ("CLASS", "NESTED"):
                parts = rest.split(" ")
                name = parts[0]
                sup = parts[1].removeprefix("super=")
                fl = flags(parts[2].removeprefix("flags="))
                cur = BytecodeClass(
                    name=name,
                    super_name=None if sup == "-" else sup,
                    synthetic="synthetic" in fl,
                )
                method = None
                in_pool = False
                if head == "CLASS":
                    if top is not None:
                        raise MjcFormatError("multiple CLASS headers")
                    top = cur
                else:
                    if top is None:
                        raise MjcFormatError("NESTED before CLASS")
                    top.nested.append(cur)
            elif line == "POOL:":
                in_pool = True
                method = None
            elif line.startswith("#") and in_pool:
                k, _, rest2 = line.partition(" ")
                if int(k[1:]) != len(cur.pool):
                    raise MjcFormatError("pool entries out of order")
                cur.pool.append(_parse_pool_line(rest2))
            elif head == "FIELD":
                in_pool = False
                name, ftype, flpart = rest.split(" ")
                fl = flags(flpart.removeprefix("flags="))
                cur.fields.append(FieldInfo(
                    name, ftype, static="static" in fl, final="final" in fl,
                    private="private" in fl, synthetic="synthetic" in fl,
                ))
            elif head == "METHOD":
                in_pool = False
                m = _METHOD_RE.match(line)
                if not m:
                    raise MjcFormatError("malformed METHOD header")
                fl = flags(m["flags"])
                method = MethodBody(
                    name=m["name"],
                    params=tuple(p for p in m["params"].split(",") if p),
                    ret=m["ret"],
                    static="static" in fl, private="private" in fl,
                    synthetic="synthetic" in fl,
                    max_stack=int(m["stack"]), max_locals=int(m["locals"]),
                )
                cur.methods.append(method)
            elif head == "LOCALS" and method is not None:
                method.local_names = tuple(rest.split(","))
            elif head == "CATCH" and method is not None:
                s, e, t, ty = rest.split(" ")
                method.handlers.append(Handler(int(s), int(e), int(t), ty))
            else:
                im = _INSTR_RE.match(line)
                if not im or method is None:
                    raise MjcFormatError(f"unrecognized line {line!r}")
                op = im["op"]
                if op not in OPS:
                    raise MjcFormatError(f"unknown opcode {op}")
                argtext = im["arg"]
                arg = None
                if argtext is not None:
                    arg = int(argtext[1:]) if argtext.startswith("#") else int(argtext)
                expected = code_end(method.code)
                if int(im["off"]) != expected:
                    raise MjcFormatError(
                        f"offset {im['off']} out of step (expected {expected})"
                    )
                method.code.append(Instr(op, arg))
        except MjcFormatError:
            raise
        except Exception as exc:
            raise MjcFormatError(f"line {lineno}: {exc}") from exc

    if top is None:
        raise MjcFormatError("no CLASS header")
    return top
