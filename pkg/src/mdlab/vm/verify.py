"""Static checks every class must pass before execution.

Checks, per method: pool operands exist and have the kind the opcode
needs, local slots stay under max_locals, branch targets land on
instruction starts, the stack depth is consistent at every join and
never underflows, declared max_stack covers the computed depth, control
cannot fall off the end of the code, and handler rows protect sane
ranges. Each violation becomes one Diagnostic naming the offset.
"""

from __future__ import annotations

from mdlab.lang import NO_SPAN, Diagnostic
from mdlab.vm.model import (
    OPS, POOL_REF_OPS, TERMINAL_OPS, BytecodeClass, MethodBody,
    code_end, code_offsets, method_id,
)

_POOL_KIND = {
    "LDC": ("int", "str"),
    "GETSTATIC": ("fieldref",), "PUTSTATIC": ("fieldref",),
    "GETFIELD": ("fieldref",), "PUTFIELD": ("fieldref",),
    "INVOKESTATIC": ("methodref",), "INVOKEVIRT": ("methodref",),
    "INVOKESPECIAL": ("methodref",),
    "NEW": ("typeref",),
}

_FIXED_EFFECT = {
    "ACONST_NULL": 1, "CONST_TRUE": 1, "CONST_FALSE": 1, "LDC": 1,
    "LOAD": 1, "STORE": -1, "POP": -1,
    "GETSTATIC": 1, "PUTSTATIC": -1, "GETFIELD": 0, "PUTFIELD": -2,
    "ADD": -1, "SUB": -1, "MUL": -1, "DIV": -1, "MOD": -1,
    "NEG": 0, "NOT": 0,
    "CONCAT": -1, "BUILDER_NEW": 1, "BUILDER_APPEND": -1, "BUILDER_STR": 0,
    "CMPEQ": -1, "CMPNE": -1, "CMPLT": -1, "CMPLE": -1,
    "CMPGT": -1, "CMPGE": -1,
    "IFEQ": -1, "IFNE": -1, "GOTO": 0,
    "NEW": 1, "THROW": -1, "PRINT": -1,
    "RETURN": 0, "IRETURN": -1, "ARETURN": -1,
}

_MIN_DEPTH = {
    "STORE": 1, "POP": 1, "PUTSTATIC": 1, "GETFIELD": 1, "PUTFIELD": 2,
    "ADD": 2, "SUB": 2, "MUL": 2, "DIV": 2, "MOD": 2, "NEG": 1, "NOT": 1,
    "CONCAT": 2, "BUILDER_APPEND": 2, "BUILDER_STR": 1,
    "CMPEQ": 2, "CMPNE": 2, "CMPLT": 2, "CMPLE": 2, "CMPGT": 2, "CMPGE": 2,
    "IFEQ": 1, "IFNE": 1, "THROW": 1, "PRINT": 1, "IRETURN": 1, "ARETURN": 1,
}


def _effect(ins, pool) -> tuple[int, int]:
    """(min depth required, net change)."""
    op = ins.op
    if op in ("INVOKESTATIC", "INVOKEVIRT", "INVOKESPECIAL"):
        entry = pool[ins.arg]
        nparams = len(entry[3])
        returns = 0 if entry[4] == "void" else 1
        if op == "INVOKESTATIC":
            return nparams, returns - nparams
        if op == "INVOKEVIRT":
            return nparams + 1, returns - nparams - 1
        # constructor call: pops ref and args, pushes the ref back
        return nparams + 1, -nparams
    return _MIN_DEPTH.get(op, 0), _FIXED_EFFECT[op]


def compute_max_stack(bc: BytecodeClass, m: MethodBody) -> int:
    """Reachable-depth maximum for freshly generated, well-shaped code."""
    offs = code_offsets(m.code)
    by_off = dict(zip(offs, m.code))
    depth_at: dict[int, int] = {}
    work: list[int] = []

    def flow(off: int, d: int) -> None:
        if off not in depth_at:
            depth_at[off] = d
            work.append(off)
        elif depth_at[off] != d:
            raise ValueError(f"inconsistent depth at {off} in {bc.name}.{method_id(m)}")

    if not m.code:
        return 0
    flow(offs[0], 0)
    for h in m.handlers:
        flow(h.target, 1)
    peak = 0
    while work:
        off = work.pop()
        ins = by_off[off]
        d = depth_at[off]
        need, change = _effect(ins, bc.pool)
        if d < need:
            raise ValueError(f"underflow at {off} in {bc.name}.{method_id(m)}")
        nd = d + change
        peak = max(peak, d, nd)
        nxt = off + (1 if ins.arg is None else 2)
        if ins.op in ("IFEQ", "IFNE"):
            flow(ins.arg, nd)
            flow(nxt, nd)
        elif ins.op == "GOTO":
            flow(ins.arg, nd)
        elif ins.op not in TERMINAL_OPS:
            flow(nxt, nd)
    return peak


def verify_method(bc: BytecodeClass, m: MethodBody) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    where = f"{bc.name}.{method_id(m)}"

    def bad(off: int, msg: str) -> None:
        diags.append(Diagnostic(f"{where} at {off}: {msg}", NO_SPAN))

    offs = code_offsets(m.code)
    starts = set(offs)
    end = code_end(m.code)
    by_off = dict(zip(offs, m.code))

    if not m.code:
        bad(0, "empty code")
        return diags

    # operand shape checks
    for off, ins in zip(offs, m.code):
        op = ins.op
        if op in POOL_REF_OPS:
            if not (0 <= ins.arg < len(bc.pool)):
                bad(off, f"{op} pool index {ins.arg} out of range")
                continue
            kind = bc.pool[ins.arg][0]
            if kind not in _POOL_KIND[op]:
                bad(off, f"{op} expects {'/'.join(_POOL_KIND[op])} pool entry, got {kind}")
        elif op in ("LOAD", "STORE"):
            if not (0 <= ins.arg < m.max_locals):
                bad(off, f"{op} slot {ins.arg} outside locals (max {m.max_locals})")
        elif op in ("IFEQ", "IFNE", "GOTO"):
            if ins.arg not in starts:
                bad(off, f"branch target {ins.arg} is not an instruction start")

    for h in m.handlers:
        if h.start not in starts or not (h.start < h.end <= end):
            bad(h.start, "handler protects an invalid range")
        if h.target not in starts:
            bad(h.target, "handler target is not an instruction start")

    if diags:
        return diags  # depth analysis needs sane shapes

    # abstract stack-depth interpretation
    depth_at: dict[int, int] = {}
    work: list[int] = []

    def flow(off: int, d: int) -> None:
        prev = depth_at.get(off)
        if prev is None:
            depth_at[off] = d
            work.append(off)
        elif prev != d:
            bad(off, f"inconsistent stack depth at join ({prev} vs {d})")

    flow(offs[0], 0)
    for h in m.handlers:
        flow(h.target, 1)  # handler entry holds exactly the thrown ref

    computed_max = 0
    while work and not diags:
        off = work.pop()
        ins = by_off[off]
        d = depth_at[off]
        need, change = _effect(ins, bc.pool)
        if d < need:
            bad(off, f"stack underflow ({ins.op} needs {need}, depth {d})")
            break
        nd = d + change
        computed_max = max(computed_max, d, nd)
        nxt = off + (1 if ins.arg is None else 2)
        if ins.op in ("IFEQ", "IFNE"):
            flow(ins.arg, nd)
            flow(nxt, nd)
        elif ins.op == "GOTO":
            flow(ins.arg, nd)
        elif ins.op in TERMINAL_OPS:
            pass
        else:
            if nxt >= end:
                bad(off, "control can fall off the end of the code")
                break
            flow(nxt, nd)

    if not diags:
        last_off = offs[-1]
        if m.code[-1].op not in TERMINAL_OPS and last_off in depth_at:
            bad(last_off, "control can fall off the end of the code")
        if m.max_stack < computed_max:
            bad(0, f"declared stack={m.max_stack} below computed {computed_max}")

    ret_ops = {i.op for i in m.code if i.op in ("RETURN", "IRETURN", "ARETURN")}
    want = "RETURN" if m.ret == "void" else ("IRETURN" if m.ret in ("int", "bool") else "ARETURN")
    for op in ret_ops - {want}:
        bad(0, f"{op} does not match return type {m.ret}")

    return diags


def verify_class(bc: BytecodeClass) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    for m in bc.methods:
        diags.extend(verify_method(bc, m))
    for n in bc.nested:
        diags.extend(verify_class(n))
    return diags


def verify_program(classes: dict[str, BytecodeClass]) -> list[Diagnostic]:
    """Verify a flattened name->class table; each class checked exactly once."""
    diags: list[Diagnostic] = []
    seen: set[int] = set()
    for name in sorted(classes):
        bc = classes[name]
        if id(bc) in seen:
            continue
        seen.add(id(bc))
        for m in bc.methods:
            diags.extend(verify_method(bc, m))
        for n in bc.nested:
            if id(n) not in seen and n.name not in classes:
                seen.add(id(n))
                diags.extend(verify_class(n))
    return diags
