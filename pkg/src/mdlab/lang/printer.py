"""Canonical source printer for MiniJ ASTs.

The printer is the single formatting authority in the lab: parse followed
by pretty_print followed by parse is the identity on well-formed ASTs
(spans aside).  Names are always printed fully qualified, so no import
machinery exists anywhere in the pipeline.

`PrintOptions.escape_newlines=False` reproduces a classic decompiler
defect: string constants containing a newline are emitted verbatim, which
does not re-lex as a single literal.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import escape_string
from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Expr, ExprStmt, FieldDecl, FieldGet, If, IntLit, Member,
    MethodDecl, NestedClassDecl, New, NullLit, Print, Return, StaticBlock,
    StaticCall, StaticGet, Stmt, StrLit, This, Throw, ToolFault, TryCatch,
    Unary, VarDecl, VarRef, While, simple_name,
)


@dataclass(frozen=True)
class PrintOptions:
    escape_newlines: bool = True
    indent: str = "  "


_DEFAULT = PrintOptions()

_PREC = {"==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
         "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}
_UNARY_PREC = 6
_ATOM_PREC = 7


def _expr(e: Expr, opts: PrintOptions, prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return escape_string(e.value, escape_newlines=opts.escape_newlines)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, This):
        return "this"
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, FieldGet):
        return f"{_expr(e.target, opts, _ATOM_PREC)}.{e.name}"
    if isinstance(e, StaticGet):
        return f"{e.cls}.{e.name}"
    if isinstance(e, Call):
        args = ", ".join(_expr(a, opts) for a in e.args)
        if e.target is None:
            return f"{e.name}({args})"
        return f"{_expr(e.target, opts, _ATOM_PREC)}.{e.name}({args})"
    if isinstance(e, StaticCall):
        args = ", ".join(_expr(a, opts) for a in e.args)
        return f"{e.cls}.{e.name}({args})"
    if isinstance(e, New):
        args = ", ".join(_expr(a, opts) for a in e.args)
        return f"new {e.cls}({args})"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        s = f"{_expr(e.left, opts, p)} {e.op} {_expr(e.right, opts, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, Unary):
        s = f"{e.op}{_expr(e.operand, opts, _UNARY_PREC)}"
        return f"({s})" if _UNARY_PREC < prec else s
    if isinstance(e, Cast):
        s = f"({e.type}) {_expr(e.expr, opts, _UNARY_PREC)}"
        return f"({s})" if _UNARY_PREC < prec else s
    raise ToolFault(f"unknown expression node: {type(e).__name__}")


def _stmt(s: Stmt, opts: PrintOptions, depth: int, out: list[str]) -> None:
    ind = opts.indent * depth
    if isinstance(s, VarDecl):
        if s.init is None:
            out.append(f"{ind}{s.type} {s.name};")
        else:
            out.append(f"{ind}{s.type} {s.name} = {_expr(s.init, opts)};")
    elif isinstance(s, Assign):
        out.append(f"{ind}{_expr(s.target, opts)} = {_expr(s.value, opts)};")
    elif isinstance(s, ExprStmt):
        out.append(f"{ind}{_expr(s.expr, opts)};")
    elif isinstance(s, Print):
        out.append(f"{ind}print({_expr(s.expr, opts)});")
    elif isinstance(s, Block):
        out.append(f"{ind}{{")
        for inner in s.stmts:
            _stmt(inner, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(s, If):
        out.append(f"{ind}if ({_expr(s.cond, opts)}) {{")
        for inner in s.then.stmts:
            _stmt(inner, opts, depth + 1, out)
        if s.orelse is None:
            out.append(f"{ind}}}")
        else:
            out.append(f"{ind}}} else {{")
            for inner in s.orelse.stmts:
                _stmt(inner, opts, depth + 1, out)
            out.append(f"{ind}}}")
    elif isinstance(s, While):
        out.append(f"{ind}while ({_expr(s.cond, opts)}) {{")
        for inner in s.body.stmts:
            _stmt(inner, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(s, TryCatch):
        out.append(f"{ind}try {{")
        for inner in s.body.stmts:
            _stmt(inner, opts, depth + 1, out)
        out.append(f"{ind}}} catch ({s.exc_type} {s.exc_name}) {{")
        for inner in s.handler.stmts:
            _stmt(inner, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(s, Throw):
        out.append(f"{ind}throw {_expr(s.expr, opts)};")
    elif isinstance(s, Return):
        if s.value is None:
            out.append(f"{ind}return;")
        else:
            out.append(f"{ind}return {_expr(s.value, opts)};")
    elif isinstance(s, Break):
        out.append(f"{ind}break;")
    elif isinstance(s, Continue):
        out.append(f"{ind}continue;")
    else:
        raise ToolFault(f"unknown statement node: {type(s).__name__}")


def _mods(*, private: bool = False, static: bool = False, final: bool = False) -> str:
    parts = []
    if private:
        parts.append("private")
    if static:
        parts.append("static")
    if final:
        parts.append("final")
    return " ".join(parts) + (" " if parts else "")


def _member(m: Member, cls_simple: str, opts: PrintOptions, depth: int, out: list[str]) -> None:
    ind = opts.indent * depth
    if isinstance(m, FieldDecl):
        head = f"{ind}{_mods(private=m.private, static=m.static, final=m.final)}{m.type} {m.name}"
        if m.init is not None:
            head += f" = {_expr(m.init, opts)}"
        out.append(head + ";")
    elif isinstance(m, MethodDecl):
        params = ", ".join(f"{p.type} {p.name}" for p in m.params)
        out.append(f"{ind}{_mods(private=m.private, static=m.static)}{m.ret} {m.name}({params}) {{")
        for s in m.body.stmts:
            _stmt(s, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(m, CtorDecl):
        params = ", ".join(f"{p.type} {p.name}" for p in m.params)
        out.append(f"{ind}{_mods(private=m.private)}{cls_simple}({params}) {{")
        for s in m.body.stmts:
            _stmt(s, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(m, StaticBlock):
        out.append(f"{ind}static {{")
        for s in m.body.stmts:
            _stmt(s, opts, depth + 1, out)
        out.append(f"{ind}}}")
    elif isinstance(m, NestedClassDecl):
        out.append(f"{ind}{_mods(private=m.private)}class {m.name} {{")
        for i, inner in enumerate(m.members):
            if i:
                out.append("")
            _member(inner, m.name, opts, depth + 1, out)
        out.append(f"{ind}}}")
    else:
        raise ToolFault(f"unknown member kind: {type(m).__name__}")


def pretty_print(ast: ClassAst, options: PrintOptions | None = None) -> str:
    opts = options or _DEFAULT
    out: list[str] = []
    head = f"class {ast.name}"
    if ast.superclass:
        head += f" extends {ast.superclass}"
    out.append(head + " {")
    for i, m in enumerate(ast.members):
        if i:
            out.append("")
        _member(m, simple_name(ast.name), opts, 1, out)
    out.append("}")
    return "\n".join(out) + "\n"
