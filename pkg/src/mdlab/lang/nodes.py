"""AST node definitions for MiniJ.

MiniJ is a deliberately small class-based language: single inheritance,
static and instance fields, overloaded methods and constructors, one level
of nested classes, if/while/try-catch/throw, and the primitive types
int/bool/str.  Every source file holds exactly one top-level class whose
qualified name mirrors the file path.

Conventions the rest of the toolchain relies on:
  * package segments are lowercase, class simple names are Capitalized,
    member names are lowercase.  This makes dotted references parseable
    without imports or a symbol table.
  * spans are (start, end) byte offsets into the source text and never
    participate in structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

# ====== SPANS AND DIAGNOSTICS ======

Span = tuple[int, int]
NO_SPAN: Span = (-1, -1)


def _span_field() -> Span:
    return field(default=NO_SPAN, compare=False, repr=False, kw_only=True)  # type: ignore[return-value]


@dataclass(frozen=True)
class Diagnostic:
    """A single compiler or parser complaint, anchored to a source span."""

    message: str
    span: Span = NO_SPAN
    severity: str = "error"

    def render(self) -> str:
        a, b = self.span
        where = f"@{a}..{b}" if self.span != NO_SPAN else "@?"
        return f"{self.severity} {where}: {self.message}"


class MiniJError(Exception):
    """Base class for subject-level failures (bad input programs)."""


class ToolFault(Exception):
    """An internal invariant broke.  Distinguished from subject failures:
    callers must never classify a ToolFault as a property of the program
    under study."""


# ====== TYPES ======

# Types are plain strings: "int", "bool", "str", "void", or a qualified
# class name such as "demo.Outer" / "demo.Outer.Inner".
PRIMITIVES = ("int", "bool", "str")


def is_primitive(t: str) -> bool:
    return t in PRIMITIVES


def is_class_type(t: str) -> bool:
    return not is_primitive(t) and t != "void"


def simple_name(qualified: str) -> str:
    return qualified.rsplit(".", 1)[-1]


# ====== EXPRESSIONS ======


@dataclass
class IntLit:
    value: int
    span: Span = _span_field()


@dataclass
class StrLit:
    value: str
    span: Span = _span_field()


@dataclass
class BoolLit:
    value: bool
    span: Span = _span_field()


@dataclass
class NullLit:
    span: Span = _span_field()


@dataclass
class This:
    span: Span = _span_field()


@dataclass
class VarRef:
    """A bare lowercase name: a local, a parameter, or an unqualified
    field of the enclosing class (resolution happens in analysis)."""

    name: str
    span: Span = _span_field()


@dataclass
class FieldGet:
    target: "Expr"
    name: str
    span: Span = _span_field()


@dataclass
class StaticGet:
    cls: str
    name: str
    span: Span = _span_field()


@dataclass
class Call:
    """Instance call.  `target` is None for a bare call on the implicit
    receiver (this.m(...) in an instance context, own static otherwise)."""

    target: Optional["Expr"]
    name: str
    args: list["Expr"]
    span: Span = _span_field()


@dataclass
class StaticCall:
    cls: str
    name: str
    args: list["Expr"]
    span: Span = _span_field()


@dataclass
class New:
    cls: str
    args: list["Expr"]
    span: Span = _span_field()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span_field()


@dataclass
class Unary:
    op: str
    operand: "Expr"
    span: Span = _span_field()


@dataclass
class Cast:
    type: str
    expr: "Expr"
    span: Span = _span_field()


Expr = Union[
    IntLit, StrLit, BoolLit, NullLit, This, VarRef, FieldGet, StaticGet,
    Call, StaticCall, New, Binary, Unary, Cast,
]

# ====== STATEMENTS ======


@dataclass
class VarDecl:
    type: str
    name: str
    init: Optional[Expr]
    span: Span = _span_field()


@dataclass
class Assign:
    target: Union[VarRef, FieldGet, StaticGet]
    value: Expr
    span: Span = _span_field()


@dataclass
class ExprStmt:
    expr: Expr
    span: Span = _span_field()


@dataclass
class Print:
    expr: Expr
    span: Span = _span_field()


@dataclass
class Block:
    stmts: list["Stmt"]
    span: Span = _span_field()


@dataclass
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block]
    span: Span = _span_field()


@dataclass
class While:
    cond: Expr
    body: Block
    span: Span = _span_field()


@dataclass
class TryCatch:
    body: Block
    exc_type: str
    exc_name: str
    handler: Block
    span: Span = _span_field()


@dataclass
class Throw:
    expr: Expr
    span: Span = _span_field()


@dataclass
class Return:
    value: Optional[Expr]
    span: Span = _span_field()


@dataclass
class Break:
    span: Span = _span_field()


@dataclass
class Continue:
    span: Span = _span_field()


Stmt = Union[
    VarDecl, Assign, ExprStmt, Print, Block, If, While, TryCatch, Throw,
    Return, Break, Continue,
]

# ====== MEMBERS ======


@dataclass
class Param:
    type: str
    name: str
    span: Span = _span_field()


@dataclass
class FieldDecl:
    name: str
    type: str
    static: bool = False
    final: bool = False
    private: bool = False
    init: Optional[Expr] = None
    errored: bool = field(default=False, compare=False)
    span: Span = _span_field()


@dataclass
class MethodDecl:
    name: str
    ret: str
    params: list[Param]
    body: Block
    static: bool = False
    private: bool = False
    errored: bool = field(default=False, compare=False)
    span: Span = _span_field()


@dataclass
class CtorDecl:
    params: list[Param]
    body: Block
    private: bool = False
    errored: bool = field(default=False, compare=False)
    span: Span = _span_field()


@dataclass
class StaticBlock:
    body: Block
    errored: bool = field(default=False, compare=False)
    span: Span = _span_field()


@dataclass
class NestedClassDecl:
    name: str  # simple name
    members: list["Member"]
    private: bool = False
    errored: bool = field(default=False, compare=False)
    span: Span = _span_field()


Member = Union[FieldDecl, MethodDecl, CtorDecl, StaticBlock, NestedClassDecl]


@dataclass
class ClassAst:
    """One source file: a single top-level class."""

    name: str  # fully qualified, e.g. "demo.Foo"
    superclass: Optional[str]
    members: list[Member]
    class_level_error: bool = field(default=False, compare=False)
    span: Span = _span_field()

    @property
    def simple(self) -> str:
        return simple_name(self.name)


# ====== MEMBER SIGNATURES ======


def member_signature(cls_name: str, member: Member, clinit_index: int = 0) -> str:
    """Render the canonical signature string for a member of `cls_name`.

    Fields:        demo.Foo#COUNT
    Constructors:  demo.Foo(int,str)
    Methods:       demo.Foo.run(int)
    Static blocks: demo.Foo.<clinit#k>   (k = position among static blocks)
    Nested class:  demo.Foo.Inner
    """
    if isinstance(member, FieldDecl):
        return f"{cls_name}#{member.name}"
    if isinstance(member, CtorDecl):
        return f"{cls_name}({','.join(p.type for p in member.params)})"
    if isinstance(member, MethodDecl):
        return f"{cls_name}.{member.name}({','.join(p.type for p in member.params)})"
    if isinstance(member, StaticBlock):
        return f"{cls_name}.<clinit#{clinit_index}>"
    if isinstance(member, NestedClassDecl):
        return f"{cls_name}.{member.name}"
    raise ToolFault(f"unknown member kind: {type(member).__name__}")


def member_signatures(ast: ClassAst) -> list[tuple[str, Member]]:
    """Signatures of all top-level members, in declaration order.
    Signatures are unique within a well-formed class."""
    out: list[tuple[str, Member]] = []
    clinit = 0
    for m in ast.members:
        if isinstance(m, StaticBlock):
            out.append((member_signature(ast.name, m, clinit), m))
            clinit += 1
        else:
            out.append((member_signature(ast.name, m), m))
    return out


def spans_intersect(a: Span, b: Span) -> bool:
    if a == NO_SPAN or b == NO_SPAN:
        return False
    return a[0] < b[1] and b[0] < a[1]


def annotate_errors(ast: ClassAst, diagnostics: list[Diagnostic]) -> ClassAst:
    """Flag every member whose span intersects an error diagnostic.

    A diagnostic that intersects no member span (or has no span) counts as
    class-level and sets `class_level_error`.  A diagnostic that straddles
    several members flags each of them.  The input AST is mutated in place
    and returned for convenience.
    """
    ast.class_level_error = False
    for m in ast.members:
        m.errored = False
    for d in diagnostics:
        if d.severity != "error":
            continue
        hit = False
        for m in ast.members:
            if spans_intersect(d.span, m.span):
                m.errored = True
                hit = True
        if not hit:
            ast.class_level_error = True
    return ast
