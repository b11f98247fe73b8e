"""MiniJ front end: AST, parser, printer, signatures, error annotation."""

from .lexer import escape_string, tokenize
from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Diagnostic, Expr, ExprStmt, FieldDecl, FieldGet, If, IntLit,
    Member, MethodDecl, MiniJError, NestedClassDecl, New, NullLit, NO_SPAN,
    Param, Print, Return, Span, StaticBlock, StaticCall, StaticGet, Stmt,
    StrLit, This, Throw, ToolFault, TryCatch, Unary, VarDecl, VarRef, While,
    annotate_errors, is_class_type, is_primitive, member_signature,
    member_signatures, simple_name, spans_intersect,
)
from .parser import ParseResult, parse
from .printer import PrintOptions, pretty_print

__all__ = [
    "Assign", "Binary", "Block", "BoolLit", "Break", "Call", "Cast",
    "ClassAst", "Continue", "CtorDecl", "Diagnostic", "Expr", "ExprStmt",
    "FieldDecl", "FieldGet", "If", "IntLit", "Member", "MethodDecl",
    "MiniJError", "NestedClassDecl", "New", "NullLit", "NO_SPAN", "Param",
    "ParseResult", "Print", "PrintOptions", "Return", "Span", "StaticBlock",
    "StaticCall", "StaticGet", "Stmt", "StrLit", "This", "Throw",
    "ToolFault", "TryCatch", "Unary", "VarDecl", "VarRef", "While",
    "annotate_errors", "escape_string", "is_class_type", "is_primitive",
    "member_signature", "member_signatures", "parse", "pretty_print",
    "simple_name", "spans_intersect", "tokenize",
]
