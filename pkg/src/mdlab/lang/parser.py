"""Recursive-descent parser for MiniJ.

Produces a ClassAst with byte-offset spans on every node.  Most syntax
errors abort the parse (the result carries diagnostics and no AST); the
unterminated-string case recovers so that the rest of the file can still
be analyzed, mirroring how real front ends keep going after a lexical
error inside one member.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from .lexer import Token, tokenize
from .nodes import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Diagnostic, Expr, ExprStmt, FieldDecl, FieldGet, If, IntLit,
    Member, MethodDecl, NestedClassDecl, New, NullLit, Param, Print, Return,
    Span, StaticBlock, StaticCall, StaticGet, Stmt, StrLit, This, Throw,
    TryCatch, Unary, VarDecl, VarRef, While,
)


@dataclass
class ParseResult:
    ast: Optional[ClassAst]
    diagnostics: list[Diagnostic] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.ast is not None


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _is_classname(name: str) -> bool:
    """Class simple names are CamelCase: Capitalized with at least one
    lowercase letter.  ALL_CAPS identifiers are constant fields, not
    classes, so `demo.Cfg.LIMIT` parses as a static member access."""
    return bool(name) and name[0].isupper() and any(c.islower() for c in name)


def _is_lower(name: str) -> bool:
    return bool(name) and not name[0].isupper()


def _is_member_name(name: str) -> bool:
    return bool(name) and not _is_classname(name)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks, self.diags = tokenize(text)
        self.pos = 0

    # ---- token plumbing ----

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    def accept(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, value):
            return self.next()
        return None

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        if self.at(kind, value):
            return self.next()
        t = self.peek()
        want = value if value is not None else kind
        raise _Fail(Diagnostic(f"expected {want!r}, found {t.value or t.kind!r}", t.span))

    # ---- names and types ----

    def _dotted(self) -> list[Token]:
        """Greedily consume IDENT ("." IDENT)* and return the segments."""
        segs = [self.expect("ident")]
        while self.at("punct", ".") and self.peek(1).kind == "ident":
            self.next()
            segs.append(self.next())
        return segs

    def _split_class_path(self, segs: list[Token]) -> Optional[int]:
        """Index one past the class-name portion of a dotted chain, or None
        if the chain holds no Capitalized segment.  A class path is
        pkg+ Class [Nested] per the case conventions."""
        for i, s in enumerate(segs):
            if _is_classname(s.value):
                end = i + 1
                if end < len(segs) and _is_classname(segs[end].value):
                    end += 1
                if end < len(segs) and _is_classname(segs[end].value):
                    raise _Fail(
                        Diagnostic("nested classes are limited to one level", segs[end].span)
                    )
                if i == 0:
                    raise _Fail(
                        Diagnostic(
                            f"class reference {segs[0].value!r} must be package-qualified",
                            segs[0].span,
                        )
                    )
                return end
        return None

    def class_path(self) -> tuple[str, Span]:
        segs = self._dotted()
        end = self._split_class_path(segs)
        if end is None:
            raise _Fail(Diagnostic("expected a class name (Capitalized segment)", segs[0].span))
        if end != len(segs):
            raise _Fail(Diagnostic("unexpected trailing segment after class name", segs[end].span))
        name = ".".join(s.value for s in segs)
        return name, (segs[0].span[0], segs[-1].span[1])

    def type_name(self) -> tuple[str, Span]:
        t = self.peek()
        if t.kind == "kw" and t.value in ("int", "bool", "str"):
            self.next()
            return t.value, t.span
        return self.class_path()

    def _looks_like_type(self) -> bool:
        """Lookahead: does a type name start here?  Used to split local
        declarations from expression statements."""
        t = self.peek()
        if t.kind == "kw" and t.value in ("int", "bool", "str"):
            return True
        if t.kind != "ident":
            return False
        save = self.pos
        try:
            segs = self._dotted()
            end = self._split_class_path(segs)
            return end == len(segs) and self.peek().kind == "ident"
        except _Fail:
            return False
        finally:
            self.pos = save

    # ---- top level ----

    def parse_class(self) -> ClassAst:
        kw = self.expect("kw", "class")
        segs = self._dotted()
        end = self._split_class_path(segs)
        if end is None or end != len(segs):
            raise _Fail(Diagnostic("class declarations need a qualified name", segs[0].span))
        name = ".".join(s.value for s in segs)
        superclass = None
        if self.accept("kw", "extends"):
            superclass, _ = self.class_path()
        self.expect("punct", "{")
        members = self.parse_members(simple=segs[-1].value, nested=False)
        close = self.expect("punct", "}")
        self.expect("eof")
        return ClassAst(name, superclass, members, span=(kw.span[0], close.span[1]))

    def parse_members(self, simple: str, nested: bool) -> list[Member]:
        members: list[Member] = []
        while not self.at("punct", "}"):
            members.append(self.parse_member(simple, nested))
        return members

    def parse_member(self, simple: str, nested: bool) -> Member:
        start = self.peek().span[0]
        private = static = final = False
        while True:
            if self.accept("kw", "private"):
                private = True
            elif self.at("kw", "static") and not (
                self.peek(1).kind == "punct" and self.peek(1).value == "{"
            ):
                self.next()
                static = True
            elif self.accept("kw", "final"):
                final = True
            else:
                break

        if self.at("kw", "static") and self.peek(1).value == "{":
            # static initializer block
            self.next()
            body = self.parse_block()
            return StaticBlock(body, span=(start, body.span[1]))

        if self.at("kw", "class"):
            if nested:
                raise _Fail(Diagnostic("nested classes are limited to one level", self.peek().span))
            self.next()
            name_tok = self.expect("ident")
            if not _is_classname(name_tok.value):
                raise _Fail(
                    Diagnostic("class names must be CamelCase (Capitalized with a lowercase letter)", name_tok.span)
                )
            self.expect("punct", "{")
            inner = self.parse_members(simple=name_tok.value, nested=True)
            close = self.expect("punct", "}")
            return NestedClassDecl(
                name_tok.value, inner, private=private, span=(start, close.span[1])
            )

        # constructor: SimpleName '('
        if (
            self.at("ident", simple)
            and self.peek(1).kind == "punct"
            and self.peek(1).value == "("
        ):
            self.next()
            params = self.parse_params()
            body = self.parse_block()
            if static or final:
                raise _Fail(Diagnostic("constructors cannot be static or final", (start, body.span[1])))
            return CtorDecl(params, body, private=private, span=(start, body.span[1]))

        if self.at("kw", "void"):
            ret_tok = self.next()
            ret = "void"
        else:
            ret, _ = self.type_name()
            ret_tok = None
        name_tok = self.expect("ident")
        if not _is_member_name(name_tok.value):
            raise _Fail(Diagnostic(f"invalid member name {name_tok.value!r}", name_tok.span))
        if self.at("punct", "("):
            if not _is_lower(name_tok.value):
                raise _Fail(Diagnostic("method names must start lowercase", name_tok.span))
            params = self.parse_params()
            body = self.parse_block()
            return MethodDecl(
                name_tok.value, ret, params, body,
                static=static, private=private, span=(start, body.span[1]),
            )
        if ret == "void":
            raise _Fail(Diagnostic("fields cannot have type void", ret_tok.span if ret_tok else name_tok.span))
        init = None
        if self.accept("punct", "="):
            init = self.parse_expr()
        semi = self.expect("punct", ";")
        return FieldDecl(
            name_tok.value, ret, static=static, final=final, private=private,
            init=init, span=(start, semi.span[1]),
        )

    def parse_params(self) -> list[Param]:
        self.expect("punct", "(")
        params: list[Param] = []
        if not self.at("punct", ")"):
            while True:
                t, tspan = self.type_name()
                n = self.expect("ident")
                params.append(Param(t, n.value, span=(tspan[0], n.span[1])))
                if not self.accept("punct", ","):
                    break
        self.expect("punct", ")")
        return params

    # ---- statements ----

    def parse_block(self) -> Block:
        open_ = self.expect("punct", "{")
        stmts: list[Stmt] = []
        while not self.at("punct", "}"):
            stmts.append(self.parse_stmt())
        close = self.expect("punct", "}")
        return Block(stmts, span=(open_.span[0], close.span[1]))

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        start = t.span[0]
        if t.kind == "punct" and t.value == "{":
            return self.parse_block()
        if t.kind == "kw":
            if t.value == "if":
                self.next()
                self.expect("punct", "(")
                cond = self.parse_expr()
                self.expect("punct", ")")
                then = self.parse_block()
                orelse = None
                if self.accept("kw", "else"):
                    orelse = self.parse_block()
                end = orelse.span[1] if orelse else then.span[1]
                return If(cond, then, orelse, span=(start, end))
            if t.value == "while":
                self.next()
                self.expect("punct", "(")
                cond = self.parse_expr()
                self.expect("punct", ")")
                body = self.parse_block()
                return While(cond, body, span=(start, body.span[1]))
            if t.value == "try":
                self.next()
                body = self.parse_block()
                self.expect("kw", "catch")
                self.expect("punct", "(")
                exc_type, _ = self.class_path()
                exc_name = self.expect("ident").value
                self.expect("punct", ")")
                handler = self.parse_block()
                return TryCatch(body, exc_type, exc_name, handler, span=(start, handler.span[1]))
            if t.value == "throw":
                self.next()
                e = self.parse_expr()
                semi = self.expect("punct", ";")
                return Throw(e, span=(start, semi.span[1]))
            if t.value == "return":
                self.next()
                value = None
                if not self.at("punct", ";"):
                    value = self.parse_expr()
                semi = self.expect("punct", ";")
                return Return(value, span=(start, semi.span[1]))
            if t.value == "break":
                self.next()
                semi = self.expect("punct", ";")
                return Break(span=(start, semi.span[1]))
            if t.value == "continue":
                self.next()
                semi = self.expect("punct", ";")
                return Continue(span=(start, semi.span[1]))
            if t.value == "print":
                self.next()
                self.expect("punct", "(")
                e = self.parse_expr()
                self.expect("punct", ")")
                semi = self.expect("punct", ";")
                return Print(e, span=(start, semi.span[1]))
        if self._looks_like_type():
            ty, _ = self.type_name()
            name = self.expect("ident")
            init = None
            if self.accept("punct", "="):
                init = self.parse_expr()
            semi = self.expect("punct", ";")
            return VarDecl(ty, name.value, init, span=(start, semi.span[1]))
        expr = self.parse_expr()
        if self.accept("punct", "="):
            if not isinstance(expr, (VarRef, FieldGet, StaticGet)):
                raise _Fail(Diagnostic("invalid assignment target", expr.span))
            value = self.parse_expr()
            semi = self.expect("punct", ";")
            return Assign(expr, value, span=(start, semi.span[1]))
        semi = self.expect("punct", ";")
        return ExprStmt(expr, span=(start, semi.span[1]))

    # ---- expressions ----

    _CMP = ("==", "!=", "<", "<=", ">", ">=")

    def parse_expr(self) -> Expr:
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        while self.peek().kind == "punct" and self.peek().value in self._CMP:
            op = self.next().value
            right = self.parse_add()
            left = Binary(op, left, right, span=(left.span[0], right.span[1]))
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.peek().kind == "punct" and self.peek().value in ("+", "-"):
            op = self.next().value
            right = self.parse_mul()
            left = Binary(op, left, right, span=(left.span[0], right.span[1]))
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "punct" and self.peek().value in ("*", "/", "%"):
            op = self.next().value
            right = self.parse_unary()
            left = Binary(op, left, right, span=(left.span[0], right.span[1]))
        return left

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.value in ("-", "!"):
            self.next()
            operand = self.parse_unary()
            return Unary(t.value, operand, span=(t.span[0], operand.span[1]))
        cast = self._try_cast()
        if cast is not None:
            return cast
        return self.parse_postfix()

    def _try_cast(self) -> Optional[Expr]:
        """A cast is '(' class-path ')' followed by an expression start."""
        if not self.at("punct", "("):
            return None
        save = self.pos
        open_ = self.next()
        try:
            if self.peek().kind != "ident":
                raise _Fail(Diagnostic("", (0, 0)))
            ty, _ = self.class_path()
            self.expect("punct", ")")
        except _Fail:
            self.pos = save
            return None
        nxt = self.peek()
        starts_expr = (
            nxt.kind in ("ident", "int", "string")
            or (nxt.kind == "kw" and nxt.value in ("new", "this", "null", "true", "false"))
            or (nxt.kind == "punct" and nxt.value == "(")
        )
        if not starts_expr:
            self.pos = save
            return None
        e = self.parse_unary()
        return Cast(ty, e, span=(open_.span[0], e.span[1]))

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        return self._member_chain(e)

    def _member_chain(self, e: Expr) -> Expr:
        # `str` lexes as a type keyword but is also the builder's terminal
        # method, so it stays valid as a member name after a dot
        while self.at("punct", ".") and (
            self.peek(1).kind == "ident"
            or (self.peek(1).kind == "kw" and self.peek(1).value == "str")
        ):
            self.next()
            name = self.next()
            if not _is_member_name(name.value):
                raise _Fail(Diagnostic(f"invalid member name {name.value!r}", name.span))
            if self.at("punct", "("):
                args = self.parse_args()
                e = Call(e, name.value, args, span=(e.span[0], self._last_end))
            else:
                e = FieldGet(e, name.value, span=(e.span[0], name.span[1]))
        return e

    def parse_args(self) -> list[Expr]:
        self.expect("punct", "(")
        args: list[Expr] = []
        if not self.at("punct", ")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept("punct", ","):
                    break
        close = self.expect("punct", ")")
        self._last_end = close.span[1]
        return args

    _last_end = 0

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.value), span=t.span)
        if t.kind == "string":
            self.next()
            return StrLit(t.value, span=t.span)
        if t.kind == "kw":
            if t.value == "true":
                self.next()
                return BoolLit(True, span=t.span)
            if t.value == "false":
                self.next()
                return BoolLit(False, span=t.span)
            if t.value == "null":
                self.next()
                return NullLit(span=t.span)
            if t.value == "this":
                self.next()
                return This(span=t.span)
            if t.value == "new":
                self.next()
                cls, _ = self.class_path()
                args = self.parse_args()
                return New(cls, args, span=(t.span[0], self._last_end))
        if t.kind == "punct" and t.value == "(":
            self.next()
            e = self.parse_expr()
            self.expect("punct", ")")
            return e
        if t.kind == "ident":
            return self._dotted_atom()
        raise _Fail(Diagnostic(f"expected an expression, found {t.value or t.kind!r}", t.span))

    def _dotted_atom(self) -> Expr:
        """An identifier chain: either a variable (plus field/call chain) or
        a static member reference rooted at a qualified class name."""
        segs = self._dotted()
        end = self._split_class_path(segs)
        if end is None:
            if len(segs) == 1 and self.at("punct", "("):
                args = self.parse_args()
                return self._member_chain(
                    Call(None, segs[0].value, args, span=(segs[0].span[0], self._last_end))
                )
            e: Expr = VarRef(segs[0].value, span=segs[0].span)
            for s in segs[1:]:
                if s is segs[-1] and self.at("punct", "("):
                    args = self.parse_args()
                    e = Call(e, s.value, args, span=(e.span[0], self._last_end))
                else:
                    e = FieldGet(e, s.value, span=(e.span[0], s.span[1]))
            return self._member_chain(e)
        cls = ".".join(s.value for s in segs[:end])
        rest = segs[end:]
        if not rest:
            raise _Fail(
                Diagnostic("a class name is not a value; expected a member access", segs[end - 1].span)
            )
        first = rest[0]
        if not _is_member_name(first.value):
            raise _Fail(Diagnostic(f"invalid member name {first.value!r}", first.span))
        start = segs[0].span[0]
        if len(rest) == 1 and self.at("punct", "("):
            args = self.parse_args()
            e = StaticCall(cls, first.value, args, span=(start, self._last_end))
        else:
            e = StaticGet(cls, first.value, span=(start, first.span[1]))
            for s in rest[1:]:
                if s is rest[-1] and self.at("punct", "("):
                    args = self.parse_args()
                    e = Call(e, s.value, args, span=(start, self._last_end))
                else:
                    e = FieldGet(e, s.value, span=(start, s.span[1]))
        return self._member_chain(e)


def parse(text: str) -> ParseResult:
    """Parse one MiniJ source file.

    Returns the AST plus recovered diagnostics, or no AST plus the fatal
    diagnostic when the text is not parseable.
    """
    p = _Parser(text)
    try:
        ast = p.parse_class()
    except _Fail as f:
        return ParseResult(None, p.diags + [f.diag])
    return ParseResult(ast, p.diags)
