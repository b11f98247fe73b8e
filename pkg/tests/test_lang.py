"""Front-end tests: parser, printer, signatures, error annotation."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlab.lang import (
    Assign, Binary, Block, BoolLit, Break, Call, Cast, ClassAst, Continue,
    CtorDecl, Diagnostic, ExprStmt, FieldDecl, FieldGet, If, IntLit,
    MethodDecl, NestedClassDecl, New, NullLit, Param, Print, PrintOptions,
    Return, StaticBlock, StaticCall, StaticGet, StrLit, This, Throw,
    TryCatch, Unary, VarDecl, VarRef, While,
    annotate_errors, member_signature, member_signatures, parse, pretty_print,
)

# ====== BASICS ======


def must_parse(src: str) -> ClassAst:
    r = parse(src)
    assert r.ok, r.diagnostics
    return r.ast


def test_empty_class_prints_canonically():
    ast = ClassAst("a.Box", None, [])
    assert pretty_print(ast) == "class a.Box {\n}\n"


def test_round_trip_on_representative_source():
    src = """class demo.Foo extends demo.Base {
  static final int RADIX = 16;
  private static str greeting = "hi" + "you";
  int v;

  static int foo(int i, int j) {
    while (true) {
      try {
        while (i < j) {
          i = j / i;
          j = j + 1;
        }
      } catch (minij.DivByZero e) {
        i = 10;
        continue;
      }
      break;
    }
    return j;
  }

  Foo(int x) {
    this.v = x;
  }

  class Inner {
    int k;

    private Inner(int k) {
      this.k = k;
    }
  }

  static {
    print(demo.Foo.greeting);
  }
}
"""
    ast = must_parse(src)
    text = pretty_print(ast)
    again = must_parse(text)
    assert again == ast
    assert pretty_print(again) == text


def test_https_like_dotted_resolution():
    ast = must_parse(
        "class a.Box {\n"
        "  int go(a.Box other) {\n"
        "    int n = a.util.Cfg.LIMIT;\n"
        "    n = other.peer.count;\n"
        "    return a.util.Cfg.make(n).count;\n"
        "  }\n"
        "  a.Box peer;\n"
        "  int count;\n"
        "}\n"
    )
    body = ast.members[0].body.stmts
    assert isinstance(body[0].init, StaticGet) and body[0].init.cls == "a.util.Cfg"
    assert isinstance(body[1].value, FieldGet)
    ret = body[2].value
    assert isinstance(ret, FieldGet) and isinstance(ret.target, StaticCall)


def test_cast_versus_parenthesized_expression():
    ast = must_parse(
        "class a.Box {\n"
        "  int f(a.Base b, int x) {\n"
        "    a.Base c = (a.Base) b;\n"
        "    return (x) + 1;\n"
        "  }\n"
        "}\n"
    )
    stmts = ast.members[0].body.stmts
    assert isinstance(stmts[0].init, Cast)
    assert isinstance(stmts[1].value, Binary) and isinstance(stmts[1].value.left, VarRef)


def test_parse_failures_yield_diagnostics_and_no_ast():
    for bad in (
        "class a.Box {",                     # missing brace
        "class B { }",                       # unqualified class name
        "class a.Box { int Foo() { } }",     # method named like a class
        "class a.Box { class Cx { class Dx { } } }",  # nesting too deep
        "class a.Box { int f(int) { } }",    # parameter without a name
    ):
        r = parse(bad)
        assert not r.ok and r.diagnostics, bad


def test_unescaped_line_break_recovers_with_member_local_error():
    src = 'class a.Box {\n  static str NOTE = "first\nline";\n  int n;\n}\n'
    r = parse(src)
    assert r.ok
    assert any("line break" in d.message for d in r.diagnostics)
    assert r.ast.members[0].init.value == "first\nline"
    annotate_errors(r.ast, r.diagnostics)
    assert r.ast.members[0].errored
    assert not r.ast.members[1].errored
    assert not r.ast.class_level_error


def test_printer_newline_defect_round_trips_value():
    src = 'class a.Box {\n  static str NOTE = "one\\ntwo";\n}\n'
    ast = must_parse(src)
    buggy = pretty_print(ast, PrintOptions(escape_newlines=False))
    assert '"one\ntwo"' in buggy
    r = parse(buggy)
    assert r.ok and r.diagnostics
    assert r.ast.members[0].init.value == "one\ntwo"


# ====== SIGNATURES ======


def test_field_signature_scheme():
    f = FieldDecl("BLANK_CONFIG", "str", static=True, final=True)
    assert member_signature("a.b.Yaml", f) == "a.b.Yaml#BLANK_CONFIG"


def test_ctor_signature_scheme():
    assert member_signature("a.b.Yaml", CtorDecl([], Block([]))) == "a.b.Yaml()"
    two = CtorDecl([Param("int", "x"), Param("a.b.Yaml", "y")], Block([]))
    assert member_signature("a.b.Yaml", two) == "a.b.Yaml(int,a.b.Yaml)"


def test_method_and_static_block_and_nested_signatures():
    m = MethodDecl("run", "void", [Param("str", "s")], Block([]), static=True)
    assert member_signature("a.Bx", m) == "a.Bx.run(str)"
    src = "class a.Bx {\n  static { print(1); }\n  static { print(2); }\n  class Nest { }\n}\n"
    sigs = [s for s, _ in member_signatures(must_parse(src))]
    assert sigs == ["a.Bx.<clinit#0>", "a.Bx.<clinit#1>", "a.Bx.Nest"]


def test_signatures_unique_across_overloads():
    src = (
        "class a.Bx {\n"
        "  int f(int x) { return x; }\n"
        "  int f(str s) { return 0; }\n"
        "  int f(int x, int y) { return x; }\n"
        "}\n"
    )
    sigs = [s for s, _ in member_signatures(must_parse(src))]
    assert len(set(sigs)) == 3


# ====== ERROR ANNOTATION ======


def test_annotate_errors_span_rules():
    src = (
        "class a.Bx {\n"
        "  int f;\n"
        "  int g;\n"
        "  int h;\n"
        "}\n"
    )
    ast = must_parse(src)
    f_span = ast.members[0].span
    g_span = ast.members[1].span

    annotate_errors(ast, [Diagnostic("inside f", (f_span[0] + 1, f_span[0] + 2))])
    assert [m.errored for m in ast.members] == [True, False, False]
    assert not ast.class_level_error

    # one diagnostic straddling two members flags both
    annotate_errors(ast, [Diagnostic("straddle", (f_span[0] + 1, g_span[0] + 2))])
    assert [m.errored for m in ast.members] == [True, True, False]

    # header-level diagnostic is class level
    annotate_errors(ast, [Diagnostic("bad superclass", (0, 7))])
    assert [m.errored for m in ast.members] == [False, False, False]
    assert ast.class_level_error

    # warnings never flag anything
    annotate_errors(ast, [Diagnostic("note", f_span, severity="warning")])
    assert not ast.members[0].errored and not ast.class_level_error


# ====== ROUND-TRIP PROPERTY ======

_PKGS = ("a", "demo", "util.x")
_CLASSES = ("Box", "Foo", "Cfg")
_VARS = ("x", "y", "tmp", "n")
_FIELDS = ("f", "count", "LIMIT")
_METHODS = ("run", "calc", "get")


def _qname() -> st.SearchStrategy[str]:
    return st.builds(lambda p, c: f"{p}.{c}", st.sampled_from(_PKGS), st.sampled_from(_CLASSES))


def _texts() -> st.SearchStrategy[str]:
    return st.text(alphabet='ab \n\t"\\z0', max_size=6)


def _exprs(depth: int) -> st.SearchStrategy:
    leaf = st.one_of(
        st.builds(IntLit, st.integers(min_value=0, max_value=999)),
        st.builds(StrLit, _texts()),
        st.builds(BoolLit, st.booleans()),
        st.builds(NullLit),
        st.builds(This),
        st.builds(VarRef, st.sampled_from(_VARS)),
        st.builds(StaticGet, _qname(), st.sampled_from(_FIELDS)),
    )
    if depth <= 0:
        return leaf
    sub = _exprs(depth - 1)
    args = st.lists(sub, max_size=2)
    return st.one_of(
        leaf,
        st.builds(Binary, st.sampled_from(("+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=")), sub, sub),
        st.builds(Unary, st.sampled_from(("-", "!")), sub),
        st.builds(FieldGet, sub, st.sampled_from(_FIELDS)),
        st.builds(Call, st.one_of(st.none(), sub), st.sampled_from(_METHODS), args),
        st.builds(StaticCall, _qname(), st.sampled_from(_METHODS), args),
        st.builds(New, _qname(), args),
        st.builds(Cast, _qname(), sub),
    )


def _stmts(depth: int) -> st.SearchStrategy:
    e = _exprs(1)
    target = st.one_of(
        st.builds(VarRef, st.sampled_from(_VARS)),
        st.builds(FieldGet, st.builds(This), st.sampled_from(_FIELDS)),
        st.builds(StaticGet, _qname(), st.sampled_from(_FIELDS)),
    )
    leaf = st.one_of(
        st.builds(VarDecl, st.sampled_from(("int", "bool", "str", "a.Box")),
                  st.sampled_from(_VARS), st.one_of(st.none(), e)),
        st.builds(Assign, target, e),
        st.builds(ExprStmt, e),
        st.builds(Print, e),
        st.builds(Throw, e),
        st.builds(Return, st.one_of(st.none(), e)),
        st.builds(Break),
        st.builds(Continue),
    )
    if depth <= 0:
        return leaf
    sub = st.lists(_stmts(depth - 1), max_size=3).map(Block)
    return st.one_of(
        leaf,
        st.builds(If, e, sub, st.one_of(st.none(), sub)),
        st.builds(While, e, sub),
        st.builds(TryCatch, sub, _qname(), st.sampled_from(_VARS), sub),
    )


def _members() -> st.SearchStrategy:
    body = st.lists(_stmts(1), max_size=3).map(Block)
    params = st.lists(
        st.builds(Param, st.sampled_from(("int", "str", "a.Box")), st.sampled_from(_VARS)),
        max_size=2,
        unique_by=lambda p: p.name,
    )
    field_ = st.builds(
        FieldDecl, st.sampled_from(_FIELDS), st.sampled_from(("int", "bool", "str", "a.Box")),
        static=st.booleans(), final=st.booleans(), private=st.booleans(),
        init=st.one_of(st.none(), _exprs(1)),
    )
    method = st.builds(
        MethodDecl, st.sampled_from(_METHODS), st.sampled_from(("void", "int", "str")),
        params, body, static=st.booleans(), private=st.booleans(),
    )
    ctor = st.builds(CtorDecl, params, body, private=st.booleans())
    sblock = st.builds(StaticBlock, body)
    nested = st.builds(
        NestedClassDecl, st.just("Nest"),
        st.lists(st.one_of(field_, ctor), max_size=2), private=st.booleans(),
    )
    return st.one_of(field_, method, ctor, sblock, nested)


@settings(max_examples=80, deadline=None, derandomize=True)
@given(
    name=_qname(),
    superclass=st.one_of(st.none(), _qname()),
    members=st.lists(_members(), max_size=4),
)
def test_print_parse_round_trip_property(name, superclass, members):
    if superclass == name:
        superclass = None
    ast = ClassAst(name, superclass, members)
    text = pretty_print(ast)
    r = parse(text)
    assert r.ok, (text, r.diagnostics)
    assert r.ast == ast, text
    assert pretty_print(r.ast) == text
