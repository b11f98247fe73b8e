"""Ordered labeled trees over class ASTs.

Every AST node maps to exactly one tree node.  Structural fields become
children in source order; scalar fields (names, types, operators,
literal values) fold into the label string.  Distance and edit scripts
are computed on these trees, so whatever the label encodes is what the
metric can see.
"""

from __future__ import annotations

import numpy as np

from ..lang import nodes as N


class Tree:
    """A mutable ordered tree node: a label plus a child list."""

    def __init__(self, label: str, children: list["Tree"] | None = None):
        self.label = label
        self.children: list[Tree] = children if children is not None else []

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if not self.children:
            return f"Tree({self.label!r})"
        return f"Tree({self.label!r}, {self.children!r})"


def size(t: Tree) -> int:
    n = 1
    for c in t.children:
        n += size(c)
    return n


def canon(t: Tree) -> tuple:
    """Hashable canonical form; two trees are equal iff canons are."""
    return (t.label, tuple(canon(c) for c in t.children))


def copy_tree(t: Tree) -> Tree:
    return Tree(t.label, [copy_tree(c) for c in t.children])


def from_canon(c: tuple) -> Tree:
    return Tree(c[0], [from_canon(k) for k in c[1]])


# ====== AST CONVERSION ======


def ast_to_tree(cls: N.ClassAst) -> Tree:
    head = f"class {cls.name}"
    if cls.superclass:
        head += f" extends {cls.superclass}"
    return Tree(head, [_member(m) for m in cls.members])


def _flags(*pairs: tuple[bool, str]) -> str:
    out = ""
    for on, word in pairs:
        if on:
            out += " " + word
    return out


def _member(m: N.Member) -> Tree:
    if isinstance(m, N.FieldDecl):
        head = "field" + _flags(
            (m.static, "static"), (m.final, "final"), (m.private, "private")
        )
        kids = [] if m.init is None else [_expr(m.init)]
        return Tree(f"{head} {m.type} {m.name}", kids)
    if isinstance(m, N.MethodDecl):
        head = "method" + _flags((m.static, "static"), (m.private, "private"))
        kids = [Tree(f"param {p.type} {p.name}") for p in m.params]
        kids.append(_block(m.body))
        return Tree(f"{head} {m.ret} {m.name}", kids)
    if isinstance(m, N.CtorDecl):
        head = "ctor" + _flags((m.private, "private"))
        kids = [Tree(f"param {p.type} {p.name}") for p in m.params]
        kids.append(_block(m.body))
        return Tree(head, kids)
    if isinstance(m, N.StaticBlock):
        return Tree("static-block", [_block(m.body)])
    if isinstance(m, N.NestedClassDecl):
        head = "nested" + _flags((m.private, "private"))
        return Tree(f"{head} {m.name}", [_member(k) for k in m.members])
    raise TypeError(f"unknown member {type(m).__name__}")


def _block(b: N.Block) -> Tree:
    return Tree("block", [_stmt(s) for s in b.stmts])


def _stmt(s: N.Stmt) -> Tree:
    if isinstance(s, N.VarDecl):
        kids = [] if s.init is None else [_expr(s.init)]
        return Tree(f"vardecl {s.type} {s.name}", kids)
    if isinstance(s, N.Assign):
        return Tree("assign", [_expr(s.target), _expr(s.value)])
    if isinstance(s, N.ExprStmt):
        return Tree("exprstmt", [_expr(s.expr)])
    if isinstance(s, N.Print):
        return Tree("print", [_expr(s.expr)])
    if isinstance(s, N.Block):
        return _block(s)
    if isinstance(s, N.If):
        kids = [_expr(s.cond), _block(s.then)]
        if s.orelse is not None:
            kids.append(_block(s.orelse))
        return Tree("if", kids)
    if isinstance(s, N.While):
        return Tree("while", [_expr(s.cond), _block(s.body)])
    if isinstance(s, N.TryCatch):
        return Tree(
            f"try {s.exc_type} {s.exc_name}", [_block(s.body), _block(s.handler)]
        )
    if isinstance(s, N.Throw):
        return Tree("throw", [_expr(s.expr)])
    if isinstance(s, N.Return):
        kids = [] if s.value is None else [_expr(s.value)]
        return Tree("return", kids)
    if isinstance(s, N.Break):
        return Tree("break")
    if isinstance(s, N.Continue):
        return Tree("continue")
    raise TypeError(f"unknown statement {type(s).__name__}")


def _expr(e: N.Expr) -> Tree:
    if isinstance(e, N.IntLit):
        return Tree(f"int {e.value}")
    if isinstance(e, N.StrLit):
        return Tree(f"str {e.value!r}")
    if isinstance(e, N.BoolLit):
        return Tree(f"bool {str(e.value).lower()}")
    if isinstance(e, N.NullLit):
        return Tree("null")
    if isinstance(e, N.This):
        return Tree("this")
    if isinstance(e, N.VarRef):
        return Tree(f"var {e.name}")
    if isinstance(e, N.FieldGet):
        return Tree(f"fieldget {e.name}", [_expr(e.target)])
    if isinstance(e, N.StaticGet):
        return Tree(f"staticget {e.cls}.{e.name}")
    if isinstance(e, N.Call):
        # receiver presence changes arity, so the label disambiguates
        if e.target is None:
            return Tree(f"call {e.name}", [_expr(a) for a in e.args])
        return Tree(
            f"call-recv {e.name}", [_expr(e.target)] + [_expr(a) for a in e.args]
        )
    if isinstance(e, N.StaticCall):
        return Tree(f"scall {e.cls}.{e.name}", [_expr(a) for a in e.args])
    if isinstance(e, N.New):
        return Tree(f"new {e.cls}", [_expr(a) for a in e.args])
    if isinstance(e, N.Binary):
        return Tree(f"binary {e.op}", [_expr(e.left), _expr(e.right)])
    if isinstance(e, N.Unary):
        return Tree(f"unary {e.op}", [_expr(e.operand)])
    if isinstance(e, N.Cast):
        return Tree(f"cast {e.type}", [_expr(e.expr)])
    raise TypeError(f"unknown expression {type(e).__name__}")


# ====== POSTORDER ARRAYS ======


class Flat:
    """1-indexed postorder view of a tree.

    nodes[i] is the node at postorder position i, lld[i] the postorder
    index of its leftmost leaf descendant, keyroots the ascending list
    of positions with a distinct leftmost leaf (the outermost of each).
    Index 0 is a dummy so the arrays line up with the usual recurrences.
    """

    def __init__(self, root: Tree):
        nodes: list[Tree] = [None]  # type: ignore[list-item]
        lld: list[int] = [0]

        def walk(t: Tree) -> int:
            first = None
            for c in t.children:
                got = walk(c)
                if first is None:
                    first = got
            nodes.append(t)
            me = len(nodes) - 1
            lld.append(first if first is not None else me)
            return lld[me]

        walk(root)
        self.nodes = nodes
        self.lld = np.array(lld, dtype=np.int64)
        self.n = len(nodes) - 1
        outer: dict[int, int] = {}
        for i in range(1, self.n + 1):
            outer[int(self.lld[i])] = i
        self.keyroots = np.array(sorted(outer.values()), dtype=np.int64)
        # parent / child-position tables, postorder indexed
        self.parent = np.zeros(self.n + 1, dtype=np.int64)
        self.child_pos = np.zeros(self.n + 1, dtype=np.int64)

        def link(t: Tree, pid: int) -> None:
            my = ids[id(t)]
            self.parent[my] = pid
            for pos, c in enumerate(t.children):
                link(c, my)
                self.child_pos[ids[id(c)]] = pos

        ids = {id(nodes[i]): i for i in range(1, self.n + 1)}
        link(root, 0)

    def labels(self) -> list[str]:
        return [""] + [t.label for t in self.nodes[1:]]

    def subtree_ids(self, i: int) -> range:
        return range(int(self.lld[i]), i + 1)
