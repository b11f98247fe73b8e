"""Canonical renaming of locals, parameters, and catch variables.

Distance between two sources should not charge for the names a tool
invented, so every binder is renamed to v0, v1, ... in declaration
order per member before trees are compared.  Field, method, and type
names carry meaning and stay untouched.  A bare name is renamed only
when some enclosing binder declares it; otherwise it denotes a field
of the enclosing class and keeps its name.  Scope rules follow the
checker: blocks scope their declarations, a catch variable is visible
only in its handler, and a declaration's initializer is resolved
before the name is bound.
"""

from __future__ import annotations

import copy

from ..lang import nodes as N


def normalize_names(ast: N.ClassAst) -> N.ClassAst:
    out = copy.deepcopy(ast)
    _members(out.members)
    return out


def _members(members: list[N.Member]) -> None:
    for m in members:
        if isinstance(m, (N.MethodDecl, N.CtorDecl)):
            _callable(m.params, m.body)
        elif isinstance(m, N.StaticBlock):
            _callable([], m.body)
        elif isinstance(m, N.NestedClassDecl):
            _members(m.members)


class _Renamer:
    def __init__(self) -> None:
        self.scopes: list[dict[str, str]] = []
        self.count = 0

    def bind(self, name: str) -> str:
        new = f"v{self.count}"
        self.count += 1
        self.scopes[-1][name] = new
        return new

    def lookup(self, name: str) -> str | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None


def _callable(params: list[N.Param], body: N.Block) -> None:
    r = _Renamer()
    r.scopes.append({})
    for p in params:
        p.name = r.bind(p.name)
    _stmt(body, r)


def _stmt(s: N.Stmt, r: _Renamer) -> None:
    if isinstance(s, N.VarDecl):
        if s.init is not None:
            _expr(s.init, r)
        s.name = r.bind(s.name)
    elif isinstance(s, N.Assign):
        _expr(s.target, r)
        _expr(s.value, r)
    elif isinstance(s, (N.ExprStmt, N.Print)):
        _expr(s.expr, r)
    elif isinstance(s, N.Block):
        r.scopes.append({})
        for inner in s.stmts:
            _stmt(inner, r)
        r.scopes.pop()
    elif isinstance(s, N.If):
        _expr(s.cond, r)
        _stmt(s.then, r)
        if s.orelse is not None:
            _stmt(s.orelse, r)
    elif isinstance(s, N.While):
        _expr(s.cond, r)
        _stmt(s.body, r)
    elif isinstance(s, N.TryCatch):
        _stmt(s.body, r)
        r.scopes.append({})
        s.exc_name = r.bind(s.exc_name)
        _stmt(s.handler, r)
        r.scopes.pop()
    elif isinstance(s, N.Throw):
        _expr(s.expr, r)
    elif isinstance(s, N.Return):
        if s.value is not None:
            _expr(s.value, r)
    # Break / Continue carry nothing


def _expr(e: N.Expr, r: _Renamer) -> None:
    if isinstance(e, N.VarRef):
        hit = r.lookup(e.name)
        if hit is not None:
            e.name = hit
    elif isinstance(e, N.FieldGet):
        _expr(e.target, r)
    elif isinstance(e, N.Call):
        if e.target is not None:
            _expr(e.target, r)
        for a in e.args:
            _expr(a, r)
    elif isinstance(e, (N.StaticCall, N.New)):
        for a in e.args:
            _expr(a, r)
    elif isinstance(e, N.Binary):
        _expr(e.left, r)
        _expr(e.right, r)
    elif isinstance(e, N.Unary):
        _expr(e.operand, r)
    elif isinstance(e, N.Cast):
        _expr(e.expr, r)
    # literals, this, staticget carry no local names
