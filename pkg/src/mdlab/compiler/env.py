"""Program-wide symbol tables.

An Env maps every qualified class name (top-level, nested, builtin) to
a ClassSym. Privacy is unit-scoped: a top-level class and its nested
classes form one unit and may touch one another's private members;
crossing a unit boundary requires public access.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from mdlab.lang import (
    BoolLit, ClassAst, CtorDecl, Diagnostic, FieldDecl, IntLit, MethodDecl,
    NestedClassDecl, NO_SPAN, StaticBlock, StrLit,
)

STR_BUILDER = "minij.StrBuilder"
DIV_BY_ZERO = "minij.DivByZero"
NULL_REF = "minij.NullRef"
BUILTIN_CLASSES = (STR_BUILDER, DIV_BY_ZERO, NULL_REF)


@dataclass
class FieldSym:
    owner: str
    name: str
    type: str
    static: bool
    final: bool
    private: bool
    decl_index: int            # member position within the declaring class
    decl: Optional[FieldDecl] = None
    const_value: object = None # literal value when foldable, else None
    foldable: bool = False


@dataclass
class MethodSym:
    owner: str
    name: str
    params: tuple[str, ...]
    ret: str
    static: bool
    private: bool
    decl: Optional[MethodDecl] = None


@dataclass
class CtorSym:
    owner: str
    params: tuple[str, ...]
    private: bool
    decl: Optional[CtorDecl] = None    # None: synthesized default


@dataclass
class ClassSym:
    name: str
    super_name: Optional[str]
    unit: str                  # owning top-level class (itself if top-level)
    builtin: bool = False
    private: bool = False      # nested classes only
    ast: Union[ClassAst, NestedClassDecl, None] = None
    fields: dict[str, FieldSym] = field(default_factory=dict)
    methods: dict[str, list[MethodSym]] = field(default_factory=dict)
    ctors: list[CtorSym] = field(default_factory=list)
    nested_names: list[str] = field(default_factory=list)


class Env:
    def __init__(self):
        self.classes: dict[str, ClassSym] = {}
        for b in BUILTIN_CLASSES:
            sym = ClassSym(b, None, b, builtin=True)
            sym.ctors.append(CtorSym(b, (), private=False))
            self.classes[b] = sym

    # ---- queries ----

    def has(self, name: str) -> bool:
        return name in self.classes

    def super_chain(self, name: str):
        seen = set()
        while name is not None and name not in seen:
            seen.add(name)
            sym = self.classes.get(name)
            if sym is None:
                return
            yield sym
            name = sym.super_name

    def is_subtype(self, sub: str, sup: str) -> bool:
        if sub == "null":
            return True
        return any(s.name == sup for s in self.super_chain(sub))

    def lookup_field(self, cls: str, name: str) -> Optional[FieldSym]:
        for sym in self.super_chain(cls):
            f = sym.fields.get(name)
            if f is not None:
                return f
        return None

    def lookup_methods(self, cls: str, name: str) -> list[MethodSym]:
        """Overload candidates, nearest declaration wins per signature."""
        out: list[MethodSym] = []
        seen: set[tuple] = set()
        for sym in self.super_chain(cls):
            for m in sym.methods.get(name, ()):
                if m.params not in seen:
                    seen.add(m.params)
                    out.append(m)
        return out

    def lookup_ctors(self, cls: str) -> list[CtorSym]:
        sym = self.classes.get(cls)
        return list(sym.ctors) if sym else []

    def unit_of(self, cls: str) -> Optional[str]:
        sym = self.classes.get(cls)
        return sym.unit if sym else None


def _scalar_literal(expr) -> tuple[bool, object]:
    if isinstance(expr, IntLit):
        return True, expr.value
    if isinstance(expr, BoolLit):
        return True, expr.value
    if isinstance(expr, StrLit):
        return True, expr.value
    return False, None


def _register_members(env: Env, sym: ClassSym, members, diags: list[Diagnostic]) -> None:
    for idx, m in enumerate(members):
        if isinstance(m, FieldDecl):
            if m.name in sym.fields:
                diags.append(Diagnostic(f"duplicate field {sym.name}.{m.name}", m.span))
                continue
            foldable, value = (False, None)
            if m.static and m.final and m.init is not None:
                foldable, value = _scalar_literal(m.init)
            sym.fields[m.name] = FieldSym(
                sym.name, m.name, m.type, m.static, m.final, m.private,
                decl_index=idx, decl=m, const_value=value, foldable=foldable,
            )
        elif isinstance(m, MethodDecl):
            params = tuple(p.type for p in m.params)
            bucket = sym.methods.setdefault(m.name, [])
            if any(o.params == params for o in bucket):
                diags.append(Diagnostic(
                    f"duplicate method {sym.name}.{m.name}({','.join(params)})", m.span))
                continue
            bucket.append(MethodSym(sym.name, m.name, params, m.ret, m.static, m.private, m))
        elif isinstance(m, CtorDecl):
            params = tuple(p.type for p in m.params)
            if any(c.params == params for c in sym.ctors):
                diags.append(Diagnostic(
                    f"duplicate constructor {sym.name}({','.join(params)})", m.span))
                continue
            sym.ctors.append(CtorSym(sym.name, params, m.private, m))
        elif isinstance(m, (StaticBlock, NestedClassDecl)):
            pass
        else:
            raise TypeError(f"unexpected member {type(m).__name__}")
    if not any(c.decl is not None for c in sym.ctors):
        sym.ctors.append(CtorSym(sym.name, (), private=False))


def build_env(asts: dict[str, ClassAst]) -> tuple[Env, list[Diagnostic]]:
    """Symbol tables for a whole program. Diagnostics cover structural
    faults only: duplicate classes/members, bad or cyclic supertypes."""
    env = Env()
    diags: list[Diagnostic] = []

    for name, ast in sorted(asts.items()):
        if name != ast.name:
            diags.append(Diagnostic(f"class {ast.name} registered under {name}", ast.span))
        if env.has(name):
            diags.append(Diagnostic(f"duplicate class {name}", ast.span))
            continue
        sym = ClassSym(name, ast.superclass, unit=name, ast=ast)
        env.classes[name] = sym
        for m in ast.members:
            if isinstance(m, NestedClassDecl):
                nname = f"{name}.{m.name}"
                if env.has(nname):
                    diags.append(Diagnostic(f"duplicate class {nname}", m.span))
                    continue
                env.classes[nname] = ClassSym(nname, None, unit=name, ast=m, private=m.private)
                sym.nested_names.append(nname)

    for name, ast in sorted(asts.items()):
        sym = env.classes.get(name)
        if sym is None or sym.ast is not ast:
            continue
        sup = ast.superclass
        if sup is not None:
            if not env.has(sup):
                diags.append(Diagnostic(f"unknown superclass {sup}", ast.span))
                sym.super_name = None
            elif env.classes[sup].builtin:
                diags.append(Diagnostic(f"cannot extend builtin {sup}", ast.span))
                sym.super_name = None
        _register_members(env, sym, ast.members, diags)
        for m in ast.members:
            if isinstance(m, NestedClassDecl):
                nsym = env.classes.get(f"{name}.{m.name}")
                if nsym is not None and nsym.ast is m:
                    _register_members(env, nsym, m.members, diags)

    # break inheritance cycles so later passes terminate
    for name in sorted(asts):
        sym = env.classes.get(name)
        if sym is None:
            continue
        seen, cur = {name}, sym.super_name
        while cur is not None:
            if cur in seen:
                diags.append(Diagnostic(f"inheritance cycle through {name}", NO_SPAN))
                sym.super_name = None
                break
            seen.add(cur)
            nxt = env.classes.get(cur)
            cur = nxt.super_name if nxt else None

    return env, diags
