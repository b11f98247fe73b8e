"""Shared helpers for building tiny programs inside tests."""

from __future__ import annotations

from mdlab.compiler import VARIANTS, compile_program
from mdlab.lang import ClassAst, parse
from mdlab.vm import BytecodeClass


def parse_all(*sources: str) -> dict[str, ClassAst]:
    asts = {}
    for src in sources:
        r = parse(src)
        assert r.ok, [d.render() for d in r.diagnostics]
        asts[r.ast.name] = r.ast
    return asts


def compile_all(*sources: str, variant: str = "A"):
    asts = parse_all(*sources)
    env, classes, diags = compile_program(asts, VARIANTS[variant])
    assert classes, [d.render() for d in diags]
    return env, classes


def compile_expect_errors(*sources: str, variant: str = "A") -> list[str]:
    asts = parse_all(*sources)
    _env, classes, diags = compile_program(asts, VARIANTS[variant])
    assert not classes
    return [d.message for d in diags if d.severity == "error"]
