"""Bytecode model, verifier, interpreter, and test-file format."""

from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlab.vm import (
    DEFAULT_FUEL, BytecodeClass, FieldInfo, Handler, Instr, MethodBody,
    bytecode_equal, canonicalize_pool, execute, parse_mjc,
    parse_tj, render_tj, run_test, serialize_mjc, verify_class,
)
from mdlab.vm.model import POOL_REF_OPS, MjcFormatError
from mdlab.vm.testfmt import TestCase as TjCase, TjFormatError
from util import compile_all

# ====== MODEL ======


def test_instr_operand_arity_is_checked():
    Instr("LOAD", 0)
    Instr("ADD")
    with pytest.raises(ValueError):
        Instr("ADD", 1)
    with pytest.raises(ValueError):
        Instr("LOAD")
    with pytest.raises(ValueError):
        Instr("FROB", 1)


def _linear(name: str, code: list[Instr], pool: list, ret: str = "int") -> BytecodeClass:
    m = MethodBody(name="f", params=("int",), ret=ret, static=True,
                   max_stack=4, max_locals=2, code=code)
    return BytecodeClass(name=name, pool=pool, methods=[m])


def _permute(bc: BytecodeClass, perm: list[int]) -> BytecodeClass:
    pool = [None] * len(bc.pool)
    for old, entry in enumerate(bc.pool):
        pool[perm[old]] = entry
    methods = []
    for m in bc.methods:
        code = [Instr(i.op, perm[i.arg]) if i.op in POOL_REF_OPS else i
                for i in m.code]
        methods.append(replace(m, code=code))
    return replace(bc, pool=pool, methods=methods)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(st.permutations(range(4)))
def test_canonicalize_pool_is_permutation_invariant(perm):
    pool = [("int", 7), ("str", "x"), ("int", 3),
            ("fieldref", "a.Box", "n", "int")]
    code = [Instr("LDC", 0), Instr("LDC", 1), Instr("POP"),
            Instr("POP"), Instr("LDC", 2), Instr("GETSTATIC", 3),
            Instr("ADD"), Instr("IRETURN")]
    base = _linear("a.Box", code, pool)
    shuffled = _permute(base, list(perm))
    assert serialize_mjc(canonicalize_pool(base)) == serialize_mjc(canonicalize_pool(shuffled))
    eq, diff = bytecode_equal(base, shuffled)
    assert eq, diff


def test_canonicalize_pool_is_idempotent_and_pure():
    pool = [("str", "b"), ("str", "a"), ("int", 1)]
    bc = _linear("a.Box", [Instr("LDC", 2), Instr("IRETURN")], pool)
    once = canonicalize_pool(bc)
    twice = canonicalize_pool(once)
    assert serialize_mjc(once) == serialize_mjc(twice)
    assert bc.pool == [("str", "b"), ("str", "a"), ("int", 1)]  # input untouched
    assert once.pool == [("int", 1), ("str", "a"), ("str", "b")]


def test_canonicalize_dedupes_with_remap():
    pool = [("int", 5), ("int", 5)]
    code = [Instr("LDC", 0), Instr("POP"), Instr("LDC", 1), Instr("IRETURN")]
    out = canonicalize_pool(_linear("a.Box", code, pool))
    assert out.pool == [("int", 5)]
    assert [i.arg for i in out.methods[0].code if i.op == "LDC"] == [0, 0]


def test_bytecode_equal_reports_a_diff_on_real_divergence():
    a = _linear("a.Box", [Instr("LDC", 0), Instr("IRETURN")], [("int", 1)])
    b = _linear("a.Box", [Instr("LDC", 0), Instr("NEG"), Instr("IRETURN")], [("int", 1)])
    eq, diff = bytecode_equal(a, b)
    assert not eq
    assert "NEG" in diff and "---" in diff


def test_mjc_round_trip_is_byte_exact():
    _env, classes = compile_all(
        "class t.Mix {\n"
        "  static final int K = 3;\n"
        "  int v;\n"
        "  Mix(int v) { this.v = v; }\n"
        "  static str go(int n) {\n"
        "    str s = \"n=\" + n;\n"
        "    while (n > 0) { n = n - 1; }\n"
        "    try { n = 1 / n; } catch (minij.DivByZero e) { s = s + \"!\"; }\n"
        "    return s;\n"
        "  }\n"
        "}\n"
    )
    for bc in classes.values():
        text = serialize_mjc(bc)
        again = parse_mjc(text)
        assert serialize_mjc(again) == text
        eq, diff = bytecode_equal(bc, again)
        assert eq, diff


def test_mjc_parser_rejects_malformed_input():
    good = serialize_mjc(_linear("a.Box", [Instr("LDC", 0), Instr("IRETURN")], [("int", 1)]))
    for mangle in (
        lambda t: t.replace("LDC", "LDQ"),
        lambda t: t.replace("0: LDC", "3: LDC"),      # wrong offset
        lambda t: t.replace("#0", "#9", 1),
        lambda t: "JUNK\n" + t,
    ):
        with pytest.raises(MjcFormatError):
            parse_mjc(mangle(good))


def test_string_pool_entries_escape_newlines_in_mjc():
    bc = _linear("a.Box", [Instr("LDC", 0), Instr("ARETURN")], [("str", "a\nb")], ret="str")
    text = serialize_mjc(bc)
    assert "a\\nb" in text and "a\nb" not in text
    assert parse_mjc(text).pool == [("str", "a\nb")]

# ====== VERIFIER ======


def _verify_errors(bc: BytecodeClass) -> list[str]:
    return [d.message for d in verify_class(bc)]


def test_verifier_accepts_compiled_output():
    _env, classes = compile_all(
        "class t.Ok {\n"
        "  static int f(int n) {\n"
        "    if (n > 2) { return n; }\n"
        "    return 2;\n"
        "  }\n"
        "}\n"
    )
    for bc in classes.values():
        assert _verify_errors(bc) == []


def test_verifier_flags_stack_underflow():
    bc = _linear("a.Box", [Instr("ADD"), Instr("IRETURN")], [])
    assert any("underflow" in m for m in _verify_errors(bc))


def test_verifier_flags_branch_outside_code():
    bc = _linear("a.Box", [Instr("GOTO", 99)], [])
    assert any("target" in m for m in _verify_errors(bc))


def test_verifier_flags_fall_off_end():
    bc = _linear("a.Box", [Instr("LOAD", 0)], [])
    assert any("fall" in m or "terminal" in m for m in _verify_errors(bc))


def test_verifier_flags_wrong_return_kind():
    bc = _linear("a.Box", [Instr("LOAD", 0), Instr("ARETURN")], [], ret="int")
    assert any("return" in m.lower() for m in _verify_errors(bc))


def test_verifier_flags_inconsistent_join_depth():
    # Two paths reach offset 6 with depths 1 and 2.
    code = [
        Instr("LOAD", 0),            # 0
        Instr("IFEQ", 6),            # 2
        Instr("CONST_TRUE"),         # 4
        Instr("CONST_TRUE"),         # 5
        Instr("IRETURN"),            # 6
    ]
    bc = _linear("a.Box", code, [])
    assert any("depth" in m or "inconsisten" in m for m in _verify_errors(bc))


def test_verifier_flags_dishonest_max_stack():
    m = MethodBody(name="f", params=(), ret="int", static=True,
                   max_stack=1, max_locals=0,
                   code=[Instr("LDC", 0), Instr("LDC", 0), Instr("ADD"), Instr("IRETURN")])
    bc = BytecodeClass(name="a.Box", pool=[("int", 1)], methods=[m])
    assert any("below computed" in m for m in _verify_errors(bc))


def test_verifier_flags_bad_handler_range():
    m = MethodBody(name="f", params=(), ret="int", static=True,
                   max_stack=2, max_locals=0,
                   code=[Instr("LDC", 0), Instr("IRETURN")],
                   handlers=[Handler(0, 40, 0, "minij.DivByZero")])
    bc = BytecodeClass(name="a.Box", pool=[("int", 1)], methods=[m])
    assert any("handler" in m for m in _verify_errors(bc))


def test_verifier_flags_pool_kind_mismatch():
    bc = _linear("a.Box", [Instr("GETSTATIC", 0), Instr("IRETURN")], [("int", 3)])
    assert any("fieldref" in m for m in _verify_errors(bc))

# ====== INTERPRETER ======


def _run(classes, entry, args, fuel=DEFAULT_FUEL):
    return execute(classes, entry, args, fuel)


ARITH_SRC = (
    "class t.Arith {\n"
    "  static int div(int a, int b) { return a / b; }\n"
    "  static int rem(int a, int b) { return a % b; }\n"
    "}\n"
)


def test_division_truncates_toward_zero():
    _env, classes = compile_all(
        "class t.Arith {\n"
        "  static void show(int a, int b) { print(a / b); print(a % b); }\n"
        "}\n"
    )
    table = {
        (-7, 2): ("-3", "-1"),
        (7, -2): ("-3", "1"),
        (-7, -2): ("3", "-1"),
        (7, 2): ("3", "1"),
    }
    for (a, b), (q, r) in table.items():
        v = _run(classes, "t.Arith.show(int,int)", [a, b])
        assert v.outcome == "normal"
        assert v.stdout.splitlines() == [q, r], (a, b)


def test_division_by_zero_throws_and_is_catchable():
    _env, classes = compile_all(
        ARITH_SRC,
        "class t.Catcher {\n"
        "  static str go(int n) {\n"
        "    try { n = t.Arith.div(n, 0); } catch (minij.DivByZero e) { return \"caught\"; }\n"
        "    return \"missed\";\n"
        "  }\n"
        "}\n",
    )
    v = _run(classes, "t.Arith.div(int,int)", [1, 0])
    assert v.outcome == "throws:minij.DivByZero"
    v = _run(classes, "t.Catcher.go(int)", [1])
    assert v.outcome == "normal"


def test_null_field_access_raises_null_ref():
    _env, classes = compile_all(
        "class t.Node {\n"
        "  int v;\n"
        "  t.Node next;\n"
        "  Node(int v) { this.v = v; this.next = null; }\n"
        "  static int deref(t.Node n) { return n.next.v; }\n"
        "  static int guarded() {\n"
        "    try { return t.Node.deref(new t.Node(1)); } catch (minij.NullRef e) { return -1; }\n"
        "  }\n"
        "}\n"
    )
    v = _run(classes, "t.Node.guarded()", [])
    assert v.outcome == "normal"


def test_virtual_dispatch_uses_runtime_class():
    _env, classes = compile_all(
        "class t.Beast {\n"
        "  str speak() { return \"generic\"; }\n"
        "  str greet() { return this.speak(); }\n"
        "}\n",
        "class t.Wolf extends t.Beast {\n"
        "  str speak() { return \"howl\"; }\n"
        "}\n",
        "class t.Zoo {\n"
        "  static void run() {\n"
        "    t.Beast b = new t.Wolf();\n"
        "    print(b.greet());\n"
        "    print(new t.Beast().greet());\n"
        "  }\n"
        "}\n",
    )
    v = _run(classes, "t.Zoo.run()", [])
    assert v.outcome == "normal"
    assert v.stdout == "howl\ngeneric\n"


def test_catch_matches_subtypes_of_user_exceptions():
    _env, classes = compile_all(
        "class t.Oops {\n}\n",
        "class t.BadOops extends t.Oops {\n}\n",
        "class t.Prog {\n"
        "  static str go() {\n"
        "    try { throw new t.BadOops(); } catch (t.Oops e) { return \"sub ok\"; }\n"
        "  }\n"
        "  static str miss() {\n"
        "    try { throw new t.Oops(); } catch (t.BadOops e) { return \"no\"; }\n"
        "  }\n"
        "}\n",
    )
    assert _run(classes, "t.Prog.go()", []).outcome == "normal"
    v = _run(classes, "t.Prog.miss()", [])
    assert v.outcome == "throws:t.Oops"


def test_print_formats_every_value_kind():
    _env, classes = compile_all(
        "class t.Show {\n"
        "  static void run() {\n"
        "    print(42);\n"
        "    print(true);\n"
        "    print(false);\n"
        "    print(\"text\");\n"
        "    t.Show s = null;\n"
        "    print(s);\n"
        "    print(new t.Show());\n"
        "    print(\"n=\" + 1 + \" b=\" + true);\n"
        "  }\n"
        "}\n"
    )
    v = _run(classes, "t.Show.run()", [])
    assert v.outcome == "normal"
    lines = v.stdout.splitlines()
    assert lines[:5] == ["42", "true", "false", "text", "null"]
    assert lines[5] == "t.Show#0"
    assert lines[6] == "n=1 b=true"


def test_object_ids_count_per_execution():
    _env, classes = compile_all(
        "class t.Ids {\n"
        "  static void run() { print(new t.Ids()); print(new t.Ids()); }\n"
        "}\n"
    )
    first = _run(classes, "t.Ids.run()", [])
    second = _run(classes, "t.Ids.run()", [])
    assert first.stdout == "t.Ids#0\nt.Ids#1\n"
    assert first.stdout == second.stdout and first.steps == second.steps


def test_static_initializers_run_in_sorted_class_order():
    _env, classes = compile_all(
        "class t.Zed {\n  static { print(\"zed\"); }\n  static void run() { }\n}\n",
        "class t.Abe {\n  static { print(\"abe\"); }\n}\n",
    )
    v = _run(classes, "t.Zed.run()", [])
    assert v.stdout == "abe\nzed\n"


def test_exception_escaping_clinit_is_a_crash():
    _env, classes = compile_all(
        "class t.Boom {\n"
        "  static int K;\n"
        "  static { t.Boom.K = 1 / 0; }\n"
        "  static void run() { }\n"
        "}\n"
    )
    v = _run(classes, "t.Boom.run()", [])
    assert v.outcome == "crash"
    assert "static initializer" in v.detail


def test_fuel_exhaustion_is_a_deterministic_timeout():
    _env, classes = compile_all(
        "class t.Spin {\n"
        "  static void run() { while (true) { } }\n"
        "}\n"
    )
    a = _run(classes, "t.Spin.run()", [], fuel=5_000)
    b = _run(classes, "t.Spin.run()", [], fuel=5_000)
    assert a.outcome == "timeout" and b.outcome == "timeout"
    assert a.steps == b.steps == 5_000


def test_fuel_boundary_is_exact():
    _env, classes = compile_all(
        "class t.Quick {\n  static int f() { return 1; }\n}\n"
    )
    full = _run(classes, "t.Quick.f()", [])
    assert full.outcome == "normal"
    assert _run(classes, "t.Quick.f()", [], fuel=full.steps).outcome == "normal"
    assert _run(classes, "t.Quick.f()", [], fuel=full.steps - 1).outcome == "timeout"


def test_unbounded_recursion_hits_frame_budget_not_host_stack():
    _env, classes = compile_all(
        "class t.Rec {\n"
        "  static int down(int n) { return t.Rec.down(n); }\n"
        "}\n"
    )
    v = _run(classes, "t.Rec.down(int)", [1])
    assert v.outcome == "timeout"
    assert v.steps < DEFAULT_FUEL


def test_missing_entry_and_bad_arity_are_crash_verdicts():
    _env, classes = compile_all("class t.One {\n  static int f(int n) { return n; }\n}\n")
    assert _run(classes, "t.One.g(int)", [1]).outcome == "crash"
    assert _run(classes, "t.One.f(int)", []).outcome == "crash"
    assert _run(classes, "t.One.f(int)", [1, 2]).outcome == "crash"


def test_reference_equality_is_identity():
    _env, classes = compile_all(
        "class t.Eq {\n"
        "  static void run() {\n"
        "    t.Eq a = new t.Eq();\n"
        "    t.Eq b = a;\n"
        "    print(a == b);\n"
        "    print(a == new t.Eq());\n"
        "    print(a != null);\n"
        "  }\n"
        "}\n"
    )
    v = _run(classes, "t.Eq.run()", [])
    assert v.stdout == "true\nfalse\ntrue\n"

# ====== TEST FILE FORMAT ======


TJ_TEXT = (
    "# golden behaviors\n"
    "TEST div_easy\n"
    "ENTRY t.Arith.div(int,int)\n"
    "ARGS 7 -2\n"
    "EXPECT \"\"\n"
    "OUTCOME normal\n"
    "\n"
    "TEST div_zero\n"
    "ENTRY t.Arith.div(int,int)\n"
    "ARGS 1 0\n"
    "EXPECT \"\"\n"
    "OUTCOME throws:minij.DivByZero\n"
)


def test_tj_round_trip():
    cases = parse_tj(TJ_TEXT)
    assert [c.id for c in cases] == ["div_easy", "div_zero"]
    assert cases[0].args == [7, -2]
    again = parse_tj(render_tj(cases))
    assert again == cases


def test_tj_rejects_bad_records():
    for bad in (
        "TEST a\nENTRY t.X.f()\nARGS 1.5\nEXPECT \"\"\nOUTCOME normal\n",   # float arg
        "TEST a\nENTRY t.X.f()\nARGS [1]\nEXPECT \"\"\nOUTCOME normal\n",  # container arg
        "TEST a\nENTRY t.X.f()\nARGS 1\nEXPECT \"\"\nOUTCOME explode\n",   # unknown outcome
        "TEST a\nARGS 1\nEXPECT \"\"\nOUTCOME normal\n",                   # missing entry
        "TEST a\nTEST b\n",                                                # duplicate key
    ):
        with pytest.raises(TjFormatError):
            parse_tj(bad)


def test_run_test_maps_verdicts_to_statuses():
    _env, classes = compile_all(
        ARITH_SRC,
        "class t.Loop {\n  static void spin() { while (true) { } }\n}\n",
        "class t.Say {\n  static void hi() { print(\"hi\"); }\n}\n",
    )
    ok = run_test(classes, TjCase("t1", "t.Say.hi()", [], "hi\n", "normal"))
    assert ok.status == "pass"
    wrong_out = run_test(classes, TjCase("t2", "t.Say.hi()", [], "bye\n", "normal"))
    assert wrong_out.status == "fail"
    wrong_outcome = run_test(
        classes, TjCase("t3", "t.Arith.div(int,int)", [1, 0], "", "normal"))
    assert wrong_outcome.status == "fail"
    expected_throw = run_test(
        classes, TjCase("t4", "t.Arith.div(int,int)", [1, 0], "", "throws:minij.DivByZero"))
    assert expected_throw.status == "pass"
    spun = run_test(classes, TjCase("t5", "t.Loop.spin()", [], "", "normal"), fuel=2_000)
    assert spun.status == "timeout"
    crashed = run_test(classes, TjCase("t6", "t.Gone.f()", [], "", "normal"))
    assert crashed.status == "fail"
