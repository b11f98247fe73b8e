"""Pipeline classification: five categories, faults, record shape."""

import pytest

from mdlab.assess import (
    NA,
    AssessmentRecord,
    TestCounts,
    ToolFault,
    assess,
    classify,
)
from mdlab.decomp import DecompOptions
from mdlab.vm.testfmt import TestCase

from test_decomp import MULTI_HANDLER, RECURSION, RT, SETTER, TRY_OVER_LOOP


def run(fix, backend, variant="A", tests=(), **kw):
    return assess(
        fix[0], variant, backend, list(tests), context_srcs=list(fix[1:]), **kw
    )


OBSERVED_SETTER = ("""\
class t.Dial {
  static int limit;

  static void setLimit(int v) {
    t.Dial.limit = v;
  }

  static void drive() {
    t.Dial.setLimit(7);
    print(t.Dial.limit);
  }
}
""",)

NOT_IF = ("""\
class t.Flip {
  static int pick(bool b) {
    int r = 0;
    if (!b) {
      r = 1;
    } else {
      r = 2;
    }
    print(r);
    return r;
  }
}
""",)


# ====== classify as a pure function ======


def test_classify_covers_all_five_categories():
    assert classify(True, False, None, None) == "EmptyOutput"
    assert classify(False, False, None, None) == "NotRecompilable"
    assert classify(False, True, True, None) == "StrictlyEquivalent"
    assert classify(False, True, False, TestCounts(3, 1, 0)) == "Deceptive"
    assert classify(False, True, False, TestCounts(2, 0, 1)) == "Deceptive"
    assert classify(False, True, False, TestCounts(4, 0, 0)) == "EquivModuloInputs"


def test_classify_rejects_inconsistent_stages():
    with pytest.raises(ToolFault):
        classify(True, True, None, None)
    with pytest.raises(ToolFault):
        classify(True, False, True, None)
    with pytest.raises(ToolFault):
        classify(False, False, False, None)
    with pytest.raises(ToolFault):
        classify(False, True, None, None)


def test_classify_faults_on_zero_tests_with_differing_bytecode():
    with pytest.raises(ToolFault):
        classify(False, True, False, None)
    with pytest.raises(ToolFault):
        classify(False, True, False, TestCounts(0, 0, 0))


# ====== full pipeline per category ======


def test_literalist_straight_line_is_strictly_equivalent():
    tc = TestCase("t1", "t.Calc.label(int)", [3], "", "normal")
    rec = run(RT["straightline"], "literalist", tests=[tc])
    assert rec.category == "StrictlyEquivalent"
    assert rec.bytecode_identical is True
    assert rec.distortion is not None
    assert rec.tests == TestCounts(1, 0, 0)


def test_zero_test_class_can_still_reach_strict():
    rec = run(RT["straightline"], "literalist")
    assert rec.category == "StrictlyEquivalent"
    assert rec.tests is None


def test_sugarer_branch_polarity_is_equiv_modulo_inputs():
    tests = [
        TestCase("on", "t.Flip.pick(bool)", [True], "2\n", "normal"),
        TestCase("off", "t.Flip.pick(bool)", [False], "1\n", "normal"),
    ]
    rec = run(NOT_IF, "sugarer", tests=tests)
    assert rec.category == "EquivModuloInputs"
    assert rec.bytecode_identical is False
    assert rec.tests == TestCounts(2, 0, 0)
    assert rec.distortion is not None


def test_zero_test_class_with_differing_bytecode_faults():
    with pytest.raises(ToolFault):
        run(NOT_IF, "sugarer")


def test_optimist_setter_is_deceptive():
    tests = [TestCase("t1", "t.Dial.drive()", [], "7\n", "normal")]
    rec = run(OBSERVED_SETTER, "optimist", tests=tests)
    assert rec.category == "Deceptive"
    assert rec.bytecode_identical is False
    assert rec.tests.failed == 1
    assert rec.tests.timeout == 0


def test_optimist_cast_drop_is_deceptive_via_timeout():
    tests = [TestCase("t1", "t.Router.drive()", [], "", "normal")]
    rec = run(RECURSION, "optimist", tests=tests, fuel=50_000)
    assert rec.category == "Deceptive"
    assert rec.tests.timeout == 1
    assert rec.tests.failed == 0


def test_literalist_declines_multi_handler_class():
    tc = TestCase("t1", "t.Duo.guard(int)", [2], "", "normal")
    rec = run(MULTI_HANDLER, "literalist", tests=[tc])
    assert rec.category == "EmptyOutput"
    assert rec.distortion is None
    assert rec.bytecode_identical is None
    assert rec.tests is None


def test_literalist_try_over_loop_is_not_recompilable():
    tc = TestCase("t1", "t.Retry.plain(int)", [4], "", "normal")
    rec = run(TRY_OVER_LOOP, "literalist", tests=[tc])
    assert rec.category == "NotRecompilable"
    # the output parses, so distortion is already measured
    assert rec.distortion is not None
    assert rec.bytecode_identical is None
    assert rec.tests is None
    assert rec.recompile_errors


def test_disguised_failure_flips_not_recompilable_to_deceptive():
    tc = TestCase("t1", "t.Retry.count(int)", [3], "", "normal")
    rec = run(
        TRY_OVER_LOOP, "literalist", tests=[tc],
        options=DecompOptions(disguise_failures=True),
    )
    assert rec.category == "Deceptive"
    assert rec.tests.failed == 1


def test_faithful_backends_on_setter_stay_strict():
    for backend in ("literalist", "sugarer"):
        rec = run(SETTER, backend)
        assert rec.category == "StrictlyEquivalent", backend


# ====== faults and the record shape ======


def test_unparseable_original_faults():
    with pytest.raises(ToolFault) as e:
        assess("class t.Broken {", "A", "literalist", [])
    assert e.value.stage == "compile"


def test_uncompilable_original_faults():
    src = "class t.Bad {\n  static int f() {\n    return ghost;\n  }\n}\n"
    with pytest.raises(ToolFault) as e:
        assess(src, "A", "literalist", [])
    assert e.value.stage == "compile"


def test_unknown_compiler_and_decompiler_fault():
    with pytest.raises(ToolFault):
        run(RT["straightline"], "literalist", variant="C")
    with pytest.raises(ToolFault):
        run(RT["straightline"], "mystery")


def test_record_json_shape():
    tc = TestCase("t1", "t.Calc.label(int)", [3], "", "normal")
    rec = run(RT["straightline"], "literalist", tests=[tc])
    j = rec.to_json()
    assert set(j) == {
        "class", "compiler", "decompiler", "category", "distortion",
        "bytecode_identical", "tests", "elapsed_ms",
    }
    assert j["class"] == "t.Calc"
    assert j["compiler"] == "A"
    assert j["decompiler"] == "literalist"
    assert j["tests"] == {"pass": 1, "fail": 0, "timeout": 0}
    assert j["distortion"]["edits"] == rec.distortion.edits
    assert isinstance(j["elapsed_ms"], int)


def test_record_json_uses_na_markers():
    rec = run(MULTI_HANDLER, "literalist")
    j = rec.to_json()
    assert j["distortion"] == NA
    assert j["bytecode_identical"] == NA
    assert j["tests"] == NA


def test_every_category_is_reachable_and_valid():
    seen = set()
    tc_calc = TestCase("t1", "t.Calc.label(int)", [3], "", "normal")
    seen.add(run(RT["straightline"], "literalist", tests=[tc_calc]).category)
    seen.add(run(MULTI_HANDLER, "literalist").category)
    seen.add(run(TRY_OVER_LOOP, "literalist").category)
    tests = [TestCase("on", "t.Flip.pick(bool)", [True], "2\n", "normal")]
    seen.add(run(NOT_IF, "sugarer", tests=tests).category)
    td = [TestCase("t1", "t.Dial.drive()", [], "7\n", "normal")]
    seen.add(run(OBSERVED_SETTER, "optimist", tests=td).category)
    assert seen == {
        "StrictlyEquivalent", "EmptyOutput", "NotRecompilable",
        "EquivModuloInputs", "Deceptive",
    }
