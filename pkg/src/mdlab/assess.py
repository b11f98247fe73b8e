"""Four-layer assessment of one decompiler run on one class.

The layers run in order: decompile (measuring syntactic distortion on
the parsed output), recompile under the same compiler variant, compare
canonicalized bytecode, and run the class's tests on the recompiled
program.  A failed layer leaves every later metric N/A.  The outcome
is exactly one of five categories:

    EmptyOutput          the decompiler declined or produced nothing
    NotRecompilable      output text does not compile
    Deceptive            recompiles, but at least one test fails or
                         times out
    EquivModuloInputs    recompiles, bytecode differs, all tests pass
    StrictlyEquivalent   recompiled bytecode is identical modulo
                         constant-pool order

Infrastructure breakage (the original class failing to compile, a
backend crashing, a zero-test class reaching the semantic layer) is
never folded into a category: it raises ToolFault with a diagnostic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from mdlab.astdiff import Distortion, distortion
from mdlab.compiler import VARIANTS, Variant, compile_program, recompile_check
from mdlab.decomp import BUILTINS, DecompOptions, DecompilerSpec, decompile
from mdlab.lang.nodes import ClassAst
from mdlab.lang.parser import parse
from mdlab.vm.interp import DEFAULT_FUEL
from mdlab.vm.model import BytecodeClass, bytecode_equal
from mdlab.vm.testfmt import TestCase, TestResult, run_tests

CATEGORIES = (
    "EmptyOutput",
    "NotRecompilable",
    "Deceptive",
    "EquivModuloInputs",
    "StrictlyEquivalent",
)

NA = "N/A"


class ToolFault(RuntimeError):
    """Infrastructure failure, as opposed to a subject failure."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class TestCounts:
    __test__ = False  # matches pytest's collection prefix by accident

    passed: int = 0
    failed: int = 0
    timeout: int = 0

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.timeout

    @property
    def all_pass(self) -> bool:
        return self.total > 0 and self.failed == 0 and self.timeout == 0

    def to_json(self) -> dict:
        return {"pass": self.passed, "fail": self.failed, "timeout": self.timeout}

    @staticmethod
    def tally(results: list[TestResult]) -> "TestCounts":
        status = [r.status for r in results]
        return TestCounts(
            passed=status.count("pass"),
            failed=status.count("fail"),
            timeout=status.count("timeout"),
        )


def classify(
    output_empty: bool,
    recompiled: bool,
    bytecode_identical: bool | None,
    tests: TestCounts | None,
) -> str:
    """The unique category for one run; inconsistent fields raise."""
    if output_empty:
        if recompiled or bytecode_identical is not None or tests is not None:
            raise ToolFault("classify", "empty output cannot carry later metrics")
        return "EmptyOutput"
    if not recompiled:
        if bytecode_identical is not None or tests is not None:
            raise ToolFault("classify", "recompile failed but later metrics present")
        return "NotRecompilable"
    if bytecode_identical is None:
        raise ToolFault("classify", "recompiled run lacks a bytecode comparison")
    if bytecode_identical:
        return "StrictlyEquivalent"
    if tests is None or tests.total == 0:
        raise ToolFault(
            "classify",
            "bytecode differs on a class with no tests; no category is defined",
        )
    if tests.failed or tests.timeout:
        return "Deceptive"
    return "EquivModuloInputs"


@dataclass
class AssessmentRecord:
    class_name: str
    compiler: str
    decompiler: str
    category: str
    distortion: Distortion | None
    bytecode_identical: bool | None
    tests: TestCounts | None
    elapsed_ms: int
    # diagnostics kept out of the serialized record
    test_results: list[TestResult] = field(default_factory=list)
    recompile_errors: list[str] = field(default_factory=list)
    bytecode_diff: str = ""

    def to_json(self) -> dict:
        return {
            "class": self.class_name,
            "compiler": self.compiler,
            "decompiler": self.decompiler,
            "category": self.category,
            "distortion": self.distortion.to_json() if self.distortion else NA,
            "bytecode_identical": (
                NA if self.bytecode_identical is None else self.bytecode_identical
            ),
            "tests": self.tests.to_json() if self.tests is not None else NA,
            "elapsed_ms": self.elapsed_ms,
        }


def _as_variant(compiler: Variant | str) -> Variant:
    if isinstance(compiler, Variant):
        return compiler
    try:
        return VARIANTS[compiler]
    except KeyError:
        raise ToolFault("setup", f"unknown compiler variant {compiler!r}") from None


def _as_spec(decompiler: DecompilerSpec | str) -> DecompilerSpec:
    if isinstance(decompiler, DecompilerSpec):
        return decompiler
    try:
        return BUILTINS[decompiler]
    except KeyError:
        raise ToolFault("setup", f"unknown decompiler {decompiler!r}") from None


def _parse_program(
    class_src: str, context_srcs: list[str] | None
) -> tuple[ClassAst, dict[str, ClassAst]]:
    r = parse(class_src)
    if r.ast is None:
        msgs = "; ".join(d.render() for d in r.diagnostics)
        raise ToolFault("compile", f"original class does not parse: {msgs}")
    asts = {r.ast.name: r.ast}
    for k, src in enumerate(context_srcs or []):
        rc = parse(src)
        if rc.ast is None:
            raise ToolFault("compile", f"context class #{k} does not parse")
        asts[rc.ast.name] = rc.ast
    return r.ast, asts


def compile_original(
    class_src: str,
    compiler: Variant | str,
    context_srcs: list[str] | None = None,
) -> tuple[ClassAst, dict[str, ClassAst], dict[str, BytecodeClass]]:
    """Compile the subject program, faulting on any diagnostic error."""
    variant = _as_variant(compiler)
    original, asts = _parse_program(class_src, context_srcs)
    _env, classes, diags = compile_program(asts, variant)
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        msgs = "; ".join(d.render() for d in errors[:4])
        raise ToolFault("compile", f"original program does not compile: {msgs}")
    return original, asts, classes


def _swap_in(
    classes: dict[str, BytecodeClass], name: str, replacement: BytecodeClass
) -> dict[str, BytecodeClass]:
    out = {
        n: bc for n, bc in classes.items()
        if n != name and not n.startswith(name + ".")
    }
    out[name] = replacement
    for n in replacement.nested:
        out[n.name] = n
    return out


def assess(
    class_src: str,
    compiler: Variant | str,
    decompiler: DecompilerSpec | str,
    tests: list[TestCase],
    *,
    context_srcs: list[str] | None = None,
    options: DecompOptions | None = None,
    fuel: int = DEFAULT_FUEL,
) -> AssessmentRecord:
    """Run the full pipeline for one (class, compiler, decompiler) triple."""
    t0 = time.perf_counter()
    variant = _as_variant(compiler)
    spec = _as_spec(decompiler)
    original, asts, classes = compile_original(class_src, variant, context_srcs)
    name = original.name

    def record(
        category: str,
        dist: Distortion | None = None,
        same: bool | None = None,
        counts: TestCounts | None = None,
        **extra,
    ) -> AssessmentRecord:
        return AssessmentRecord(
            class_name=name,
            compiler=variant.name,
            decompiler=spec.name,
            category=category,
            distortion=dist,
            bytecode_identical=same,
            tests=counts,
            elapsed_ms=int((time.perf_counter() - t0) * 1000),
            **extra,
        )

    try:
        out = decompile(spec, classes[name], options)
    except ToolFault:
        raise
    except Exception as exc:
        raise ToolFault("decompile", f"{spec.name} crashed on {name}: {exc}") from exc
    if out.status == "empty":
        return record(classify(True, False, None, None))

    parsed = parse(out.source)
    dist = distortion(original, parsed.ast) if parsed.ast is not None else None

    rc = recompile_check(out.source, name, asts, variant)
    if not rc.ok:
        errs = [d.render() for d in rc.diagnostics if d.severity == "error"]
        return record(
            classify(False, False, None, None), dist, recompile_errors=errs
        )

    same, diff = bytecode_equal(classes[name], rc.bytecode)
    if not tests:
        # zero-test classes never reach the semantic layer; classify
        # rejects the (differs, no tests) combination with a fault
        return record(classify(False, True, same, None), dist, same)

    re_classes = _swap_in(classes, name, rc.bytecode)
    results = run_tests(re_classes, tests, fuel=fuel)
    counts = TestCounts.tally(results)
    return record(
        classify(False, True, same, counts),
        dist,
        same,
        counts,
        test_results=results,
        bytecode_diff="" if same else diff,
    )
