"""Stack bytecode: model, assembly format, verifier, interpreter, test format."""

from mdlab.vm.model import (
    OPS, POOL_REF_OPS, TERMINAL_OPS, BytecodeClass, FieldInfo, Handler,
    Instr, MethodBody, bytecode_equal, canonicalize_pool, code_offsets,
    flatten_classes, instr_width, method_id, parse_mjc, serialize_mjc,
)
from mdlab.vm.verify import verify_class, verify_program
from mdlab.vm.interp import (
    DEFAULT_FUEL, FRAME_BUDGET, ObjRef, Verdict, execute, format_value,
)
from mdlab.vm.testfmt import TestCase, TestResult, parse_tj, render_tj, run_test, run_tests

__all__ = [
    "OPS", "POOL_REF_OPS", "TERMINAL_OPS", "BytecodeClass", "FieldInfo",
    "Handler", "Instr", "MethodBody", "bytecode_equal", "canonicalize_pool",
    "code_offsets", "flatten_classes", "instr_width", "method_id",
    "parse_mjc", "serialize_mjc",
    "verify_class", "verify_program",
    "DEFAULT_FUEL", "FRAME_BUDGET", "ObjRef", "Verdict", "execute",
    "format_value",
    "TestCase", "TestResult", "parse_tj", "render_tj", "run_test", "run_tests",
]
