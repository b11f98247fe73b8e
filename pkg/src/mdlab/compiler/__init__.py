"""Source-to-bytecode pipeline: symbols, type analysis, two lowering variants."""

from mdlab.compiler.env import (
    BUILTIN_CLASSES, ClassSym, CtorSym, Env, FieldSym, MethodSym, build_env,
)
from mdlab.compiler.analysis import UnitInfo, analyze_unit
from mdlab.compiler.codegen import (
    VARIANT_A, VARIANT_B, VARIANTS, Variant, compile_program, compile_unit,
    recompile_check,
)

__all__ = [
    "BUILTIN_CLASSES", "ClassSym", "CtorSym", "Env", "FieldSym", "MethodSym",
    "build_env",
    "UnitInfo", "analyze_unit",
    "VARIANT_A", "VARIANT_B", "VARIANTS", "Variant",
    "compile_program", "compile_unit", "recompile_check",
]
