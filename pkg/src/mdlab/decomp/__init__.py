"""Decompilers: a shared bytecode-to-source engine and three backends."""

from .backends import (
    BUILTINS, FAILURE_MARKER_CLASS, DecompOptions, DecompOutput,
    DecompilerSpec, LITERALIST, OPTIMIST, SUGARER, decompile, get_decompiler,
)
from .core import Policy, StructureError, assemble_class, collect_cast_sites
from .shapes import SHAPES

__all__ = [
    "BUILTINS",
    "DecompOptions",
    "DecompOutput",
    "DecompilerSpec",
    "FAILURE_MARKER_CLASS",
    "LITERALIST",
    "OPTIMIST",
    "Policy",
    "SHAPES",
    "StructureError",
    "SUGARER",
    "assemble_class",
    "collect_cast_sites",
    "decompile",
    "get_decompiler",
]
