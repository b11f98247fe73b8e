"""mdlab: a miniature decompiler laboratory.

A small class-based language (MiniJ), two deliberately divergent
compilers, a stack-bytecode VM with a deterministic fuel budget, three
fallible decompiler backends, a tree-edit-distance distortion metric, an
assessment pipeline with a five-way outcome classification, and a
fragment-merging meta-decompiler that recombines partial outputs into a
recompilable whole.
"""

__version__ = "0.1.0"
