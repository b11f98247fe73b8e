"""Syntactic distance between original and decompiled sources."""

from .api import (
    EXACT_CAP,
    EXACT_LIMIT,
    Distortion,
    Script,
    distortion,
    edit_distance,
    edit_distance_trees,
    node_count,
)
from .collapse import Edit, ReplayError, ZssScript, build_zss_script
from .exact import OpsScript, exact_script
from .normalize import normalize_names
from .tree import Flat, Tree, ast_to_tree, canon, copy_tree, from_canon, size
from .zss import (
    NUMBA_ENABLED,
    treedist_numba,
    treedist_numpy,
    treedist_tables,
    zss_trace,
)

__all__ = [
    "EXACT_CAP",
    "EXACT_LIMIT",
    "Distortion",
    "Edit",
    "Flat",
    "NUMBA_ENABLED",
    "OpsScript",
    "ReplayError",
    "Script",
    "Tree",
    "ZssScript",
    "ast_to_tree",
    "build_zss_script",
    "canon",
    "copy_tree",
    "distortion",
    "edit_distance",
    "edit_distance_trees",
    "exact_script",
    "from_canon",
    "node_count",
    "normalize_names",
    "size",
    "treedist_numba",
    "treedist_numpy",
    "treedist_tables",
    "zss_trace",
]
